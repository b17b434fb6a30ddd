import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qmeter import kernels, sampling
from qmeter.errors import DegenerateSpectrumError, DimensionError
from qmeter.linalg import SIGMA_X, SIGMA_Z, operator_function, spectral
from qmeter.probe_qubit import LatticeProbe
from qmeter.wigner import (
    build_wigner,
    cached_wigner,
    generalized_average,
    product_average,
    spectral_measure,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)
dims = st.integers(min_value=2, max_value=6)


def _triple(d, rng):
    return sampling.hermitian(d, rng), sampling.hermitian(d, rng), sampling.density_matrix(d, rng)


class TestSpectralMeasure:
    def test_equally_spaced_merge(self):
        m = spectral_measure(np.array([0.0, 1.0, 2.0]))
        np.testing.assert_allclose(m.midpoints, [0, 0.5, 1, 1.5, 2])
        np.testing.assert_array_equal(m.plus_weights, [1, 2, 3, 2, 1])
        assert m.differences[2] == (-2.0, 0.0, 2.0)

    def test_generic_no_merge(self):
        m = spectral_measure(np.array([-1.3, 0.2, 0.9]))
        assert m.midpoints.size == 6

    def test_tolerance(self):
        m = spectral_measure(np.array([0.0, 1.0, 2.0 + 1e-12]))
        assert m.midpoints.size == 5


class TestBuild:
    def test_commuting_collapse(self, rng):
        d = 4
        p = sampling.hermitian(d, rng)
        rho = sampling.density_matrix(d, rng)
        table = build_wigner(p, p, rho)
        dec = spectral(p)
        pops = np.real(np.einsum("ji,jk,ki->i", dec.eigenvectors.conj(), rho, dec.eigenvectors))
        for i, o in enumerate(table.o_values):
            for c, mid in enumerate(table.p_midpoints):
                expected = pops[i] if abs(mid - o) < 1e-9 else 0.0
                assert abs(table.values[i, c] - expected) <= 1e-12

    def test_commuting_function(self, rng):
        # O = f(P) with f injective shares eigenvectors but not eigenvalues
        p = sampling.hermitian(3, rng)
        o = operator_function(p, np.exp)
        rho = sampling.density_matrix(3, rng)
        table = build_wigner(o, p, rho)
        dec = spectral(p)
        for i in range(3):
            c = int(np.argmin(np.abs(table.p_midpoints - dec.eigenvalues[i])))
            expected = np.real(dec.eigenvectors[:, i].conj() @ rho @ dec.eigenvectors[:, i])
            assert table.values[i, c] == pytest.approx(expected, abs=1e-12)
            assert np.sum(np.abs(table.values[i])) == pytest.approx(abs(expected), abs=1e-12)

    def test_qubit_marginal(self):
        table = build_wigner(SIGMA_Z, SIGMA_X, np.eye(2) / 2)
        np.testing.assert_allclose(table.values.sum(axis=1), [0.5, 0.5], atol=1e-15)
        np.testing.assert_allclose(table.p_midpoints, [-1, 0, 1])

    def test_reality_d3(self, rng):
        assert build_wigner(*_triple(3, rng)).imag_residual <= 1e-12

    def test_not_symmetric(self, rng):
        o, p, rho = _triple(3, rng)
        assert not np.allclose(build_wigner(o, p, rho).values, build_wigner(p, o, rho).values)

    def test_degenerate_rejected(self, rng):
        rho = sampling.density_matrix(3, rng)
        with pytest.raises(DegenerateSpectrumError):
            build_wigner(np.diag([1.0, 1.0, 2.0]), sampling.hermitian(3, rng), rho)
        with pytest.raises(DegenerateSpectrumError):
            build_wigner(sampling.hermitian(3, rng), np.eye(3), rho)

    def test_dimension_mismatch(self, rng):
        with pytest.raises(DimensionError):
            build_wigner(SIGMA_Z, sampling.hermitian(3, rng), np.eye(2) / 2)

    def test_rows(self):
        rows = list(build_wigner(SIGMA_Z, SIGMA_X, np.eye(2) / 2).rows())
        assert len(rows) == 6 and rows[0][:2] == (-1.0, -1.0)

    def test_cached(self, rng):
        o, p, rho = _triple(4, rng)
        a, b = build_wigner(o, p, rho), cached_wigner(o, p, rho)
        np.testing.assert_array_equal(a.values, b.values)
        assert cached_wigner(o, p, rho) is b


class TestProperties:
    @given(seeds, dims)
    def test_reality(self, seed, d):
        assert build_wigner(*_triple(d, np.random.default_rng(seed))).imag_residual <= 1e-12

    @given(seeds, dims)
    def test_marginals(self, seed, d):
        o, p, rho = _triple(d, np.random.default_rng(seed))
        table = build_wigner(o, p, rho)
        for f in (np.sin, np.square):
            via_o = generalized_average(table, lambda oo, pp: f(oo))
            via_p = generalized_average(table, lambda oo, pp: f(pp))
            assert abs(via_o - np.trace(operator_function(o, f) @ rho).real) <= 1e-12
            assert abs(via_p - np.trace(operator_function(p, f) @ rho).real) <= 1e-12

    @given(seeds, dims)
    def test_total_mass(self, seed, d):
        table = build_wigner(*_triple(d, np.random.default_rng(seed)))
        assert abs(generalized_average(table, lambda oo, pp: 1.0) - 1.0) <= 1e-12

    @given(seeds, dims)
    def test_product_is_symmetric_sandwich(self, seed, d):
        rng = np.random.default_rng(seed)
        o, p, rho = _triple(d, rng)
        table = build_wigner(o, p, rho)
        dec = spectral(p)
        v, w = dec.eigenvectors, dec.eigenvalues
        g_o = v.conj().T @ operator_function(o, np.cos) @ v
        r = v.conj().T @ rho @ v
        mids = 0.5 * (w[:, None] + w[None, :])
        expected = np.real(np.sum(g_o.T * r * np.sin(mids)))
        assert abs(product_average(table, np.cos, np.sin) - expected) <= 1e-12

    @pytest.mark.parametrize("backend", ["python", "cython"])
    def test_phase_invariance(self, backend, rng):
        if backend not in kernels.available_backends():
            pytest.skip("compiled kernels not built")
        o, p, rho = _triple(5, rng)
        ref = build_wigner(o, p, rho, backend=backend)
        vo = spectral(o).eigenvectors * np.exp(1j * rng.uniform(0, 2 * np.pi, 5))
        vp = spectral(p).eigenvectors * np.exp(1j * rng.uniform(0, 2 * np.pi, 5))
        raw = kernels.wigner_accumulate(
            vo.conj().T @ vp, vp.conj().T @ rho @ vp, ref.measure.index, ref.p_midpoints.size, backend=backend
        )
        assert np.max(np.abs(raw - ref.values)) <= 1e-12

    def test_backends_agree(self, rng):
        if "cython" not in kernels.available_backends():
            pytest.skip("compiled kernels not built")
        o, p, rho = _triple(6, rng)
        a = build_wigner(o, p, rho, backend="python")
        b = build_wigner(o, p, rho, backend="cython")
        assert np.max(np.abs(a.values - b.values)) <= 1e-14


def _discrete_wigner(rho, d, dq):
    """Lattice table built by explicit plane-wave sums, with no eigensolver."""
    freqs = 2 * np.pi * np.arange(d) / (d * dq)
    # <q_j|p_k> = exp(-2 pi i j k / d) / sqrt(d)
    plane = lambda j, k: np.exp(-2j * np.pi * j * k / d) / math.sqrt(d)
    table = {}
    for i in range(d):
        for j in range(d):
            for k in range(d):
                rho_jk = sum(
                    np.conj(plane(a, j)) * rho[a, b] * plane(b, k) for a in range(d) for b in range(d)
                )
                mid = round(0.5 * (freqs[j] + freqs[k]), 9)
                val = plane(i, j) * rho_jk * np.conj(plane(i, k))
                table[(i, mid)] = table.get((i, mid), 0) + val
    return table


class TestConjugatePair:
    @pytest.mark.parametrize("d", [2, 3])
    def test_lattice_recovery(self, d, rng):
        rho = sampling.density_matrix(d, rng)
        probe = LatticeProbe.build(rho, dq=1.0)
        table = build_wigner(probe.pointer, probe.write_in, probe.state)
        ref = _discrete_wigner(rho, d, 1.0)
        for i, o in enumerate(table.o_values):
            for c, mid in enumerate(table.p_midpoints):
                assert table.values[i, c] == pytest.approx(ref[(int(round(o)), round(mid, 9))].real, abs=1e-12)

    def test_d2_known_values(self):
        rho = np.array([[0.7, 0.2 - 0.1j], [0.2 + 0.1j, 0.3]])
        probe = LatticeProbe.build(rho)
        table = build_wigner(probe.pointer, probe.write_in, probe.state)
        np.testing.assert_allclose(table.p_midpoints, [0, np.pi / 2, np.pi], atol=1e-12)
        # in the P basis |p_0> = (1, 1)/sqrt2, |p_pi> = (1, -1)/sqrt2 the state has
        # populations 0.7, 0.3 and coherence 0.2 + 0.1i
        expected = np.array([[0.35, 0.2, 0.15], [0.35, -0.2, 0.15]])
        np.testing.assert_allclose(table.values, expected, atol=1e-12)
