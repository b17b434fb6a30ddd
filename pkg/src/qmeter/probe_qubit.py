"""An arbitrary finite-dimensional probe measuring a qubit observable.

The coupling is ``exp(i lam A (x) P)`` with ``A^2 = 1`` on the system and a
write-in observable ``P`` on the probe, so that

    exp(i lam A P) = cos(lam P) + i sin(lam P) A.

Every conditional probe statistic is then a combination of sandwiches of
the probe state between ``cos(lam P)`` and ``sin(lam P)``, weighted by the
weak values of ``A``.  Functions of ``P`` are evaluated exactly through the
spectral decomposition of ``P``; mixed averages of a noncommuting pair
``g(O) h(P)`` go through the generalized Wigner table.

Heisenberg-picture observables follow ``O_{+lam} = e^{i lam P} O e^{-i lam P}``.
With that convention the antisymmetric weak-value term in the average of
``g(O)`` is ``(Re A_w / 2) [<g(O_{-lam})> - <g(O_{+lam})>]``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

from .bloch import bloch_to_density, pauli_dot, qubit_axis
from .errors import DimensionError, NullConditioningError, OffLatticeError, ValidationError
from .linalg import DensityOperator, HermitianOperator, SpectralDecomposition, spectral
from .weak_values import WeakValueSet
from .wigner import build_wigner, cached_wigner, product_average

NULL_NORMALIZER = 1e-14
LATTICE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class ProbeSpec:
    state: DensityOperator
    write_in: HermitianOperator

    def __post_init__(self):
        if not isinstance(self.state, DensityOperator):
            object.__setattr__(self, "state", DensityOperator(self.state))
        if not isinstance(self.write_in, HermitianOperator):
            object.__setattr__(self, "write_in", HermitianOperator(self.write_in))
        if self.state.dim != self.write_in.dim:
            raise DimensionError("probe state and write-in observable differ in dimension")

    @property
    def dim(self) -> int:
        return self.state.dim

    @cached_property
    def p_spectrum(self) -> SpectralDecomposition:
        return spectral(self.write_in)

    @cached_property
    def p_populations(self) -> np.ndarray:
        """Diagonal of the probe state in the eigenbasis of ``P``."""
        v = self.p_spectrum.eigenvectors
        return np.real(np.einsum("ji,jk,ki->i", v.conj(), self.state.matrix, v))

    def average_of_p(self, f: Callable) -> float:
        """Ordinary average of ``f(P)`` over the probe state."""
        vals = np.asarray(f(self.p_spectrum.eigenvalues), dtype=float)
        return float(self.p_populations @ np.broadcast_to(vals, self.p_populations.shape))


@dataclass(frozen=True, eq=False)
class LatticeProbe(ProbeSpec):
    """Periodic lattice probe with pointer ``Q`` and its cyclic-shift generator ``P``.

    ``Q`` has eigenvalues ``q0 + k dq`` for ``k = 0 .. d-1``.  ``P`` is
    defined so that ``exp(i dq P)`` maps ``|Q = q_k>`` to ``|Q = q_{k+1}>``
    cyclically; any coupling that is an integer multiple of ``dq`` is then
    an exact pointer shift.
    """

    dq: float = 1.0
    q0: float = 0.0

    @classmethod
    def build(cls, state, dq: float = 1.0, q0: float = 0.0) -> "LatticeProbe":
        rho = state if isinstance(state, DensityOperator) else DensityOperator(state)
        if not dq > 0:
            raise ValidationError(f"lattice spacing must be positive, got {dq}")
        d = rho.dim
        return cls(state=rho, write_in=HermitianOperator(shift_generator(d, dq)), dq=dq, q0=q0)

    @property
    def q_values(self) -> np.ndarray:
        return self.q0 + self.dq * np.arange(self.dim)

    @property
    def pointer(self) -> HermitianOperator:
        return HermitianOperator(np.diag(self.q_values).astype(complex))

    def shift_steps(self, lam: float) -> int:
        m = lam / self.dq
        k = round(m)
        if abs(m - k) > LATTICE_TOL:
            raise OffLatticeError(f"off-lattice coupling: lam / dq = {m!r} is not an integer")
        return int(k)


def shift_generator(d: int, dq: float) -> np.ndarray:
    """Hermitian ``P`` with ``exp(i dq P)`` equal to the cyclic up-shift on ``d`` sites."""
    j = np.arange(d)
    fourier = np.exp(-2j * np.pi * np.outer(j, j) / d) / np.sqrt(d)
    freqs = 2 * np.pi * j / (d * dq)
    p = (fourier * freqs) @ fourier.conj().T
    return 0.5 * (p + p.conj().T)


@dataclass(frozen=True)
class ConditionalProbeState:
    """Probe state after successful postselection.

    ``normalizer`` is ``P(E_f) / omega``.
    """

    state: DensityOperator
    normalizer: float


def _trig(probe: ProbeSpec, lam: float):
    dec = probe.p_spectrum
    return dec.apply(lambda w: np.cos(lam * w)), dec.apply(lambda w: np.sin(lam * w))


def normalizer(probe: ProbeSpec, wvs: WeakValueSet, lam: float) -> float:
    """``P(E_f) / omega`` written with the weak values."""
    a_w, b_w = wvs.require()
    s2 = probe.average_of_p(lambda w: np.sin(2 * lam * w))
    c2 = probe.average_of_p(lambda w: np.cos(2 * lam * w))
    return 0.5 * (1 + b_w) - a_w.imag * s2 + 0.5 * (1 - b_w) * c2


def _checked_normalizer(probe, wvs, lam) -> float:
    n = normalizer(probe, wvs, lam)
    if n <= NULL_NORMALIZER:
        raise NullConditioningError()
    return n


def unnormalized_conditional_state(probe: ProbeSpec, wvs: WeakValueSet, lam: float) -> np.ndarray:
    a_w, b_w = wvs.require()
    c, s = _trig(probe, lam)
    rho = probe.state.matrix
    return (
        c @ rho @ c
        - 1j * np.conj(a_w) * (c @ rho @ s)
        + 1j * a_w * (s @ rho @ c)
        + b_w * (s @ rho @ s)
    )


def conditional_probe_state(probe: ProbeSpec, wvs: WeakValueSet, lam: float) -> ConditionalProbeState:
    """Exact probe state conditioned on postselection.

    The unnormalized sandwich is divided by its own trace, which agrees with
    the closed-form normalizer to rounding.
    """
    norm = _checked_normalizer(probe, wvs, lam)
    unnorm = unnormalized_conditional_state(probe, wvs, lam)
    tr = float(np.real(np.trace(unnorm)))
    return ConditionalProbeState(DensityOperator(unnorm / tr), norm)


def postselection_probability_general(probe: ProbeSpec, wvs: WeakValueSet, lam: float) -> float:
    """P(E_f) for any probe; equals omega at lam = 0 and 1 without postselection."""
    s2 = probe.average_of_p(lambda w: np.sin(2 * lam * w))
    c2 = probe.average_of_p(lambda w: np.cos(2 * lam * w))
    return 0.5 * (wvs.omega + wvs.beta) - wvs.alpha.imag * s2 + 0.5 * (wvs.omega - wvs.beta) * c2


def conditional_average_fP(probe: ProbeSpec, wvs: WeakValueSet, lam: float, f: Callable) -> float:
    """Conditional average of ``f(P)``."""
    a_w, b_w = wvs.require()
    norm = _checked_normalizer(probe, wvs, lam)
    fs = probe.average_of_p(lambda w: f(w) * np.sin(2 * lam * w))
    fc = probe.average_of_p(lambda w: f(w) * np.cos(2 * lam * w))
    f0 = probe.average_of_p(f)
    return (-a_w.imag * fs + 0.5 * (1 + b_w) * f0 + 0.5 * (1 - b_w) * fc) / norm


def heisenberg(probe: ProbeSpec, op, lam: float) -> np.ndarray:
    """``e^{i lam P} op e^{-i lam P}``."""
    u = probe.p_spectrum.apply(lambda w: np.exp(1j * lam * w))
    return u @ np.asarray(op, dtype=complex) @ u.conj().T


def conditional_average_gO(
    probe: ProbeSpec, o_op, wvs: WeakValueSet, lam: float, g: Callable = lambda x: x
) -> float:
    """Conditional average of ``g(O)`` for an arbitrary probe observable ``O``.

    ``O`` and ``P`` must both have nondegenerate spectra.
    """
    a_w, b_w = wvs.require()
    norm = _checked_normalizer(probe, wvs, lam)
    o_op = o_op if isinstance(o_op, HermitianOperator) else HermitianOperator(o_op)
    if o_op.dim != probe.dim:
        raise DimensionError("observable and probe differ in dimension")
    table = cached_wigner(o_op.matrix, probe.write_in.matrix, probe.state.matrix)
    g_o = spectral(o_op).apply(g)
    rho = probe.state.matrix
    g_plus = float(np.real(np.trace(heisenberg(probe, g_o, lam) @ rho)))
    g_minus = float(np.real(np.trace(heisenberg(probe, g_o, -lam) @ rho)))
    mix_s = product_average(table, g, lambda w: np.sin(2 * lam * w))
    mix_c = product_average(table, g, lambda w: np.cos(2 * lam * w))
    total = (
        0.5 * a_w.real * (g_minus - g_plus)
        - a_w.imag * mix_s
        + 0.5 * (1 + b_w) * 0.5 * (g_plus + g_minus)
        + 0.5 * (1 - b_w) * mix_c
    )
    return total / norm


def conditional_average_gQ(
    probe: LatticeProbe, wvs: WeakValueSet, lam: float, g: Callable = lambda x: x
) -> float:
    """Conditional average of a pointer function ``g(Q)`` on the lattice.

    ``g(Q +- lam)`` are exact cyclic shifts of the pointer values, so ``lam``
    must be a whole number of lattice steps.
    """
    m = probe.shift_steps(lam)
    a_w, b_w = wvs.require()
    norm = _checked_normalizer(probe, wvs, lam)
    pops = np.real(np.diag(probe.state.matrix))
    qv = probe.q_values
    k = np.arange(probe.dim)
    g_up = float(pops @ np.asarray(g(qv[(k + m) % probe.dim]), dtype=float))
    g_down = float(pops @ np.asarray(g(qv[(k - m) % probe.dim]), dtype=float))
    table = build_wigner(probe.pointer, probe.write_in, probe.state)
    mix_s = product_average(table, g, lambda w: np.sin(2 * lam * w))
    mix_c = product_average(table, g, lambda w: np.cos(2 * lam * w))
    total = (
        0.5 * a_w.real * (g_up - g_down)
        - a_w.imag * mix_s
        + 0.5 * (1 + b_w) * 0.5 * (g_up + g_down)
        + 0.5 * (1 - b_w) * mix_c
    )
    return total / norm


def qubit_probe(n, p) -> ProbeSpec:
    """Qubit probe ``(1 + n.tau)/2`` with write-in ``(1 - p.tau)/2``."""
    p = qubit_axis(p)
    return ProbeSpec(bloch_to_density(n), HermitianOperator((np.eye(2) - pauli_dot(p)) / 2))


__all__ = [
    "ConditionalProbeState",
    "LatticeProbe",
    "ProbeSpec",
    "conditional_average_fP",
    "conditional_average_gO",
    "conditional_average_gQ",
    "conditional_probe_state",
    "heisenberg",
    "normalizer",
    "postselection_probability_general",
    "qubit_probe",
    "shift_generator",
]
