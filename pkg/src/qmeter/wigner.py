"""Generalized Wigner functions for pairs of observables with finite spectra.

For observables ``O`` and ``P`` and a state ``rho``, the table holds

    W(O_i, P) = sum over eigenvalue pairs (P_j, P_k) with (P_j + P_k)/2 = P of
                <O_i|P_j> <P_j|rho|P_k> <P_k|O_i>

i.e. the change of variables to midpoint ``P`` and difference
``P_j - P_k`` with unit counting weights.  Pairs whose midpoints coincide
(within ``MIDPOINT_TOL``) share a column.  Swapping ``j`` and ``k`` gives the
complex conjugate term, so every entry is real.

The generalized average of ``F(O, P)`` is ``sum F(O_i, P) W(O_i, P)``.  For
``F`` depending on one variable only it reduces to the ordinary expectation
value, and for ``F = g(O) h(P)`` it equals the symmetric sandwich
``sum_jk <P_k|g(O)|P_j> rho_jk h((P_j + P_k)/2)``.

Degenerate spectra are rejected.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from . import kernels
from .errors import DegenerateSpectrumError, DimensionError
from .linalg import DensityOperator, HermitianOperator, spectral

MIDPOINT_TOL = 1e-9
DEGENERACY_TOL = 1e-10


@dataclass(frozen=True)
class SpectralMeasurePair:
    """Midpoint/difference bookkeeping for the pairs of eigenvalues of ``P``.

    ``midpoints[c]`` is the value of column ``c``; ``differences[c]`` lists
    the ``P_j - P_k`` that land there, each with unit weight.
    """

    midpoints: np.ndarray
    differences: tuple
    index: np.ndarray

    @property
    def plus_weights(self) -> np.ndarray:
        return np.array([len(d) for d in self.differences], dtype=float)


@dataclass(frozen=True)
class WignerTable:
    o_values: np.ndarray
    p_midpoints: np.ndarray
    values: np.ndarray
    imag_residual: float
    measure: SpectralMeasurePair

    @property
    def shape(self):
        return self.values.shape

    def rows(self):
        """Flat (O, P_mid, W) rows, O-major."""
        for i, o in enumerate(self.o_values):
            for c, pm in enumerate(self.p_midpoints):
                yield float(o), float(pm), float(self.values[i, c])


def spectral_measure(p_values: np.ndarray) -> SpectralMeasurePair:
    """Group eigenvalue pairs of ``P`` by midpoint."""
    mids = 0.5 * (p_values[:, None] + p_values[None, :])
    flat = mids.ravel()
    order = np.argsort(flat, kind="stable")
    labels = np.empty(flat.size, dtype=np.int_)
    centres = []
    for pos, idx in enumerate(order):
        if pos == 0 or flat[idx] - flat[order[pos - 1]] > MIDPOINT_TOL:
            centres.append([flat[idx]])
        else:
            centres[-1].append(flat[idx])
        labels[idx] = len(centres) - 1
    index = labels.reshape(mids.shape)
    midpoints = np.array([np.mean(c) for c in centres])
    diffs = p_values[:, None] - p_values[None, :]
    differences = tuple(
        tuple(sorted(float(x) for x in diffs[index == c])) for c in range(len(centres))
    )
    index.setflags(write=False)
    midpoints.setflags(write=False)
    return SpectralMeasurePair(midpoints, differences, index)


def _nondegenerate(op, name):
    dec = spectral(op)
    if dec.min_gap() <= DEGENERACY_TOL:
        raise DegenerateSpectrumError(f"degenerate spectrum unsupported ({name})")
    return dec


def build_wigner(o_op, p_op, rho, backend: str | None = None) -> WignerTable:
    """Generalized Wigner table ``W_{O,P}`` of ``rho``."""
    o_op = o_op if isinstance(o_op, HermitianOperator) else HermitianOperator(o_op)
    p_op = p_op if isinstance(p_op, HermitianOperator) else HermitianOperator(p_op)
    rho = rho if isinstance(rho, DensityOperator) else DensityOperator(rho)
    if not o_op.dim == p_op.dim == rho.dim:
        raise DimensionError("O, P and rho must share one dimension")
    o_dec = _nondegenerate(o_op, "O")
    p_dec = _nondegenerate(p_op, "P")
    vp = p_dec.eigenvectors
    amp = o_dec.eigenvectors.conj().T @ vp  # <O_i|P_j>
    rho_p = vp.conj().T @ rho.matrix @ vp
    measure = spectral_measure(np.asarray(p_dec.eigenvalues))
    raw = kernels.wigner_accumulate(
        amp, rho_p, measure.index, measure.midpoints.size, backend=backend
    )
    values = raw.real.copy()
    values.setflags(write=False)
    return WignerTable(
        o_values=np.asarray(o_dec.eigenvalues),
        p_midpoints=measure.midpoints,
        values=values,
        imag_residual=float(np.max(np.abs(raw.imag), initial=0.0)),
        measure=measure,
    )


def generalized_average(table: WignerTable, F: Callable) -> float:
    """``sum F(O, P) W(O, P)``; ``F`` is called once on broadcast grids."""
    o_grid, p_grid = np.meshgrid(table.o_values, table.p_midpoints, indexing="ij")
    vals = np.broadcast_to(np.asarray(F(o_grid, p_grid), dtype=float), table.shape)
    return float(np.sum(vals * table.values))


def product_average(table: WignerTable, g: Callable, h: Callable) -> float:
    """Generalized average of ``g(O) h(P)``."""
    gv = np.asarray(g(table.o_values), dtype=float)
    hv = np.asarray(h(table.p_midpoints), dtype=float)
    return float(gv @ table.values @ hv)


_cache_lock = threading.Lock()


@lru_cache(maxsize=256)
def _cached(key):
    o, p, r, d = key
    shape = (d, d)
    return build_wigner(
        np.frombuffer(o, dtype=complex).reshape(shape),
        np.frombuffer(p, dtype=complex).reshape(shape),
        np.frombuffer(r, dtype=complex).reshape(shape),
    )


def cached_wigner(o_op, p_op, rho) -> WignerTable:
    """``build_wigner`` memoized on the exact bytes of the three matrices."""
    mats = [np.ascontiguousarray(np.asarray(x), dtype=complex) for x in (o_op, p_op, rho)]
    key = (mats[0].tobytes(), mats[1].tobytes(), mats[2].tobytes(), mats[0].shape[0])
    with _cache_lock:
        return _cached(key)
