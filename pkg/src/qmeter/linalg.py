"""Dense complex operator algebra on small Hilbert spaces.

Operators are stored as read-only ``complex128`` arrays.  The validated
wrappers (:class:`HermitianOperator`, :class:`DensityOperator`,
:class:`Effect`) check their invariants once, at construction, and reject
anything that fails; nothing is silently symmetrized or renormalized.
Every function here also accepts a plain array where an operator is
expected.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DimensionError, ValidationError

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
POSITIVITY_TOL = 1e-10

IDENTITY2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SIGMA_X, SIGMA_Y, SIGMA_Z)

for _m in (IDENTITY2, *PAULI):
    _m.setflags(write=False)


def as_matrix(m) -> np.ndarray:
    """Return ``m`` as a finite 2-D complex array (no copy if already one)."""
    if isinstance(m, _Operator):
        return m.matrix
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2:
        raise ValidationError(f"expected a 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("matrix has non-finite entries")
    return arr


def _as_square(m) -> np.ndarray:
    arr = as_matrix(m)
    if arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {arr.shape}")
    return arr


def dagger(m) -> np.ndarray:
    return as_matrix(m).conj().T


def hermiticity_residual(m) -> float:
    arr = _as_square(m)
    return float(np.max(np.abs(arr - arr.conj().T), initial=0.0))


class _Operator:
    __slots__ = ("matrix",)

    def __init__(self, matrix):
        arr = np.array(as_matrix(matrix), dtype=complex, copy=True)
        if arr.shape[0] != arr.shape[1]:
            raise DimensionError(f"operator must be square, got shape {arr.shape}")
        self._validate(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "matrix", arr)

    def _validate(self, arr):
        pass

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.matrix
        return self.matrix.astype(dtype)

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim})"


class HermitianOperator(_Operator):
    """Observable: a square matrix equal to its adjoint within 1e-12."""

    __slots__ = ()

    def _validate(self, arr):
        res = hermiticity_residual(arr)
        if res > HERMITIAN_TOL:
            raise ValidationError(f"operator is not Hermitian (residual {res:.3g})")


class DensityOperator(HermitianOperator):
    """Positive, unit-trace Hermitian operator."""

    __slots__ = ()

    def _validate(self, arr):
        super()._validate(arr)
        tr = np.trace(arr)
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValidationError(f"density operator trace is {tr.real:.15g}, not 1")
        low = np.linalg.eigvalsh(arr)[0]
        if low < -POSITIVITY_TOL:
            raise ValidationError(f"density operator has negative eigenvalue {low:.3g}")

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))


class Effect(HermitianOperator):
    """Positive operator bounded above by the identity."""

    __slots__ = ()

    def _validate(self, arr):
        super()._validate(arr)
        w = np.linalg.eigvalsh(arr)
        if w[0] < -POSITIVITY_TOL or w[-1] > 1.0 + POSITIVITY_TOL:
            raise ValidationError(
                f"effect eigenvalues must lie in [0, 1], got [{w[0]:.3g}, {w[-1]:.3g}]"
            )


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues in ascending order and matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    def apply(self, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """``f(M)`` for the decomposed ``M``; ``f`` acts elementwise on eigenvalues."""
        v = self.eigenvectors
        vals = np.asarray(f(self.eigenvalues))
        return (v * vals) @ v.conj().T

    def min_gap(self) -> float:
        if self.eigenvalues.size < 2:
            return np.inf
        return float(np.min(np.diff(self.eigenvalues)))


def fix_phases(vectors: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Rephase columns so the first entry with modulus above ``tol`` is real positive."""
    out = np.array(vectors, dtype=complex, copy=True)
    for k in range(out.shape[1]):
        col = out[:, k]
        idx = np.flatnonzero(np.abs(col) > tol)
        if idx.size:
            lead = col[idx[0]]
            out[:, k] = col * (abs(lead) / lead)
            out[idx[0], k] = abs(lead)
    return out


def spectral(h) -> SpectralDecomposition:
    """Eigendecomposition of a Hermitian operator.

    Eigenvalues come back ascending and each eigenvector has its first
    non-negligible amplitude real and positive, so the output is
    deterministic.
    """
    arr = _as_square(h)
    if not isinstance(h, HermitianOperator):
        res = hermiticity_residual(arr)
        if res > HERMITIAN_TOL:
            raise ValidationError(f"operator is not Hermitian (residual {res:.3g})")
    w, v = np.linalg.eigh(arr)
    w.setflags(write=False)
    v = fix_phases(v)
    v.setflags(write=False)
    return SpectralDecomposition(w, v)


def operator_function(h, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Apply a real scalar function to a Hermitian operator through its spectrum."""
    return spectral(h).apply(f)


def herm_exp(h, scale: float) -> np.ndarray:
    """Unitary ``exp(i * scale * h)`` for Hermitian ``h``."""
    return spectral(h).apply(lambda w: np.exp(1j * scale * w))


def tensor(a, b) -> np.ndarray:
    """Kronecker product; the indices of ``a`` vary slowest."""
    return np.kron(as_matrix(a), as_matrix(b))


def partial_trace(m, dims: tuple[int, int], keep: int) -> np.ndarray:
    """Trace out one factor of a bipartite operator.

    Parameters
    ----------
    m : array_like
        Square operator on a space of dimension ``dims[0] * dims[1]``.
    dims : (int, int)
        Dimensions of the first and second factor.
    keep : {0, 1}
        Which factor survives.
    """
    arr = _as_square(m)
    da, db = (int(d) for d in dims)
    if da < 1 or db < 1 or arr.shape[0] != da * db:
        raise DimensionError(
            f"matrix of size {arr.shape[0]} does not factor as {da} x {db}"
        )
    t = arr.reshape(da, db, da, db)
    if keep == 0:
        return np.einsum("ijkj->ik", t)
    if keep == 1:
        return np.einsum("ijil->jl", t)
    raise ValueError(f"keep must be 0 or 1, got {keep!r}")


def expectation(op, rho) -> float:
    """Real part of ``Tr(op @ rho)``."""
    return float(np.real(np.trace(as_matrix(op) @ as_matrix(rho))))
