"""Bloch-vector parametrization of qubit states, effects and observables.

Vectors are plain length-3 float arrays.  ``qubit_state`` and ``qubit_axis``
validate them (norm at most one, or exactly one) and return read-only
copies.  Pauli conventions are the standard ones with sigma_z = diag(1, -1).
"""
from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .linalg import IDENTITY2, PAULI, DensityOperator, Effect, as_matrix, fix_phases

NORM_TOL = 1e-12


def _vector(v, what="vector") -> np.ndarray:
    arr = np.array(v, dtype=float, copy=True).reshape(-1)
    if arr.shape != (3,):
        raise ValidationError(f"{what} must have 3 components, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{what} has non-finite components")
    return arr


def qubit_state(v) -> np.ndarray:
    """Validate a polarization vector (|v| <= 1)."""
    arr = _vector(v, "polarization")
    norm = np.linalg.norm(arr)
    if norm > 1.0 + NORM_TOL:
        raise ValidationError(f"polarization norm {norm:.15g} exceeds 1")
    arr.setflags(write=False)
    return arr


def qubit_axis(v) -> np.ndarray:
    """Validate a unit direction (|v| = 1 within 1e-12)."""
    arr = _vector(v, "axis")
    norm = np.linalg.norm(arr)
    if abs(norm - 1.0) > NORM_TOL:
        raise ValidationError(f"axis must be a unit vector, norm is {norm:.15g}")
    arr.setflags(write=False)
    return arr


def pauli_dot(v) -> np.ndarray:
    """The operator v . sigma."""
    x, y, z = _vector(v)
    return x * PAULI[0] + y * PAULI[1] + z * PAULI[2]


def bloch_to_density(m) -> DensityOperator:
    """(1 + m . sigma) / 2."""
    m = qubit_state(m)
    return DensityOperator((IDENTITY2 + pauli_dot(m)) / 2)


def density_to_bloch(rho) -> np.ndarray:
    arr = as_matrix(rho)
    if arr.shape != (2, 2):
        raise ValidationError(f"expected a 2x2 density matrix, got shape {arr.shape}")
    return np.array([np.real(np.trace(s @ arr)) for s in PAULI])


def effect_from_bloch(m, trace: float = 1.0) -> Effect:
    """Effect ``trace * (1 + m . sigma) / 2``; must stay below the identity."""
    m = qubit_state(m)
    if trace <= 0:
        raise ValidationError(f"effect trace must be positive, got {trace}")
    return Effect(trace * (IDENTITY2 + pauli_dot(m)) / 2)


def readout_projector(q, tau: int) -> Effect:
    """Projector onto |q : tau>, i.e. (1 + tau q . sigma) / 2."""
    if tau not in (1, -1):
        raise ValidationError(f"tau must be +1 or -1, got {tau!r}")
    q = qubit_axis(q)
    return Effect((IDENTITY2 + tau * pauli_dot(q)) / 2)


def eigenstate(q, tau: int) -> np.ndarray:
    """Ket |q : tau> with its first nonzero amplitude real positive."""
    if tau not in (1, -1):
        raise ValidationError(f"tau must be +1 or -1, got {tau!r}")
    q = qubit_axis(q)
    proj = (IDENTITY2 + tau * pauli_dot(q)) / 2
    # the column with the larger diagonal entry is the ket times a phase
    k = int(np.argmax(np.real(np.diag(proj))))
    col = proj[:, [k]] / np.sqrt(proj[k, k].real)
    return fix_phases(col)[:, 0]


def probe_from_wkd(w: float, kappa: float, delta: float) -> np.ndarray:
    """Polarization of the probe state [[w, k e^{-i d}], [k e^{i d}, 1 - w]].

    ``w`` is the up-population, ``kappa`` the coherence (bounded by
    sqrt(w (1 - w))) and ``delta`` the phase.
    """
    if not 0.0 <= w <= 1.0:
        raise ValidationError(f"population w must lie in [0, 1], got {w}")
    bound = np.sqrt(w * (1.0 - w))
    if kappa < 0 or kappa > bound + NORM_TOL:
        raise ValidationError(f"coherence {kappa} outside [0, {bound:.15g}]")
    n = np.array(
        [2 * kappa * np.cos(delta), 2 * kappa * np.sin(delta), 2 * w - 1.0]
    )
    # clip the last-ulp excess so the maximal-coherence case validates
    norm = np.linalg.norm(n)
    if norm > 1.0:
        n = n / norm
    return qubit_state(n)


def triple(u, v, w) -> float:
    """(u x v) . w."""
    return float(np.dot(np.cross(u, v), w))
