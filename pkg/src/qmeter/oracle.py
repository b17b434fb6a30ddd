"""Brute-force joint-state simulator.

Builds ``rho_i (x) rho_P`` on the full joint space, applies the exact
unitary ``exp(i lam S (x) K)`` for a system operator ``S`` and a probe
operator ``K``, then reads statistics off with Born's rule.  Nothing here
touches the weak-value or closed-form code; it only relies on
:mod:`qmeter.linalg`, so it can serve as an independent reference.

The ``from_*`` constructors translate each measurement configuration into
the joint form:

* qubit measuring qubit: ``S = (1 - a.sigma)/2``, ``K = (1 - p.tau)/2``,
* general probe measuring qubit: ``S = a.sigma``, ``K = P``,
* qubit measuring a general system: ``S = A``, ``K = (1 - p.tau)/2``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionError, ValidationError
from .linalg import (
    IDENTITY2,
    PAULI,
    as_matrix,
    herm_exp,
    partial_trace,
    tensor,
)

MAX_JOINT_DIM = 256
COMPLETENESS_TOL = 1e-10


def spin(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return v[0] * PAULI[0] + v[1] * PAULI[1] + v[2] * PAULI[2]


def spin_state(v) -> np.ndarray:
    return (IDENTITY2 + spin(v)) / 2


@dataclass(frozen=True, eq=False)
class JointScenario:
    rho_i: np.ndarray
    e_f: np.ndarray
    system_op: np.ndarray
    rho_p: np.ndarray
    coupling_op: np.ndarray
    lam: float
    readout: Sequence[np.ndarray] = field(default=())

    def __post_init__(self):
        for name in ("rho_i", "e_f", "system_op", "rho_p", "coupling_op"):
            object.__setattr__(self, name, as_matrix(getattr(self, name)))
        object.__setattr__(self, "readout", tuple(as_matrix(e) for e in self.readout))
        ds, dp = self.dims
        if not (self.e_f.shape == self.system_op.shape == (ds, ds)):
            raise DimensionError("system operators differ in dimension")
        if self.coupling_op.shape != (dp, dp) or any(e.shape != (dp, dp) for e in self.readout):
            raise DimensionError("probe operators differ in dimension")
        if ds * dp > MAX_JOINT_DIM:
            raise ValidationError(f"joint dimension {ds * dp} exceeds cap {MAX_JOINT_DIM}")

    @property
    def dims(self) -> tuple[int, int]:
        return self.rho_i.shape[0], self.rho_p.shape[0]

    @classmethod
    def from_qubit_qubit(cls, m_i, m_f, trace_ef, a, n, p, q, lam):
        return cls(
            rho_i=spin_state(m_i),
            e_f=trace_ef * spin_state(m_f),
            system_op=(IDENTITY2 - spin(a)) / 2,
            rho_p=spin_state(n),
            coupling_op=(IDENTITY2 - spin(p)) / 2,
            lam=lam,
            readout=(spin_state(q), spin_state(-np.asarray(q, dtype=float))),
        )

    @classmethod
    def from_probe_qubit(cls, rho_i, e_f, a, rho_p, write_in, lam, readout=()):
        return cls(rho_i, e_f, spin(a), rho_p, write_in, lam, readout)

    @classmethod
    def from_qubit_meter(cls, rho_i, e_f, observable, n, p, q, lam):
        return cls(
            rho_i=rho_i,
            e_f=e_f,
            system_op=observable,
            rho_p=spin_state(n),
            coupling_op=(IDENTITY2 - spin(p)) / 2,
            lam=lam,
            readout=(spin_state(q), spin_state(-np.asarray(q, dtype=float))),
        )


@dataclass(frozen=True)
class BornStatistics:
    p_post: float
    joint: np.ndarray
    conditional_probe_state: np.ndarray | None
    unnormalized_probe_state: np.ndarray

    def conditional(self) -> np.ndarray:
        """P(k | postselection) for every readout effect."""
        return self.joint / self.p_post

    def conditional_average(self, values) -> float:
        """Average of ``values[k]`` under the conditional readout distribution."""
        return float(self.conditional() @ np.asarray(values, dtype=float))


def evolve_joint(js: JointScenario) -> np.ndarray:
    """``U (rho_i (x) rho_P) U^dag`` with ``U = exp(i lam S (x) K)``."""
    u = herm_exp(tensor(js.system_op, js.coupling_op), js.lam)
    rho = tensor(js.rho_i, js.rho_p)
    return u @ rho @ u.conj().T


def born_statistics(js: JointScenario, evolved: np.ndarray | None = None) -> BornStatistics:
    """Postselection probability, joint readout probabilities, conditional probe state."""
    ds, dp = js.dims
    if js.readout:
        total = sum(js.readout)
        if np.max(np.abs(total - np.eye(dp))) > COMPLETENESS_TOL:
            raise ValidationError("readout effects do not resolve the identity")
    if evolved is None:
        evolved = evolve_joint(js)
    post = tensor(js.e_f, np.eye(dp)) @ evolved
    unnorm = partial_trace(post, (ds, dp), keep=1)
    p_post = float(np.real(np.trace(unnorm)))
    joint = np.array([np.real(np.trace(e @ unnorm)) for e in js.readout])
    cond = unnorm / p_post if p_post > 0 else None
    return BornStatistics(p_post, joint, cond, unnorm)


def conditional_expectation(js: JointScenario, probe_op) -> float:
    """Conditional average of a probe observable after postselection."""
    stats = born_statistics(js)
    return float(np.real(np.trace(as_matrix(probe_op) @ stats.conditional_probe_state)))
