"""A qubit probe measuring a qubit system at arbitrary coupling.

The interaction unitary is ``exp[i (lam/4) (1 - a.sigma)(1 - p.tau)]``: the
system projector onto ``a.sigma = -1`` controls a rotation of the probe
about ``p``.  At ``lam = pi`` this is a controlled NOT.  The probe starts in
``(1 + n.tau)/2`` and is read out along ``q``; the system is prepared with
polarization ``m_i`` and postselected on ``trace_ef * (1 + m_f.sigma)/2``.

Weak values always refer to ``A = a.sigma`` itself, not to the shifted
projector that enters the coupling.

All closed forms are evaluated in their homogeneous form (multiplied
through by ``omega``), which stays finite when preparation and
postselection are orthogonal.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property
from typing import NamedTuple

import numpy as np

from . import kernels
from .bloch import effect_from_bloch, qubit_axis, qubit_state
from .errors import NullConditioningError, ValidationError
from .linalg import POSITIVITY_TOL
from .weak_values import WeakValueSet, geometric_weak_values

NULL_PROBABILITY = 1e-14


class CS(NamedTuple):
    C: float
    S: float


def cs(lam: float) -> CS:
    """cos(lam/2), sin(lam/2); lam is reduced mod 4 pi first."""
    half = 0.5 * math.fmod(lam, 4 * math.pi)
    return CS(math.cos(half), math.sin(half))


@dataclass(frozen=True)
class QubitQubitScenario:
    m_i: np.ndarray
    m_f: np.ndarray
    a: np.ndarray
    n: np.ndarray
    p: np.ndarray
    q: np.ndarray
    lam: float
    trace_ef: float = 1.0

    def __post_init__(self):
        for name in ("m_i", "m_f", "n"):
            object.__setattr__(self, name, qubit_state(getattr(self, name)))
        for name in ("a", "p", "q"):
            object.__setattr__(self, name, qubit_axis(getattr(self, name)))
        lam = float(self.lam)
        if not math.isfinite(lam):
            raise ValidationError("coupling must be finite")
        object.__setattr__(self, "lam", lam)
        tr = float(self.trace_ef)
        if not tr > 0:
            raise ValidationError(f"trace_ef must be positive, got {tr}")
        if 0.5 * tr * (1.0 + np.linalg.norm(self.m_f)) > 1.0 + POSITIVITY_TOL:
            raise ValidationError("postselection effect exceeds the identity")
        object.__setattr__(self, "trace_ef", tr)

    @cached_property
    def weak_values(self) -> WeakValueSet:
        return geometric_weak_values(self.m_i, self.m_f, self.a, self.trace_ef)

    @property
    def effect(self):
        return effect_from_bloch(self.m_f, self.trace_ef)

    def with_coupling(self, lam: float) -> "QubitQubitScenario":
        return replace(self, lam=lam)

    def invariants(self):
        """(p.n, q.n, q.p, (q x n).p)."""
        p, q, n = self.p, self.q, self.n
        return float(p @ n), float(q @ n), float(q @ p), float(np.cross(q, n) @ p)


def _is_pi(lam: float) -> bool:
    return abs(math.remainder(lam - math.pi, 2 * math.pi)) <= 1e-12


def joint_probability(sc: QubitQubitScenario, tau: int) -> float:
    """P(E_f, tau) at the ideal coupling ``lam = pi``.

    Sums four branches: the system stays in ``a.sigma = +1`` (probe
    untouched), stays in ``-1`` (probe reflected about ``p``), and the two
    interference terms between them.
    """
    if tau not in (1, -1):
        raise ValidationError(f"tau must be +1 or -1, got {tau!r}")
    if not _is_pi(sc.lam):
        raise ValidationError(f"joint_probability needs lam = pi (mod 2 pi), got {sc.lam}")
    wv = sc.weak_values
    om, be = wv.omega, wv.beta
    a1, a2 = wv.alpha.real, wv.alpha.imag
    p, q, n = sc.p, sc.q, sc.n
    pn = p @ n
    reflected = 2.0 * pn * p - n
    stay = 0.5 * (1 + tau * (q @ n))
    flip = 0.5 * (1 + tau * (q @ reflected))
    # <q:tau| (p.tau) rho_P |q:tau>; the other ordering is its conjugate
    cross = 0.5 * (tau * (q @ p) + pn + 1j * tau * (q @ np.cross(p, n)))
    total = (
        0.25 * (om + be + 2 * a1) * stay
        + 0.25 * (om + be - 2 * a1) * flip
        + 0.25 * (om - be - 2j * a2) * cross
        + 0.25 * (om - be + 2j * a2) * np.conj(cross)
    )
    return float(total.real)


def _homogeneous(sc: QubitQubitScenario):
    """(P(E_f), P(E_f,+) - P(E_f,-)) at the scenario's coupling."""
    wv = sc.weak_values
    C, S = cs(sc.lam)
    pn, qn, qp, x = sc.invariants()
    om, be = wv.omega, wv.beta
    a1, a2 = wv.alpha.real, wv.alpha.imag
    cc, ss, sc_ = C * C, S * S, S * C
    p_post = 0.5 * ((1 + cc + ss * pn) * om + 2 * sc_ * (1 - pn) * a2 + ss * (1 - pn) * be)
    diff = 0.5 * (
        om * (2 * cc * qn + ss * qp * (1 + pn) - 2 * sc_ * x)
        + 2 * a1 * (ss * (qn - qp * pn) + sc_ * x)
        + 2 * a2 * (sc_ * (qn - qp) - ss * x)
        - be * ss * qp * (1 - pn)
    )
    return p_post, diff


def postselection_probability(sc: QubitQubitScenario) -> float:
    """P(E_f) at any coupling; does not depend on the readout axis."""
    return float(_homogeneous(sc)[0])


def conditional_average_tau(sc: QubitQubitScenario) -> float:
    """Exact conditional readout average <tau> at any coupling."""
    p_post, diff = _homogeneous(sc)
    if p_post <= NULL_PROBABILITY:
        raise NullConditioningError()
    return float(diff / p_post)


def conditional_probabilities(sc: QubitQubitScenario) -> tuple[float, float]:
    """Q(+1), Q(-1)."""
    t = conditional_average_tau(sc)
    return 0.5 * (1 + t), 0.5 * (1 - t)


def fixed_coupling_average_tau(sc: QubitQubitScenario) -> float:
    """<tau> from the dedicated lam = pi formula (the scenario's lam is ignored)."""
    a_w, b_w = sc.weak_values.require()
    pn, qn, qp, x = sc.invariants()
    num = (
        qp * (1 + pn)
        + 2 * a_w.real * (qn - qp * pn)
        - 2 * a_w.imag * x
        - b_w * qp * (1 - pn)
    )
    den = (1 + pn) + b_w * (1 - pn)
    if den <= NULL_PROBABILITY:
        raise NullConditioningError()
    return float(num / den)


def amplification_ratio(sc: QubitQubitScenario, epsilon: float) -> float:
    """<tau> / sin(epsilon) at lam = pi for a probe tilted by ``epsilon`` from ``p``.

    The probe polarization is replaced by the pure state
    ``cos(eps) p + sin(eps) q``, which needs ``q`` orthogonal to ``p``.
    Tends to Re A_w as eps -> 0 and to Re A_w / B_w as eps -> pi.
    """
    if abs(sc.q @ sc.p) > 1e-12:
        raise ValidationError("amplification setup needs q orthogonal to p")
    s = math.sin(epsilon)
    if s == 0.0:
        raise ValidationError(f"ratio undefined at epsilon = {epsilon}")
    n = math.cos(epsilon) * sc.p + s * sc.q
    n = n / max(1.0, float(np.linalg.norm(n)))
    tilted = replace(sc, n=n, lam=math.pi)
    return conditional_average_tau(tilted) / s


def first_order_average_tau(sc: QubitQubitScenario) -> float:
    """Linear-in-lam approximation of <tau>."""
    a_w, _ = sc.weak_values.require()
    pn, qn, qp, x = sc.invariants()
    return float(qn + 0.5 * sc.lam * ((a_w.real - 1) * x - a_w.imag * (qp - qn * pn)))


def sweep(sc: QubitQubitScenario, lams, backend: str | None = None):
    """Vectorized P(E_f) and <tau> over an array of couplings.

    ``<tau>`` is NaN wherever the postselection probability is null.
    """
    lams = np.asarray(lams, dtype=float)
    wv = sc.weak_values
    pn, qn, qp, x = sc.invariants()
    p_post, diff = kernels.qq_closed_form(
        np.fmod(lams, 4 * math.pi), wv.omega, wv.alpha.real, wv.alpha.imag, wv.beta,
        pn, qn, qp, x, backend=backend,
    )
    with np.errstate(divide="ignore", invalid="ignore"):
        tau = np.where(p_post > NULL_PROBABILITY, diff / p_post, np.nan)
    return p_post, tau
