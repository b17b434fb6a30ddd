"""A qubit probe measuring an arbitrary finite-dimensional observable.

Coupling ``exp[i lam A (x) (1 - p.tau)/2]``: the probe branch ``p.tau = -1``
picks up ``exp(i lam A)`` on the system while ``p.tau = +1`` is untouched.
The exact statistics go through the 2x2 matrix

    Gamma[t1, t2] = Tr(E_f U_{t1} rho_i U_{t2}^dag),   U_+ = 1,  U_- = exp(i lam A)

contracted with the probe state in the ``p`` basis.  The weak-coupling
forms expand the propagator to first order but keep the quadratic term of
``U rho U^dag``, which is what keeps the expanded joint probabilities
non-negative.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from .bloch import bloch_to_density, eigenstate, qubit_axis, qubit_state
from .errors import DimensionError, NullConditioningError, ValidationError
from .linalg import DensityOperator, Effect, HermitianOperator, spectral
from .weak_values import PrePostPair, WeakValueSet, weak_values

NULL_PROBABILITY = 1e-14
OVERLAP_TOL = 1e-12
PURE_TOL = 1e-10
_TAUS = (1, -1)


@dataclass(frozen=True, eq=False)
class GeneralSystemScenario:
    rho_i: DensityOperator
    e_f: Effect
    observable: HermitianOperator
    n: np.ndarray
    p: np.ndarray
    q: np.ndarray
    lam: float

    def __post_init__(self):
        for name, cls in (("rho_i", DensityOperator), ("e_f", Effect), ("observable", HermitianOperator)):
            val = getattr(self, name)
            if not isinstance(val, cls):
                object.__setattr__(self, name, cls(val))
        if not self.rho_i.dim == self.e_f.dim == self.observable.dim:
            raise DimensionError("system operators differ in dimension")
        object.__setattr__(self, "n", qubit_state(self.n))
        object.__setattr__(self, "p", qubit_axis(self.p))
        object.__setattr__(self, "q", qubit_axis(self.q))
        object.__setattr__(self, "lam", float(self.lam))

    @property
    def dim(self) -> int:
        return self.rho_i.dim

    @cached_property
    def weak_values(self) -> WeakValueSet:
        return weak_values(PrePostPair(self.rho_i, self.e_f, self.observable))

    @cached_property
    def _gamma(self) -> "GammaMatrix":
        return _gamma_matrix(self)

    @cached_property
    def _probe(self):
        return _probe_elements(self)

    def with_coupling(self, lam: float) -> "GeneralSystemScenario":
        return replace(self, lam=lam)


@dataclass(frozen=True)
class GammaMatrix:
    """Entries indexed ``[t1, t2]`` with row/column 0 for ``+`` and 1 for ``-``."""

    entries: np.ndarray

    def __getitem__(self, taus) -> complex:
        t1, t2 = taus
        return complex(self.entries[_TAUS.index(t1), _TAUS.index(t2)])

    def normalized(self) -> np.ndarray:
        """``C = Gamma / Gamma[+, +]``."""
        return self.entries / self.entries[0, 0].real


@dataclass(frozen=True)
class ModularWeakValue:
    c_minus: complex


def _propagators(sc: GeneralSystemScenario):
    # the + branch is the identity exactly
    return {1: None, -1: spectral(sc.observable).apply(lambda w: np.exp(1j * sc.lam * w))}


def gamma_matrix(sc: GeneralSystemScenario) -> GammaMatrix:
    """``Gamma[t1, t2] = Tr(E_f U_t1 rho_i U_t2^dag)``, computed once per scenario."""
    return sc._gamma


def _gamma_matrix(sc: GeneralSystemScenario) -> GammaMatrix:
    rho, ef = sc.rho_i.matrix, sc.e_f.matrix
    props = _propagators(sc)
    g = np.empty((2, 2), dtype=complex)
    for i, t1 in enumerate(_TAUS):
        left = rho if props[t1] is None else props[t1] @ rho
        for j, t2 in enumerate(_TAUS):
            both = left if props[t2] is None else left @ props[t2].conj().T
            g[i, j] = np.trace(ef @ both)
    g.setflags(write=False)
    return GammaMatrix(g)


def _pure_vector(op, what: str) -> np.ndarray:
    w, v = np.linalg.eigh(op.matrix)
    if abs(w[-1] - w.sum()) > PURE_TOL:
        raise ValidationError(f"{what} is not pure (rank one)")
    return v[:, -1]


def modular_weak_value(sc: GeneralSystemScenario) -> ModularWeakValue:
    """``c_- = <f| exp(i lam A) |i> / <f|i>`` for pure preparation and postselection.

    With this sign ``Gamma[t1, t2] / omega = c_{t1} conj(c_{t2})`` and
    ``c_+ = 1``; for ``A^2 = 1`` it equals ``cos(lam) + i sin(lam) A_w``.
    """
    psi_i = _pure_vector(sc.rho_i, "preparation")
    psi_f = _pure_vector(sc.e_f, "postselection")
    overlap = np.vdot(psi_f, psi_i)
    if abs(overlap) <= OVERLAP_TOL:
        raise ValidationError("modular weak value undefined: orthogonal preparation and postselection")
    u = _propagators(sc)[-1]
    return ModularWeakValue(complex(np.vdot(psi_f, u @ psi_i) / overlap))


def _probe_elements(sc: GeneralSystemScenario):
    """``<p:t1| rho_P |p:t2>`` and the readout overlaps ``<q:tau|p:t>``."""
    rho_p = bloch_to_density(sc.n).matrix
    pk = {t: eigenstate(sc.p, t) for t in _TAUS}
    qk = {t: eigenstate(sc.q, t) for t in _TAUS}
    probe = np.array([[np.vdot(pk[t1], rho_p @ pk[t2]) for t2 in _TAUS] for t1 in _TAUS])
    over = {tau: np.array([np.vdot(qk[tau], pk[t]) for t in _TAUS]) for tau in _TAUS}
    return probe, over


def exact_joint_probabilities(sc: GeneralSystemScenario) -> dict[int, float]:
    """P(E_f, tau) for tau = +1, -1."""
    gamma = gamma_matrix(sc).entries
    probe, over = sc._probe
    out = {}
    for tau in _TAUS:
        amp = over[tau]
        # sum_{t1,t2} <q:tau|p:t1> <p:t1|rho_P|p:t2> <p:t2|q:tau> Gamma[t1,t2]
        out[tau] = float(np.real(np.einsum("a,ab,b,ab->", amp, probe, amp.conj(), gamma)))
    return out


def exact_postselection_probability(sc: GeneralSystemScenario) -> float:
    gamma = gamma_matrix(sc).entries
    pn = float(sc.n @ sc.p)
    return float(sum(0.5 * (1 + t * pn) * gamma[i, i].real for i, t in enumerate(_TAUS)))


def exact_conditional_readout(sc: GeneralSystemScenario, tau: int) -> float:
    """Exact conditional probability Q(tau) of reading ``tau`` along ``q``."""
    if tau not in _TAUS:
        raise ValidationError(f"tau must be +1 or -1, got {tau!r}")
    den = exact_postselection_probability(sc)
    if den <= NULL_PROBABILITY:
        raise NullConditioningError()
    return exact_joint_probabilities(sc)[tau] / den


def exact_average_tau(sc: GeneralSystemScenario) -> float:
    return exact_conditional_readout(sc, 1) - exact_conditional_readout(sc, -1)


def weak_joint_probability(sc: GeneralSystemScenario, tau: int) -> float:
    """Expanded P(E_f, tau) with the quadratic ``beta`` term kept."""
    if tau not in _TAUS:
        raise ValidationError(f"tau must be +1 or -1, got {tau!r}")
    wv = sc.weak_values
    lam = sc.lam
    p, q, n = sc.p, sc.q, sc.n
    pn, qn, qp = p @ n, q @ n, q @ p
    x = np.cross(q, n) @ p
    lin = 1j * 0.5 * lam * wv.alpha * (1 - pn + tau * (qn - qp + 1j * x))
    quad = 0.5 * lam**2 * wv.beta * (1 - pn + tau * (qp * pn - qp))
    return float(0.5 * (wv.omega * (1 + tau * qn) + 2 * lin.real + quad))


def weak_postselection_probability(sc: GeneralSystemScenario) -> float:
    wv = sc.weak_values
    u = 1 - sc.p @ sc.n
    return float(wv.omega - sc.lam * u * wv.alpha.imag + 0.5 * sc.lam**2 * u * wv.beta)


def weak_conditional_readout(sc: GeneralSystemScenario, linear: bool = False) -> float:
    """Weak-coupling <tau>.

    By default the rational form with the quadratic ``B_w`` terms kept in
    numerator and denominator; ``linear=True`` gives the first-order
    Taylor expansion instead.
    """
    a_w, b_w = sc.weak_values.require()
    lam = sc.lam
    p, q, n = sc.p, sc.q, sc.n
    pn, qn, qp = p @ n, q @ n, q @ p
    x = np.cross(q, n) @ p
    if linear:
        return float(qn - lam * x * a_w.real + lam * (qp - qn * pn) * a_w.imag)
    num = qn - lam * x * a_w.real - lam * (qn - qp) * a_w.imag - 0.5 * lam**2 * qp * (1 - pn) * b_w
    den = 1 - lam * (1 - pn) * a_w.imag + 0.5 * lam**2 * (1 - pn) * b_w
    if den <= NULL_PROBABILITY:
        raise NullConditioningError()
    return float(num / den)
