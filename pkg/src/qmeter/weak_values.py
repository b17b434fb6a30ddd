"""Normal weak values and the invariant set (omega, alpha, beta, A_w, B_w).

The normal weak values are ``alpha_{m,n} = Tr(A^m E_f A^n rho_i)``.  The
three that fix every qubit statistic are

* ``omega = alpha_{0,0}``, the unnormalized postselection overlap,
* ``alpha = alpha_{0,1}``, complex,
* ``beta = alpha_{1,1}``, real and non-negative,

with ``A_w = alpha / omega`` and ``B_w = beta / omega``.  When ``omega``
vanishes (orthogonal preparation and postselection) the ratios are
reported as undefined instead of infinite.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .bloch import qubit_axis, qubit_state
from .errors import DimensionError, UndefinedWeakValueError, ValidationError
from .linalg import DensityOperator, Effect, HermitianOperator

MAX_ORDER = 4
ZERO_OMEGA_REL = 1e-14
BETA_IMAG_TOL = 1e-10
PURITY_TOL = 1e-8


@dataclass(frozen=True)
class PrePostPair:
    preparation: DensityOperator
    postselection: Effect
    observable: HermitianOperator

    def __post_init__(self):
        for name, cls in (
            ("preparation", DensityOperator),
            ("postselection", Effect),
            ("observable", HermitianOperator),
        ):
            val = getattr(self, name)
            if not isinstance(val, cls):
                object.__setattr__(self, name, cls(val))
        dims = {self.preparation.dim, self.postselection.dim, self.observable.dim}
        if len(dims) != 1:
            raise DimensionError(f"pre/post pair has mixed dimensions {sorted(dims)}")

    @property
    def dim(self) -> int:
        return self.preparation.dim


@dataclass(frozen=True)
class WeakValueSet:
    """``omega``, ``alpha``, ``beta`` plus the ratios when ``omega > 0``.

    ``a_w`` and ``b_w`` are ``None`` when the weak values are undefined;
    use :meth:`require` to get them or raise.
    """

    omega: float
    alpha: complex
    beta: float
    a_w: complex | None
    b_w: float | None

    @classmethod
    def from_invariants(cls, omega, alpha, beta, trace_ef=1.0):
        omega = float(omega)
        beta = float(beta)
        alpha = complex(alpha)
        if omega < ZERO_OMEGA_REL * trace_ef:
            return cls(max(omega, 0.0), alpha, beta, None, None)
        return cls(omega, alpha, beta, alpha / omega, beta / omega)

    @property
    def defined(self) -> bool:
        return self.a_w is not None

    def require(self) -> tuple[complex, float]:
        if self.a_w is None:
            raise UndefinedWeakValueError(
                "weak values undefined: preparation and postselection are orthogonal"
            )
        return self.a_w, self.b_w

    def scaled(self, c: float) -> "WeakValueSet":
        """The set for postselection ``c * E_f``; the ratios do not change."""
        if c <= 0:
            raise ValidationError(f"scale factor must be positive, got {c}")
        return WeakValueSet(c * self.omega, c * self.alpha, c * self.beta, self.a_w, self.b_w)


def _check_order(k):
    if not (isinstance(k, (int, np.integer)) and 0 <= k <= MAX_ORDER):
        raise ValidationError(f"weak-value order must be an integer in [0, {MAX_ORDER}]")


def normal_weak_value(pair: PrePostPair, m: int, n: int) -> complex:
    """``Tr(A^m E_f A^n rho_i)``."""
    _check_order(m)
    _check_order(n)
    a = pair.observable.matrix
    am = np.linalg.matrix_power(a, int(m))
    an = np.linalg.matrix_power(a, int(n))
    return complex(np.trace(am @ pair.postselection.matrix @ an @ pair.preparation.matrix))


def weak_values(pair: PrePostPair) -> WeakValueSet:
    """Weak-value set from the trace definitions."""
    omega = normal_weak_value(pair, 0, 0)
    alpha = normal_weak_value(pair, 0, 1)
    beta = normal_weak_value(pair, 1, 1)
    if abs(beta.imag) > BETA_IMAG_TOL:
        raise RuntimeError(f"beta has imaginary part {beta.imag:.3g}")
    trace_ef = float(np.real(np.trace(pair.postselection.matrix)))
    return WeakValueSet.from_invariants(omega.real, alpha, beta.real, trace_ef)


def geometric_weak_values(m_i, m_f, a, trace_ef: float) -> WeakValueSet:
    """Qubit weak values from preparation/postselection polarizations and axis ``a``.

    ``m_f`` is the polarization of the *normalized* postselection
    ``E_f / Tr(E_f)``.
    """
    m_i, m_f, a = qubit_state(m_i), qubit_state(m_f), qubit_axis(a)
    if trace_ef <= 0:
        raise ValidationError(f"Tr(E_f) must be positive, got {trace_ef}")
    h = 0.5 * trace_ef
    omega = h * (1.0 + m_i @ m_f)
    alpha = h * ((m_i + m_f) @ a + 1j * (np.cross(m_i, m_f) @ a))
    beta = h * (1.0 - m_i @ m_f + 2.0 * (m_f @ a) * (a @ m_i))
    return WeakValueSet.from_invariants(omega, alpha, beta, trace_ef)


class Purity(str, Enum):
    MIXED = "mixed-detected"
    CONSISTENT = "consistent-with-pure"


def purity_discriminator(wvs: WeakValueSet, tol: float = PURITY_TOL) -> Purity:
    """Flag a mixed preparation from ``B_w > |A_w|^2``.

    Only meaningful when the postselection is pure, which the caller must
    guarantee; the weak values alone cannot tell.
    """
    a_w, b_w = wvs.require()
    if b_w - abs(a_w) ** 2 > tol:
        return Purity.MIXED
    return Purity.CONSISTENT
