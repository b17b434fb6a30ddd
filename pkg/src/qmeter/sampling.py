"""Random states, effects, observables and scenarios for differential testing.

Mixed states are ``M M^dag / Tr`` with complex-normal ``M``; effects are
``c`` times a mixture of random rank-one projectors rescaled to unit
largest eigenvalue, with ``c`` in (0, 1].  Everything takes an explicit
``numpy.random.Generator`` so runs are reproducible from a seed.
"""
from __future__ import annotations

import math

import numpy as np

from .probe_qubit import ProbeSpec
from .qubit_meter import GeneralSystemScenario
from .qubit_qubit import QubitQubitScenario


def unit_vector(rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def ball_vector(rng: np.random.Generator) -> np.ndarray:
    """Uniform in the unit ball."""
    return unit_vector(rng) * rng.uniform() ** (1 / 3)


def _ginibre(d, rng):
    return rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))


def density_matrix(d: int, rng: np.random.Generator) -> np.ndarray:
    m = _ginibre(d, rng)
    rho = m @ m.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def pure_state(d: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    v /= np.linalg.norm(v)
    return np.outer(v, v.conj())


def hermitian(d: int, rng: np.random.Generator) -> np.ndarray:
    """GUE-like draw; its spectrum is almost surely nondegenerate."""
    m = _ginibre(d, rng)
    return 0.5 * (m + m.conj().T)


def effect(d: int, rng: np.random.Generator, scale: float | None = None) -> np.ndarray:
    k = int(rng.integers(1, d + 1))
    weights = rng.uniform(size=k)
    mix = sum(w * pure_state(d, rng) for w in weights)
    mix = 0.5 * (mix + mix.conj().T)
    top = np.linalg.eigvalsh(mix)[-1]
    c = 1.0 - rng.uniform() if scale is None else scale
    return c * mix / top


def qubit_qubit_scenario(rng: np.random.Generator, pure_effect: bool = False) -> QubitQubitScenario:
    m_f = unit_vector(rng) if pure_effect else ball_vector(rng)
    c = 1.0 - rng.uniform()
    trace_ef = c * 2.0 / (1.0 + np.linalg.norm(m_f))
    return QubitQubitScenario(
        m_i=ball_vector(rng),
        m_f=m_f,
        a=unit_vector(rng),
        n=ball_vector(rng),
        p=unit_vector(rng),
        q=unit_vector(rng),
        lam=rng.uniform(0, 2 * math.pi),
        trace_ef=trace_ef,
    )


def general_system_scenario(d: int, rng: np.random.Generator, lam=None) -> GeneralSystemScenario:
    return GeneralSystemScenario(
        rho_i=density_matrix(d, rng),
        e_f=effect(d, rng),
        observable=hermitian(d, rng),
        n=ball_vector(rng),
        p=unit_vector(rng),
        q=unit_vector(rng),
        lam=rng.uniform(0, 2 * math.pi) if lam is None else lam,
    )


def probe_spec(d: int, rng: np.random.Generator) -> ProbeSpec:
    return ProbeSpec(density_matrix(d, rng), hermitian(d, rng))
