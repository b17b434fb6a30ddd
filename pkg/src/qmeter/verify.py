"""Randomized differential campaign: every closed form against the oracle.

Each case draws its scenario from a generator seeded by
``(seed, config, dim, case)``, so results do not depend on the order in
which cases run or on the number of worker threads.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import oracle, probe_qubit, qubit_meter, qubit_qubit, sampling
from .bloch import bloch_to_density, effect_from_bloch, pauli_dot
from .errors import NullConditioningError
from .linalg import operator_function
from .table import ResultTable
from .weak_values import PrePostPair, geometric_weak_values, weak_values

ORACLE_TOL = 1e-10
DEFAULT_DIMS = (2, 3, 4, 5, 8)
COLUMNS = ["config", "dim", "quantity", "cases", "max_abs_error", "tolerance", "passed"]

_CONFIG_IDS = {"qubit-qubit": 1, "probe-qubit": 2, "qubit-meter": 3, "weak-values": 4}


@dataclass(frozen=True)
class Check:
    config: str
    dim: int
    quantities: tuple[str, ...]
    tolerances: tuple[float, ...]
    case: Callable[[np.random.Generator], tuple[float, ...]]


def _null_safe(closed: Callable[[], float], truth: float, p_post: float) -> float:
    """|closed - truth|, treating agreement on a null event as zero error."""
    try:
        return abs(closed() - truth)
    except NullConditioningError:
        return 0.0 if p_post <= 1e-12 else math.inf


def _qubit_qubit_case(rng):
    sc = sampling.qubit_qubit_scenario(rng)
    js = oracle.JointScenario.from_qubit_qubit(
        sc.m_i, sc.m_f, sc.trace_ef, sc.a, sc.n, sc.p, sc.q, sc.lam
    )
    st = oracle.born_statistics(js)
    e_post = abs(qubit_qubit.postselection_probability(sc) - st.p_post)
    truth = (st.joint[0] - st.joint[1]) / st.p_post if st.p_post > 0 else math.nan
    e_tau = _null_safe(lambda: qubit_qubit.conditional_average_tau(sc), truth, st.p_post)
    return e_post, e_tau


def _qubit_pair(rng):
    m_i, m_f, a = sampling.ball_vector(rng), sampling.ball_vector(rng), sampling.unit_vector(rng)
    trace_ef = (1.0 - rng.uniform()) * 2.0 / (1.0 + np.linalg.norm(m_f))
    pair = PrePostPair(bloch_to_density(m_i), effect_from_bloch(m_f, trace_ef), pauli_dot(a))
    return pair, a


def _probe_qubit_case(d):
    def case(rng):
        pair, a = _qubit_pair(rng)
        wv = weak_values(pair)
        probe = sampling.probe_spec(d, rng)
        obs = sampling.hermitian(d, rng)
        lam = rng.uniform(-math.pi, math.pi)
        js = oracle.JointScenario.from_probe_qubit(
            pair.preparation.matrix, pair.postselection.matrix, a,
            probe.state.matrix, probe.write_in.matrix, lam,
        )
        st = oracle.born_statistics(js)
        e_post = abs(probe_qubit.postselection_probability_general(probe, wv, lam) - st.p_post)
        try:
            cond = probe_qubit.conditional_probe_state(probe, wv, lam).state.matrix
            e_state = float(np.max(np.abs(cond - st.conditional_probe_state)))
        except NullConditioningError:
            e_state = 0.0 if st.p_post <= 1e-12 else math.inf
        cond_truth = st.conditional_probe_state
        f_truth = float(np.real(np.trace(operator_function(probe.write_in, np.sin) @ cond_truth)))
        g = np.square
        g_truth = float(np.real(np.trace(operator_function(obs, g) @ cond_truth)))
        e_f = _null_safe(
            lambda: probe_qubit.conditional_average_fP(probe, wv, lam, np.sin), f_truth, st.p_post
        )
        e_g = _null_safe(
            lambda: probe_qubit.conditional_average_gO(probe, obs, wv, lam, g), g_truth, st.p_post
        )
        return e_post, e_state, e_f, e_g

    return case


def _qubit_meter_case(d):
    def case(rng):
        sc = sampling.general_system_scenario(d, rng)
        js = oracle.JointScenario.from_qubit_meter(
            sc.rho_i.matrix, sc.e_f.matrix, sc.observable.matrix, sc.n, sc.p, sc.q, sc.lam
        )
        st = oracle.born_statistics(js)
        e_post = abs(qubit_meter.exact_postselection_probability(sc) - st.p_post)
        truth = st.joint[0] / st.p_post if st.p_post > 0 else math.nan
        e_q = _null_safe(lambda: qubit_meter.exact_conditional_readout(sc, 1), truth, st.p_post)
        try:
            total = qubit_meter.exact_conditional_readout(sc, 1) + qubit_meter.exact_conditional_readout(sc, -1)
            e_sum = abs(total - 1.0)
        except NullConditioningError:
            e_sum = 0.0
        return e_post, e_q, e_sum

    return case


def _weak_values_case(rng):
    sc = sampling.qubit_qubit_scenario(rng)
    geo = sc.weak_values
    pair = PrePostPair(bloch_to_density(sc.m_i), sc.effect, pauli_dot(sc.a))
    tr = weak_values(pair)
    e_path = max(abs(geo.omega - tr.omega), abs(geo.alpha - tr.alpha), abs(geo.beta - tr.beta))
    if geo.omega > 1e-6:
        a_w, b_w = geo.require()
        deficit = max(0.0, abs(a_w) ** 2 - b_w)
    else:
        deficit = 0.0
    # pure-pure equality
    pure = geometric_weak_values(
        sampling.unit_vector(rng), sampling.unit_vector(rng), sc.a, sc.trace_ef
    )
    e_pure = abs(pure.b_w - abs(pure.a_w) ** 2) if pure.omega > 1e-6 else 0.0
    return e_path, deficit, e_pure


def checks(dims=DEFAULT_DIMS) -> list[Check]:
    out = [
        Check("qubit-qubit", 2, ("p_post", "tau_avg"), (ORACLE_TOL,) * 2, _qubit_qubit_case),
        Check(
            "weak-values", 2, ("trace_vs_geometric", "bw_deficit", "pure_equality"),
            (1e-12, 1e-10, 1e-10), _weak_values_case,
        ),
    ]
    for d in dims:
        out.append(
            Check(
                "probe-qubit", d, ("p_post", "cond_state", "avg_fP", "avg_gO"),
                (ORACLE_TOL,) * 4, _probe_qubit_case(d),
            )
        )
    for d in dims:
        out.append(
            Check(
                "qubit-meter", d, ("p_post", "Q_plus", "Q_sum"),
                (ORACLE_TOL, ORACLE_TOL, 1e-12), _qubit_meter_case(d),
            )
        )
    return out


def _case_rng(seed: int, check: Check, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, _CONFIG_IDS[check.config], check.dim, index])


def run_campaign(cases: int, dims=DEFAULT_DIMS, seed: int = 0, threads: int = 1) -> ResultTable:
    """Run every check ``cases`` times and tabulate the worst error per quantity."""
    table = ResultTable(columns=list(COLUMNS))
    all_checks = checks(dims)
    overall = 0.0
    all_passed = True
    total_cases = 0
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        for check in all_checks:
            errors = list(
                pool.map(lambda i, c=check: c.case(_case_rng(seed, c, i)), range(cases))
            )
            worst = np.max(np.array(errors, dtype=float), axis=0) if errors else np.zeros(len(check.quantities))
            total_cases += cases
            for name, tol, err in zip(check.quantities, check.tolerances, worst):
                ok = bool(err <= tol)
                all_passed &= ok
                overall = max(overall, float(err))
                table.append([check.config, check.dim, name, cases, float(err), tol, int(ok)])
    table.append(["summary", 0, "all", total_cases, overall, ORACLE_TOL, int(all_passed)])
    return table


def campaign_passed(table: ResultTable) -> bool:
    return bool(table.rows[-1][-1])
