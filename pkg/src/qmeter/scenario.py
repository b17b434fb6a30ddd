"""Scenario files: parsing, validation with field paths, and the per-mode runners.

A scenario file is YAML (JSON is accepted too, being a subset).  See the
README for the schema of each mode.  Validation errors carry the dotted
path of the offending field, e.g. ``system.preparation.bloch``.
"""
from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable

import numpy as np
import yaml

from . import __version__, probe_qubit, qubit_meter, qubit_qubit, verify
from .bloch import bloch_to_density, effect_from_bloch, pauli_dot, probe_from_wkd, qubit_axis, qubit_state
from .errors import QMeterError, UndefinedWeakValueError, ValidationError
from .linalg import DensityOperator, Effect, HermitianOperator
from .table import ResultTable
from .weak_values import PrePostPair, Purity, purity_discriminator, weak_values
from .wigner import build_wigner

MODES = ("qubit-qubit", "probe-qubit", "qubit-meter", "wigner", "weak-values", "verify")


class ScenarioError(ValidationError):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class _Node:
    """Dict wrapper that remembers its dotted path for error messages."""

    def __init__(self, data, path=""):
        self.data = data
        self.path = path

    def sub(self, key) -> str:
        return f"{self.path}.{key}" if self.path else str(key)

    def has(self, key) -> bool:
        return isinstance(self.data, dict) and key in self.data

    def get(self, key, default=...):
        if not isinstance(self.data, dict):
            raise ScenarioError(self.path, "expected a mapping")
        if key not in self.data:
            if default is ...:
                raise ScenarioError(self.sub(key), "missing required field")
            return default
        return self.data[key]

    def node(self, key) -> "_Node":
        return _Node(self.get(key), self.sub(key))

    def number(self, key, default=...) -> float:
        val = self.get(key, default)
        if isinstance(val, bool) or not isinstance(val, (int, float)) or not math.isfinite(val):
            raise ScenarioError(self.sub(key), f"expected a finite number, got {val!r}")
        return float(val)

    def integer(self, key, default=...) -> int:
        val = self.get(key, default)
        if isinstance(val, bool) or not isinstance(val, int):
            raise ScenarioError(self.sub(key), f"expected an integer, got {val!r}")
        return val


def _guard(path: str, fn: Callable, *args):
    try:
        return fn(*args)
    except ScenarioError:
        raise
    except (ValidationError, ValueError, TypeError) as exc:
        raise ScenarioError(path, str(exc)) from None


def _vector(node: _Node, key: str) -> np.ndarray:
    raw = node.get(key)
    if not isinstance(raw, list) or len(raw) != 3:
        raise ScenarioError(node.sub(key), "expected a list of 3 numbers")
    return _guard(node.sub(key), lambda: np.array(raw, dtype=float))


def _matrix(node: _Node) -> np.ndarray:
    raw = node.get("matrix")
    path = node.sub("matrix")
    if isinstance(raw, dict):
        real = raw.get("real")
        imag = raw.get("imag")
        if real is None:
            raise ScenarioError(f"{path}.real", "missing required field")
        re = _guard(f"{path}.real", lambda: np.array(real, dtype=float))
        im = np.zeros_like(re) if imag is None else _guard(f"{path}.imag", lambda: np.array(imag, dtype=float))
        if re.shape != im.shape:
            raise ScenarioError(path, "real and imag parts differ in shape")
        m = re + 1j * im
    else:
        m = _guard(path, lambda: np.array(raw, dtype=complex))
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ScenarioError(path, f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ScenarioError(path, "non-finite entries")
    return m


def _state(node: _Node):
    """Qubit polarization from ``bloch`` or ``{w, kappa, delta}``, else a matrix."""
    if node.has("bloch"):
        return _guard(node.sub("bloch"), qubit_state, _vector(node, "bloch"))
    if node.has("w"):
        return _guard(
            node.path, probe_from_wkd, node.number("w"), node.number("kappa", 0.0), node.number("delta", 0.0)
        )
    return _guard(node.sub("matrix"), DensityOperator, _matrix(node))


def _density(node: _Node) -> DensityOperator:
    st = _state(node)
    if isinstance(st, DensityOperator):
        return st
    return bloch_to_density(st)


def _effect(node: _Node) -> Effect:
    if node.has("bloch"):
        m = _guard(node.sub("bloch"), qubit_state, _vector(node, "bloch"))
        return _guard(node.path, effect_from_bloch, m, node.number("trace", 1.0))
    return _guard(node.sub("matrix"), Effect, _matrix(node))


def _observable(node: _Node) -> HermitianOperator:
    if node.has("axis"):
        a = _guard(node.sub("axis"), qubit_axis, _vector(node, "axis"))
        return HermitianOperator(pauli_dot(a))
    return _guard(node.sub("matrix"), HermitianOperator, _matrix(node))


def _axis(node: _Node, key: str) -> np.ndarray:
    sub = node.node(key)
    return _guard(sub.sub("axis"), qubit_axis, _vector(sub, "axis"))


def couplings(node: _Node) -> list[float]:
    raw = node.get("coupling")
    path = node.sub("coupling")
    if isinstance(raw, dict):
        c = _Node(raw, path)
        start, stop = c.number("start"), c.number("stop")
        steps = c.integer("steps")
        if steps < 1:
            raise ScenarioError(f"{path}.steps", "must be at least 1")
        return [float(x) for x in np.linspace(start, stop, steps)]
    if isinstance(raw, list):
        if not raw:
            raise ScenarioError(path, "empty coupling list")
        return [_num(path, i, v) for i, v in enumerate(raw)]
    return [node.number("coupling")]


def _num(path, i, v) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ScenarioError(f"{path}[{i}]", f"expected a finite number, got {v!r}")
    return float(v)


def _pmap(fn, items, threads: int):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _nan_if_undefined(fn):
    try:
        return fn()
    except UndefinedWeakValueError:
        return math.nan


def _run_qubit_qubit(doc: _Node, threads: int) -> ResultTable:
    sys_ = doc.node("system")
    probe = doc.node("probe")
    pre = sys_.node("preparation")
    post = sys_.node("postselection")
    m_i = _guard(pre.sub("bloch"), qubit_state, _vector(pre, "bloch"))
    m_f = _guard(post.sub("bloch"), qubit_state, _vector(post, "bloch"))
    n = _state(probe.node("preparation"))
    if isinstance(n, DensityOperator):
        raise ScenarioError("probe.preparation", "qubit probe needs a Bloch vector or w/kappa/delta")
    base = _guard(
        "",
        qubit_qubit.QubitQubitScenario,
        m_i,
        m_f,
        _axis(sys_, "observable"),
        n,
        _axis(probe, "interaction"),
        _axis(probe, "readout"),
        0.0,
        post.number("trace", 1.0),
    )
    lams = couplings(doc)
    p_post, tau = qubit_qubit.sweep(base, lams)
    table = ResultTable(["lambda", "P_post", "tau_avg", "tau_first_order"])
    for lam, pp, t in zip(lams, p_post, tau):
        if math.isnan(t):
            raise ScenarioError("coupling", f"conditioning on null event at lambda = {lam!r}")
        first = _nan_if_undefined(lambda: qubit_qubit.first_order_average_tau(base.with_coupling(lam)))
        table.append([lam, float(pp), float(t), first])
    return table


def _run_weak_values(doc: _Node, threads: int) -> ResultTable:
    sys_ = doc.node("system")
    pair = _guard(
        "system",
        PrePostPair,
        _density(sys_.node("preparation")),
        _effect(sys_.node("postselection")),
        _observable(sys_.node("observable")),
    )
    wv = weak_values(pair)
    ef = pair.postselection.matrix
    w = np.linalg.eigvalsh(ef)
    post_pure = abs(w[-1] - w.sum()) <= 1e-10
    if wv.defined:
        a_w, b_w = wv.require()
        flag = float(purity_discriminator(wv) is Purity.MIXED) if post_pure else math.nan
        tail = [a_w.real, a_w.imag, b_w, flag]
    else:
        tail = [math.nan] * 4
    table = ResultTable(["omega", "alpha_re", "alpha_im", "beta", "Aw_re", "Aw_im", "Bw", "purity_flag"])
    table.append([wv.omega, wv.alpha.real, wv.alpha.imag, wv.beta, *tail])
    return table


def _qubit_pair(sys_: _Node) -> PrePostPair:
    pair = _guard(
        "system",
        PrePostPair,
        _density(sys_.node("preparation")),
        _effect(sys_.node("postselection")),
        _observable(sys_.node("observable")),
    )
    if pair.dim != 2:
        raise ScenarioError("system", "the measured system must be a qubit in this mode")
    return pair


def _run_probe_qubit(doc: _Node, threads: int) -> ResultTable:
    pair = _qubit_pair(doc.node("system"))
    wv = weak_values(pair)
    probe_node = doc.node("probe")
    rho = _density(probe_node.node("state"))
    lattice = probe_node.has("lattice")
    if lattice:
        lat = probe_node.node("lattice")
        probe = _guard(
            lat.path, probe_qubit.LatticeProbe.build, rho, lat.number("spacing", 1.0), lat.number("origin", 0.0)
        )
        obs = probe.pointer
    else:
        probe = _guard("probe", probe_qubit.ProbeSpec, rho, _observable(probe_node.node("write_in")))
        obs = _observable(probe_node.node("readout")) if probe_node.has("readout") else None
    lams = couplings(doc)

    def row(lam):
        pp = probe_qubit.postselection_probability_general(probe, wv, lam)
        avg_p = probe_qubit.conditional_average_fP(probe, wv, lam, lambda x: x)
        out = [lam, pp, avg_p]
        if lattice:
            out.append(probe_qubit.conditional_average_gQ(probe, wv, lam))
        elif obs is not None:
            out.append(probe_qubit.conditional_average_gO(probe, obs, wv, lam))
        return out

    cols = ["lambda", "P_post", "avg_P"]
    if lattice:
        cols.append("avg_Q")
    elif obs is not None:
        cols.append("avg_O")
    table = ResultTable(cols)
    for r in _pmap(lambda lam: _guard("coupling", row, lam), lams, threads):
        table.append(r)
    return table


def _run_qubit_meter(doc: _Node, threads: int) -> ResultTable:
    sys_ = doc.node("system")
    probe = doc.node("probe")
    n = _state(probe.node("preparation"))
    if isinstance(n, DensityOperator):
        raise ScenarioError("probe.preparation", "qubit probe needs a Bloch vector or w/kappa/delta")
    base = _guard(
        "system",
        qubit_meter.GeneralSystemScenario,
        _density(sys_.node("preparation")),
        _effect(sys_.node("postselection")),
        _observable(sys_.node("observable")),
        n,
        _axis(probe, "interaction"),
        _axis(probe, "readout"),
        0.0,
    )
    lams = couplings(doc)

    def row(lam):
        sc = base.with_coupling(lam)
        qp = qubit_meter.exact_conditional_readout(sc, 1)
        qm = qubit_meter.exact_conditional_readout(sc, -1)
        weak = _nan_if_undefined(lambda: qubit_meter.weak_conditional_readout(sc))
        lin = _nan_if_undefined(lambda: qubit_meter.weak_conditional_readout(sc, linear=True))
        return [lam, qubit_meter.exact_postselection_probability(sc), qp, qm, qp - qm, weak, lin]

    table = ResultTable(["lambda", "P_post", "Q_plus", "Q_minus", "tau_exact", "tau_weak", "tau_linear"])
    for r in _pmap(lambda lam: _guard("coupling", row, lam), lams, threads):
        table.append(r)
    return table


def _run_wigner(doc: _Node, threads: int) -> ResultTable:
    ops = doc.node("operators")
    o_op = _observable(ops.node("O"))
    p_op = _observable(ops.node("P"))
    rho = _density(ops.node("rho"))
    tab = _guard("operators", build_wigner, o_op, p_op, rho)
    table = ResultTable(["O", "P_mid", "W"])
    for r in tab.rows():
        table.append(list(r))
    return table


def _run_verify(doc: _Node, threads: int, seed: int) -> ResultTable:
    cases = doc.integer("cases", 1000)
    if cases < 1:
        raise ScenarioError("cases", "must be at least 1")
    dims = doc.get("dims", list(verify.DEFAULT_DIMS))
    if not isinstance(dims, list) or not dims or not all(
        isinstance(d, int) and not isinstance(d, bool) and 2 <= d <= 16 for d in dims
    ):
        raise ScenarioError("dims", "expected a non-empty list of integers in [2, 16]")
    return verify.run_campaign(cases, dims, seed=seed, threads=threads)


_RUNNERS = {
    "qubit-qubit": _run_qubit_qubit,
    "probe-qubit": _run_probe_qubit,
    "qubit-meter": _run_qubit_meter,
    "wigner": _run_wigner,
    "weak-values": _run_weak_values,
}


def load(text: str) -> dict[str, Any]:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError("", f"cannot parse scenario: {exc}") from None
    if not isinstance(doc, dict):
        raise ScenarioError("", "scenario must be a mapping")
    mode = doc.get("mode")
    if mode not in MODES:
        raise ScenarioError("mode", f"expected one of {', '.join(MODES)}, got {mode!r}")
    return doc


def digest(doc: dict[str, Any]) -> str:
    body = {k: v for k, v in doc.items() if k != "output"}
    canon = json.dumps(body, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def run(doc: dict[str, Any], seed: int = 0, threads: int = 1) -> ResultTable:
    """Execute a parsed scenario and return its table with metadata filled in."""
    node = _Node(doc)
    mode = doc["mode"]
    if mode == "verify":
        # a seed in the file wins over the command line
        seed = node.integer("seed", seed)
    try:
        if mode == "verify":
            table = _run_verify(node, threads, seed)
        else:
            table = _RUNNERS[mode](node, threads)
    except ScenarioError:
        raise
    except QMeterError as exc:
        raise ScenarioError("", str(exc)) from None
    table.meta = {"mode": mode, "seed": seed, "version": __version__, "digest": digest(doc)}
    return table
