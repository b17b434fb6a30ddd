"""Kernel backend selection.

The compiled ``qmeter._native`` module is used when it imports; otherwise,
or when ``QMETER_PURE_PYTHON=1`` is set, the numpy versions in
``qmeter._fallback`` are used.  Both backends take and return the same
arrays, and the wrappers here normalize dtypes and memory layout.
"""
from __future__ import annotations

import os
from types import ModuleType

import numpy as np

from . import _fallback


def _load_native() -> ModuleType | None:
    if os.environ.get("QMETER_PURE_PYTHON") == "1":
        return None
    try:
        from . import _native
    except ImportError:
        return None
    return _native


_native = _load_native()
BACKEND = "cython" if _native is not None else "python"


def available_backends() -> list[str]:
    names = ["python"]
    if _native is not None:
        names.insert(0, "cython")
    return names


def backend_module(name: str | None = None) -> ModuleType:
    if name is None:
        name = BACKEND
    if name == "python":
        return _fallback
    if name == "cython":
        if _native is None:
            raise ImportError("compiled kernels are not available")
        return _native
    raise ValueError(f"unknown backend {name!r}")


def wigner_accumulate(amp, rho, mid_index, n_mid, backend=None) -> np.ndarray:
    mod = backend_module(backend)
    amp = np.ascontiguousarray(amp, dtype=np.complex128)
    rho = np.ascontiguousarray(rho, dtype=np.complex128)
    mid_index = np.ascontiguousarray(mid_index, dtype=np.int_)
    return mod.wigner_accumulate(amp, rho, mid_index, int(n_mid))


def qq_closed_form(lam, omega, alpha_re, alpha_im, beta, pn, qn, qp, qnp, backend=None):
    """Broadcast the inputs and evaluate ``(P(E_f), P(E_f,+) - P(E_f,-))``."""
    mod = backend_module(backend)
    args = np.broadcast_arrays(
        *(np.asarray(x, dtype=np.float64) for x in (lam, omega, alpha_re, alpha_im, beta, pn, qn, qp, qnp))
    )
    shape = args[0].shape
    flat = [np.ascontiguousarray(a.reshape(-1)) for a in args]
    p_post, diff = mod.qq_closed_form(*flat)
    return np.asarray(p_post).reshape(shape), np.asarray(diff).reshape(shape)
