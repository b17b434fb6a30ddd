"""Exact and weak-coupling statistics of postselected measurements with qubits.

Three configurations are covered: a qubit probe measuring a qubit
(:mod:`qmeter.qubit_qubit`), an arbitrary probe measuring a qubit
(:mod:`qmeter.probe_qubit`, with :mod:`qmeter.wigner`), and a qubit probe
measuring an arbitrary observable (:mod:`qmeter.qubit_meter`).  Every
closed form is checked against the brute-force simulator in
:mod:`qmeter.oracle`.
"""
from .errors import (
    DegenerateSpectrumError,
    DimensionError,
    NullConditioningError,
    OffLatticeError,
    QMeterError,
    UndefinedWeakValueError,
    ValidationError,
)
from .kernels import BACKEND
from .linalg import DensityOperator, Effect, HermitianOperator
from .weak_values import PrePostPair, WeakValueSet, geometric_weak_values, weak_values

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "DegenerateSpectrumError",
    "DensityOperator",
    "DimensionError",
    "Effect",
    "HermitianOperator",
    "NullConditioningError",
    "OffLatticeError",
    "PrePostPair",
    "QMeterError",
    "UndefinedWeakValueError",
    "ValidationError",
    "WeakValueSet",
    "geometric_weak_values",
    "weak_values",
    "__version__",
]
