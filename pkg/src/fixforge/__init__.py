"""fixforge: repair approximate fixed points of channels and stochastic maps."""

from __future__ import annotations

from . import (
    classical,
    clustering,
    counterexamples,
    errors,
    fixers,
    harness,
    linalg,
    quantum,
    rotations,
    serialize,
)
from .classical import ProbabilityVector, StochasticMatrix, fix_classical
from .errors import FixforgeError
from .fixers import (
    FixResult,
    fix_general,
    fix_local_pure,
    fix_mixed_unitary,
    fix_unital,
    fix_unitary,
)
from .harness import InstanceSpec, SuiteReport, generate_instance, run_suite, write_csv
from .quantum import Channel, DensityMatrix, MixedUnitaryChannel, PureState

__version__ = "0.1.0"

__all__ = [
    "Channel",
    "DensityMatrix",
    "FixResult",
    "FixforgeError",
    "InstanceSpec",
    "MixedUnitaryChannel",
    "ProbabilityVector",
    "PureState",
    "StochasticMatrix",
    "SuiteReport",
    "classical",
    "clustering",
    "counterexamples",
    "errors",
    "fix_classical",
    "fix_general",
    "fix_local_pure",
    "fix_mixed_unitary",
    "fix_unital",
    "fix_unitary",
    "fixers",
    "generate_instance",
    "harness",
    "linalg",
    "quantum",
    "rotations",
    "run_suite",
    "serialize",
    "write_csv",
]
