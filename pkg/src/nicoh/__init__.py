"""nicoh: noise-induced and transport-induced coherence in driven quantum systems."""

__version__ = "0.1.0"

from .core import (DensityMatrix, HermitianOperator, Superoperator,
                   TurnOnEnvelope, Trajectory, expectation, gibbs_state,
                   propagate, propagate_envelope, steady_state)

__all__ = [
    "__version__", "DensityMatrix", "HermitianOperator", "Superoperator",
    "TurnOnEnvelope", "Trajectory", "expectation", "gibbs_state",
    "propagate", "propagate_envelope", "steady_state",
]
