"""Grid-partitioned TSK neuro-fuzzy modeling with rule-base reduction.

The library builds a full-grid first-order TSK fuzzy system, trains it
with the classic hybrid scheme (forward least squares on the consequents,
backward gradient descent on the premises), and offers a reduction
pipeline that replaces the rule activations by a few principal components
of the normalized firing strengths, selected by a binary particle swarm
with consequent-only refits. A benchmark CLI runs cross-validated
comparisons and writes tabular reports.
"""

from .fuzzy import (
    DegenerateFiringError,
    FiringMatrix,
    FuzzyModel,
    GaussianParams,
    GBellParams,
    InputSpec,
    RuleGrid,
    build_grid,
    firing_strengths,
    gaussian_grad,
    gaussian_mu,
    gbell_grad,
    gbell_mu,
    normalize,
)

__version__ = "0.1.0"

__all__ = [
    "DegenerateFiringError",
    "FiringMatrix",
    "FuzzyModel",
    "GaussianParams",
    "GBellParams",
    "InputSpec",
    "RuleGrid",
    "build_grid",
    "firing_strengths",
    "gaussian_grad",
    "gaussian_mu",
    "gbell_grad",
    "gbell_mu",
    "normalize",
    "__version__",
]
