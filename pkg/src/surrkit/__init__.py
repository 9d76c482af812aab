"""surrkit: learning and evaluating plug-in composite surrogate endpoints.

The package is organized by responsibility:

- ``core``        data model, random streams, density ratios
- ``models``      self-contained weighted regression / tree / ensemble fits
- ``scm``         synthetic structural-causal-model cohort generators
- ``oracle``      brute-force discrete verification of the closed-form identities
- ``surrogates``  the endpoint learners (bound regression, surrogate sampling,
                  outcome regression, regress-select-regress, surrogate index)
- ``eval``        effect estimation, scoring metrics, percentile bootstrap
- ``cli``         configuration-driven experiment runner
"""

from .core import (
    Cohort,
    DensityRatio,
    RandomSource,
    ScenarioTruth,
    density_ratio,
    make_rng,
    validate_cohort,
)

__version__ = "0.1.0"

__all__ = [
    "Cohort",
    "DensityRatio",
    "RandomSource",
    "ScenarioTruth",
    "density_ratio",
    "make_rng",
    "validate_cohort",
    "__version__",
]
