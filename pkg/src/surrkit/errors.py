"""Exception hierarchy shared across the package.

Every error raised by library code derives from SurrkitError so callers
(and the experiment runner, which must isolate per-method failures) can
catch one base class and still report a stable identifier string.
"""


class SurrkitError(Exception):
    """Base class for all library errors."""

    #: stable identifier used in results tables and CLI error rows
    code = "error"


# --- data model -------------------------------------------------------------

class ShapeMismatch(SurrkitError):
    code = "shape_mismatch"


class EmptyCohort(SurrkitError):
    code = "empty_cohort"


class NonBinaryTreatment(SurrkitError):
    code = "non_binary_treatment"


class DomainMismatch(SurrkitError):
    code = "domain_mismatch"


# --- model fitting ----------------------------------------------------------

class NonFiniteInput(SurrkitError):
    code = "non_finite_input"


class AllZeroWeights(SurrkitError):
    code = "all_zero_weights"


class Separation(SurrkitError):
    code = "separation"


class TooFewSamples(SurrkitError):
    code = "too_few_samples"


class WidthMismatch(SurrkitError):
    code = "width_mismatch"


# --- oracle -----------------------------------------------------------------

class PositivityViolation(SurrkitError):
    code = "positivity_violation"


class ZeroDenominator(SurrkitError):
    code = "zero_denominator"


class CaseMismatch(SurrkitError):
    code = "case_mismatch"


class DimensionMismatch(SurrkitError):
    code = "dimension_mismatch"


class NoAffectedSurrogate(SurrkitError):
    code = "no_affected_surrogate"


# --- learners ---------------------------------------------------------------

class MissingOutcome(SurrkitError):
    code = "missing_outcome"


class UnfittedNuisance(SurrkitError):
    code = "unfitted_nuisance"


class DegenerateContrasts(SurrkitError):
    code = "degenerate_contrasts"


class SingleArmData(SurrkitError):
    code = "single_arm_data"


# --- cli --------------------------------------------------------------------

class ParseError(SurrkitError):
    code = "parse_error"


class SchemaError(SurrkitError):
    code = "schema_error"


class ConfigError(SurrkitError):
    code = "config_error"


class IoError(SurrkitError):
    code = "io_error"


class RankDeficientWarning(UserWarning):
    """Emitted when a rank-deficient linear system falls back to ridge jitter."""
