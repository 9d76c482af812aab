"""Ingestion schema for the infant-development trial data, plus a synthetic
stand-in generator.

The real data is not redistributable and is NOT shipped; this module only
fixes the variable-to-role mapping (baseline covariates, 40-week-to-24-month
surrogate measures, the 36-month IQ outcome) and can fabricate a cohort with
the same column names and a planted treatment effect for pipeline tests.
"""

from __future__ import annotations

import numpy as np

from .core import EXPERIMENTAL, Cohort, RandomSource

TREATMENT_COLUMN = "Treatment_group"
OUTCOME_COLUMN = "Stanford_binet_IQ_36m"

BASELINE_COVARIATES = (
    "Birth_weight_gm_baseline",
    "Infant_sex_baseline",
    "Maternal_age_birth_baseline",
    "Maternal_education_baseline",
    "Neonatal_health_index_by_BW_baseline",
    "Analysis_gestational_age_weeks_baseline",
    "Birth_order_baseline",
    "Head_circ_birth_cm_baseline",
    "Infant_length_at_birth_baseline",
    "BMI_at_birth_baseline",
)

SURROGATE_MEASURES = (
    "Infant_weight_40w", "Infant_length_40w", "BMI_40w",
    "Infant_weight_4m", "Infant_length_4m",
    "Infant_weight_8m", "Infant_length_8m",
    "Bayley_MDI_12m", "Bayley_PDI_12m",
    "Infant_weight_18m", "Infant_length_18m",
    "Bayley_MDI_24m", "Bayley_PDI_24m",
)

#: role map consumed by the cohort loader
ROLE_MAP = {
    "treatment": TREATMENT_COLUMN,
    "outcome": OUTCOME_COLUMN,
    "covariates": list(BASELINE_COVARIATES),
    "surrogates": list(SURROGATE_MEASURES),
    "ignore": ["IHDP_Number", "Site_name", "Birth_weight_group"],
}

PLANTED_ATE = 6.47


def make_ihdp_like_cohort(n: int, rng: RandomSource,
                          ate: float = PLANTED_ATE) -> Cohort:
    """Fabricate a randomized cohort with the trial's column names.

    Treatment is a fair coin; its effect on the IQ outcome is fully mediated
    by the development surrogates (strongest through the 24-month cognitive
    scores) and the planted population effect equals ``ate`` exactly.
    """
    k, d = len(BASELINE_COVARIATES), len(SURROGATE_MEASURES)
    gen = rng.generator()
    x = gen.normal(size=(n, k))
    t = (gen.uniform(size=n) < 0.5).astype(float)

    w_xs = gen.normal(scale=0.6, size=(k, d))
    # treatment lifts the post-baseline measures, cognition most of all
    lift = np.abs(gen.normal(loc=1.0, scale=0.3, size=d))
    lift[SURROGATE_MEASURES.index("Bayley_MDI_24m")] *= 2.0
    lift[SURROGATE_MEASURES.index("Bayley_PDI_24m")] *= 1.5
    s = x @ w_xs + np.outer(t, lift) + gen.normal(scale=1.0, size=(n, d))

    delta = np.abs(gen.normal(loc=0.5, scale=0.2, size=d))
    delta_total = float(delta @ lift)
    delta = delta * (ate / delta_total)  # plant the mediated effect exactly
    gamma = gen.normal(scale=1.5, size=k)
    y = 78.0 + x @ gamma + s @ delta + gen.normal(scale=3.0, size=n)

    return Cohort(x=x, s=s, t=t, y=y, population_tag=EXPERIMENTAL,
                  x_names=BASELINE_COVARIATES, s_names=SURROGATE_MEASURES)


def ihdp_like_csv(n: int, rng: RandomSource, ate: float = PLANTED_ATE) -> str:
    """CSV text with the trial's raw column names (loader needs ROLE_MAP)."""
    cohort = make_ihdp_like_cohort(n, rng, ate=ate)
    header = ([TREATMENT_COLUMN] + list(BASELINE_COVARIATES)
              + list(SURROGATE_MEASURES) + [OUTCOME_COLUMN])
    lines = [",".join(header)]
    for i in range(cohort.n):
        cells = [repr(int(cohort.t[i]))]
        cells += [repr(float(v)) for v in cohort.x[i]]
        cells += [repr(float(v)) for v in cohort.s[i]]
        cells.append(repr(float(cohort.y[i])))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"
