"""Role-tagged cohorts, ground-truth containers, deterministic random streams,
and population density-ratio plumbing shared by every other module.

A Cohort is a rectangular dataset whose columns are tagged by role:
pre-treatment covariates ``x`` (n x k), binary treatment ``t``, post-treatment
surrogates ``s`` (n x d), and outcome ``y``.  The ``t`` and ``y`` blocks are
optional as wholes: treatment-only data carries (x, t, s) and outcome-only
data carries (x, s, y).
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .errors import (
    DomainMismatch,
    EmptyCohort,
    NonBinaryTreatment,
    ShapeMismatch,
)

OBSERVATIONAL = "observational"
EXPERIMENTAL = "experimental"

_MASK64 = (1 << 64) - 1


# ---------------------------------------------------------------------------
# random streams
# ---------------------------------------------------------------------------

def _splitmix64(z: int) -> int:
    """One round of splitmix64; a 64-bit bijection used to derive stream ids."""
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class RandomSource:
    """A (seed, stream_id) pair addressing one independent random stream.

    Streams are realized with the counter-based Philox generator keyed by the
    pair, so identical pairs reproduce identical draws on every platform, and
    sub-streams handed to per-unit or per-replicate workers are independent of
    the order in which they are consumed.
    """

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        key = (self.seed & _MASK64) | ((self.stream_id & _MASK64) << 64)
        return np.random.Generator(np.random.Philox(key=key))

    def substream(self, index: int) -> "RandomSource":
        """Derive the index-th child stream; deterministic and order-free."""
        child = _splitmix64((self.stream_id & _MASK64) ^ _splitmix64(index & _MASK64))
        return RandomSource(self.seed, child)

    def substreams(self, count: int) -> list["RandomSource"]:
        return [self.substream(i) for i in range(count)]


def make_rng(seed: int, stream_id: int = 0) -> RandomSource:
    """Create a deterministic random source for the given seed and stream."""
    return RandomSource(int(seed), int(stream_id))


# ---------------------------------------------------------------------------
# cohorts
# ---------------------------------------------------------------------------

def _as_matrix(a, name: str) -> np.ndarray:
    arr = np.asarray(a, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ShapeMismatch(f"{name} must be 2-dimensional, got ndim={arr.ndim}")
    return arr


def _freeze(arr: Optional[np.ndarray]) -> Optional[np.ndarray]:
    if arr is None:
        return None
    out = np.array(arr, copy=True)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class Cohort:
    """Immutable role-tagged dataset.

    x: (n, k) pre-treatment covariates, k >= 0.
    t: optional (n,) binary treatment indicators.
    s: (n, d) post-treatment surrogates, d >= 1.
    y: optional (n,) outcomes.
    """

    x: np.ndarray
    s: np.ndarray
    t: Optional[np.ndarray] = None
    y: Optional[np.ndarray] = None
    population_tag: str = OBSERVATIONAL
    x_names: Optional[tuple[str, ...]] = None
    s_names: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "x", _freeze(_as_matrix(self.x, "x")))
        object.__setattr__(self, "s", _freeze(_as_matrix(self.s, "s")))
        if self.t is not None:
            object.__setattr__(self, "t", _freeze(np.asarray(self.t, dtype=float).ravel()))
        if self.y is not None:
            object.__setattr__(self, "y", _freeze(np.asarray(self.y, dtype=float).ravel()))

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def k(self) -> int:
        return self.x.shape[1]

    @property
    def d(self) -> int:
        return self.s.shape[1]

    def with_fields(self, **kwargs) -> "Cohort":
        """Return a copy with the given fields replaced."""
        data = {
            "x": self.x, "s": self.s, "t": self.t, "y": self.y,
            "population_tag": self.population_tag,
            "x_names": self.x_names, "s_names": self.s_names,
        }
        data.update(kwargs)
        return Cohort(**data)

    def take(self, idx) -> "Cohort":
        """Row subset (fancy indexing); preserves roles and tags."""
        idx = np.asarray(idx)
        return Cohort(
            x=self.x[idx],
            s=self.s[idx],
            t=None if self.t is None else self.t[idx],
            y=None if self.y is None else self.y[idx],
            population_tag=self.population_tag,
            x_names=self.x_names,
            s_names=self.s_names,
        )


def validate_cohort(c: Cohort) -> None:
    """Raise if any Cohort invariant is violated.

    Errors: EmptyCohort (n == 0), ShapeMismatch (ragged columns or d == 0),
    NonBinaryTreatment (t value outside {0, 1}).
    """
    n = c.x.shape[0]
    if n == 0:
        raise EmptyCohort("cohort has no units")
    if c.s.ndim != 2 or c.s.shape[1] < 1:
        raise ShapeMismatch("surrogate block must have d >= 1 columns")
    if c.s.shape[0] != n:
        raise ShapeMismatch(f"s has {c.s.shape[0]} rows, expected {n}")
    if c.t is not None:
        if c.t.shape[0] != n:
            raise ShapeMismatch(f"t has length {c.t.shape[0]}, expected {n}")
        if not np.all(np.isin(c.t, (0.0, 1.0))):
            bad = c.t[~np.isin(c.t, (0.0, 1.0))][0]
            raise NonBinaryTreatment(f"treatment value {bad!r} outside {{0, 1}}")
    if c.y is not None and c.y.shape[0] != n:
        raise ShapeMismatch(f"y has length {c.y.shape[0]}, expected {n}")
    if c.population_tag not in (OBSERVATIONAL, EXPERIMENTAL):
        raise ShapeMismatch(f"unknown population tag {c.population_tag!r}")


# ---------------------------------------------------------------------------
# ground truth for simulated cohorts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScenarioTruth:
    """Per-unit simulated potential outcomes and the true effects.

    ``ate`` is the mean of the realized unit-level contrasts y1 - y0 while
    ``cate`` holds the noise-free conditional effect at each unit's x.
    """

    s0: np.ndarray
    s1: np.ndarray
    y0: np.ndarray
    y1: np.ndarray
    cate: np.ndarray
    ate: float

    def __post_init__(self):
        for name in ("s0", "s1", "y0", "y1", "cate"):
            object.__setattr__(self, name, _freeze(np.asarray(getattr(self, name), dtype=float)))


# ---------------------------------------------------------------------------
# density ratios p_e(x) / p_o(x)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DensityRatio:
    """Known covariate-shift factor between trial and observational cohorts.

    kind:
      identity             -- no shift, ratio 1 everywhere.
      inclusion_indicator  -- proportional to 1[x satisfies criteria],
                              normalized so its mean over the reference
                              observational cohort is exactly 1.
      tabulated            -- per-stratum lookup through a stratifier.
    """

    kind: str = "identity"
    criteria: Optional[str] = None
    predicate: Optional[Callable[[np.ndarray], np.ndarray]] = None
    table: Optional[dict] = None
    stratify: Optional[Callable[[np.ndarray], object]] = None
    scale: float = 1.0
    width: Optional[int] = None

    @staticmethod
    def identity() -> "DensityRatio":
        return DensityRatio(kind="identity")

    @staticmethod
    def from_inclusion(predicate: Callable[[np.ndarray], np.ndarray],
                       cohort: Cohort,
                       criteria: str = "") -> "DensityRatio":
        """Indicator ratio normalized against the given observational cohort."""
        mask = np.asarray(predicate(cohort.x), dtype=float).ravel()
        share = float(mask.mean())
        if share <= 0.0:
            raise DomainMismatch("inclusion criteria exclude every cohort unit")
        return DensityRatio(
            kind="inclusion_indicator",
            criteria=criteria or None,
            predicate=predicate,
            scale=1.0 / share,
            width=cohort.k,
        )

    @staticmethod
    def from_table(stratify: Callable[[np.ndarray], object], table: dict,
                   width: Optional[int] = None) -> "DensityRatio":
        return DensityRatio(kind="tabulated", stratify=stratify, table=dict(table),
                            width=width)

    def values(self, x: np.ndarray) -> np.ndarray:
        """Vectorized ratio over rows of a covariate matrix."""
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x.reshape(1, -1)
        if self.width is not None and x.shape[1] != self.width:
            raise DomainMismatch(
                f"covariate width {x.shape[1]} does not match ratio domain {self.width}")
        if self.kind == "identity":
            return np.ones(x.shape[0])
        if self.kind == "inclusion_indicator":
            mask = np.asarray(self.predicate(x), dtype=float).ravel()
            return mask * self.scale
        if self.kind == "tabulated":
            out = np.empty(x.shape[0])
            for i in range(x.shape[0]):
                key = self.stratify(x[i])
                if key not in self.table:
                    raise DomainMismatch(f"stratum {key!r} missing from ratio table")
                out[i] = self.table[key]
            return out
        raise DomainMismatch(f"unknown density-ratio kind {self.kind!r}")


def density_ratio(dr: DensityRatio, x) -> float:
    """Evaluate the ratio at a single covariate vector."""
    return float(dr.values(np.asarray(x, dtype=float).reshape(1, -1))[0])


# ---------------------------------------------------------------------------
# CSV schema (role-prefixed headers; consumed by the cli module)
# ---------------------------------------------------------------------------

T_COLUMN = "t"
Y_COLUMN = "y"
X_PREFIX = "x_"
S_PREFIX = "s_"


def cohort_header(c: Cohort) -> list[str]:
    x_names = list(c.x_names) if c.x_names else [f"x_{j}" for j in range(c.k)]
    s_names = list(c.s_names) if c.s_names else [f"s_{j}" for j in range(c.d)]
    x_cols = [n if n.startswith(X_PREFIX) else X_PREFIX + n for n in x_names]
    s_cols = [n if n.startswith(S_PREFIX) else S_PREFIX + n for n in s_names]
    header = x_cols + s_cols
    if c.t is not None:
        header.append(T_COLUMN)
    if c.y is not None:
        header.append(Y_COLUMN)
    return header


def cohort_to_csv(c: Cohort) -> str:
    """Serialize a cohort to the role-prefixed CSV schema.

    Floats are written with shortest round-trip repr so deserialization is
    bit-exact.
    """
    buf = io.StringIO()
    buf.write(",".join(cohort_header(c)) + "\n")
    for i in range(c.n):
        cells = [repr(float(v)) for v in c.x[i]] + [repr(float(v)) for v in c.s[i]]
        if c.t is not None:
            cells.append(repr(int(c.t[i])))
        if c.y is not None:
            cells.append(repr(float(c.y[i])))
        buf.write(",".join(cells) + "\n")
    return buf.getvalue()


def truth_to_csv(truth: ScenarioTruth) -> str:
    """Sidecar CSV with columns s0_*, s1_*, y0, y1, cate."""
    d = truth.s0.shape[1]
    header = [f"s0_{j}" for j in range(d)] + [f"s1_{j}" for j in range(d)]
    header += ["y0", "y1", "cate"]
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for i in range(truth.y0.shape[0]):
        cells = [repr(float(v)) for v in truth.s0[i]] + [repr(float(v)) for v in truth.s1[i]]
        cells += [repr(float(truth.y0[i])), repr(float(truth.y1[i])), repr(float(truth.cate[i]))]
        buf.write(",".join(cells) + "\n")
    return buf.getvalue()
