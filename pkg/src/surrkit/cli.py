"""Configuration-driven experiment runner.

A single JSON config describes either a synthetic scenario or an external
cohort file, the methods to fit, seeds, and bootstrap settings; the runner
produces one results row per (scenario, seed, method) with per-cell error
isolation, and emits CSV/JSON tables plus optional diagnostic plots.

Exit codes: 0 success (even with error rows), 2 config error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import datetime
import json
import math
import os
import sys
import time
import warnings
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .core import (
    EXPERIMENTAL,
    OBSERVATIONAL,
    S_PREFIX,
    T_COLUMN,
    X_PREFIX,
    Y_COLUMN,
    Cohort,
    RandomSource,
    cohort_to_csv,
    make_rng,
    truth_to_csv,
    validate_cohort,
)
from .errors import (
    ConfigError,
    IoError,
    ParseError,
    SchemaError,
    SingleArmData,
    SurrkitError,
)
from .eval import ate_diff_in_means, bootstrap_ate_ci, cate_t_learner, score, EffectEstimate
from .scm import ScenarioSpec, generate_cohort, sample_scenario_params
from .surrogates import (
    DEFAULT_CLIP,
    DEFAULT_L,
    DEFAULT_L1,
    LEARNER_IDS,
    fit_learner,
    fit_nuisances,
)

SCHEMA_VERSION = "1"
OUTPUT_DIR_ENV = "SURRKIT_OUT_DIR"

RESULT_COLUMNS = (
    "scenario", "seed", "method", "status", "error",
    "ate_hat", "mae", "r2", "pehe", "ci_lo", "ci_hi",
    "runtime_ms", "l1_strength", "clip", "L", "B",
)


# ---------------------------------------------------------------------------
# cohort CSV ingestion
# ---------------------------------------------------------------------------

def _roles_from_header(header: list, role_map: Optional[dict]):
    """Resolve each column to a role; returns (roles, x_names, s_names)."""
    if role_map is None:
        roles = []
        for name in header:
            if name == T_COLUMN:
                roles.append("t")
            elif name == Y_COLUMN:
                roles.append("y")
            elif name.startswith(X_PREFIX):
                roles.append("x")
            elif name.startswith(S_PREFIX):
                roles.append("s")
            else:
                raise SchemaError(
                    f"column {name!r} has no role prefix (expected x_*, s_*, t, y)")
    else:
        treatment = role_map.get("treatment")
        outcome = role_map.get("outcome")
        covariates = set(role_map.get("covariates", ()))
        surrogates = set(role_map.get("surrogates", ()))
        ignore = set(role_map.get("ignore", ()))
        roles = []
        for name in header:
            if name == treatment:
                roles.append("t")
            elif name == outcome:
                roles.append("y")
            elif name in covariates:
                roles.append("x")
            elif name in surrogates:
                roles.append("s")
            elif name in ignore:
                roles.append("ignore")
            else:
                raise SchemaError(f"column {name!r} not covered by the role map")
        for required, label in ((treatment, "treatment"), (outcome, "outcome")):
            if required is not None and required not in header:
                raise SchemaError(f"required {label} column {required!r} missing")
        missing_s = surrogates - set(header)
        if missing_s:
            raise SchemaError(f"surrogate columns missing from file: {sorted(missing_s)}")
    if "s" not in roles:
        raise SchemaError("file defines no surrogate columns")
    x_names = tuple(h for h, r in zip(header, roles) if r == "x")
    s_names = tuple(h for h, r in zip(header, roles) if r == "s")
    return roles, x_names, s_names


def parse_cohort_csv(text: str, role_map: Optional[dict] = None,
                     population_tag: str = OBSERVATIONAL) -> Cohort:
    """Parse the role-tagged cohort schema.

    Rows with any empty cell in a role-bearing column are dropped as
    incomplete cases (their 1-based line numbers are reported in a warning);
    malformed numeric cells raise ParseError with their position.
    """
    lines = [ln for ln in text.splitlines() if ln.strip() != ""]
    if not lines:
        raise ParseError("empty file")
    header = [h.strip() for h in lines[0].split(",")]
    roles, x_names, s_names = _roles_from_header(header, role_map)

    kept_rows = []
    dropped_lines = []
    for line_no, line in enumerate(lines[1:], start=2):
        cells = [c.strip() for c in line.split(",")]
        if len(cells) != len(header):
            raise ParseError(
                f"row at line {line_no} has {len(cells)} cells, expected {len(header)}")
        incomplete = any(cells[j] == "" for j, role in enumerate(roles)
                         if role != "ignore")
        if incomplete:
            dropped_lines.append(line_no)
            continue
        parsed = {}
        for j, (cell, role) in enumerate(zip(cells, roles)):
            if role == "ignore":
                continue
            try:
                parsed[j] = float(cell)
            except ValueError:
                raise ParseError(
                    f"non-numeric cell {cell!r} at line {line_no}, "
                    f"column {header[j]!r}") from None
        kept_rows.append(parsed)

    if dropped_lines:
        preview = ", ".join(str(n) for n in dropped_lines[:10])
        warnings.warn(
            f"dropped {len(dropped_lines)} incomplete rows (lines {preview}"
            + ("..." if len(dropped_lines) > 10 else "") + ")")

    def collect(role):
        cols = [j for j, r in enumerate(roles) if r == role]
        if not cols:
            return None
        return np.array([[row[j] for j in cols] for row in kept_rows], dtype=float)

    x = collect("x")
    s = collect("s")
    t = collect("t")
    y = collect("y")
    n = len(kept_rows)
    cohort = Cohort(
        x=x if x is not None else np.zeros((n, 0)),
        s=s,
        t=None if t is None else t[:, 0],
        y=None if y is None else y[:, 0],
        population_tag=population_tag,
        x_names=x_names or None,
        s_names=s_names or None,
    )
    return cohort


def load_cohort_csv(path: str, role_map: Optional[dict] = None,
                    population_tag: str = OBSERVATIONAL) -> Cohort:
    """Read, parse, and validate a cohort file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    cohort = parse_cohort_csv(text, role_map=role_map,
                              population_tag=population_tag)
    validate_cohort(cohort)
    return cohort


# ---------------------------------------------------------------------------
# stratified splitting
# ---------------------------------------------------------------------------

def stratified_split(c: Cohort, fraction: float = 0.7,
                     rng: Optional[RandomSource] = None):
    """Split by treatment arm: round-half-up share of each arm to train."""
    if not 0.0 < fraction < 1.0:
        raise ValueError("split fraction must lie strictly inside (0, 1)")
    if c.t is None:
        raise SingleArmData("stratified split needs a treatment column")
    rng = rng or make_rng(0)
    gen = rng.generator()
    train_idx = []
    test_idx = []
    for arm in (0.0, 1.0):
        members = np.nonzero(c.t == arm)[0]
        if members.shape[0] == 0:
            raise SingleArmData(f"treatment arm {int(arm)} is empty")
        n_train = int(math.floor(fraction * members.shape[0] + 0.5))
        perm = gen.permutation(members)
        train_idx.extend(perm[:n_train])
        test_idx.extend(perm[n_train:])
    return c.take(np.sort(train_idx)), c.take(np.sort(test_idx))


# ---------------------------------------------------------------------------
# experiment configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MethodSpec:
    method_id: str
    options: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ExternalData:
    path: str
    role_map: Optional[dict] = None
    split_fraction: float = 0.7
    split_seed: int = 0
    population: str = EXPERIMENTAL


@dataclass(frozen=True)
class ExperimentConfig:
    methods: tuple
    scenario: Optional[ScenarioSpec] = None
    data: Optional[ExternalData] = None
    n_obs: int = 10_000
    n_trial: int = 10_000
    seeds: tuple = (0,)
    bootstrap_b: int = 2000
    bootstrap_level: float = 0.95
    h_family: str = "gbm"
    sampler: Optional[dict] = None
    out_dir: Optional[str] = None
    formats: tuple = ("csv", "json")
    plots: bool = False

    @staticmethod
    def from_dict(doc: dict) -> "ExperimentConfig":
        try:
            return _config_from_dict(doc)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc


def _config_from_dict(doc: dict) -> ExperimentConfig:
    methods = []
    for entry in doc.get("methods", []):
        if isinstance(entry, str):
            entry = {"id": entry}
        method_id = entry["id"]
        if method_id not in LEARNER_IDS:
            raise ConfigError(f"unknown method identifier {method_id!r}")
        methods.append(MethodSpec(method_id, dict(entry.get("options", {}))))

    scenario = data = None
    if "scenario" in doc:
        scenario = ScenarioSpec.from_dict(doc["scenario"])
    elif "data" in doc:
        block = doc["data"]
        fraction = float(block.get("split_fraction", 0.7))
        if not 0.0 < fraction < 1.0:
            raise ConfigError("split_fraction must lie strictly inside (0, 1)")
        data = ExternalData(
            path=block["path"],
            role_map=block.get("role_map"),
            split_fraction=fraction,
            split_seed=int(block.get("split_seed", 0)),
            population=block.get("population", EXPERIMENTAL),
        )
    else:
        raise ConfigError("config needs a 'scenario' or 'data' block")

    seeds = tuple(int(s) for s in doc.get("seeds", [0]))
    if not seeds:
        raise ConfigError("seeds must be nonempty")
    bootstrap = doc.get("bootstrap", {})
    nuisance = doc.get("nuisance", {})
    output = doc.get("output", {})
    return ExperimentConfig(
        methods=tuple(methods),
        scenario=scenario,
        data=data,
        n_obs=int(doc.get("n_obs", 10_000)),
        n_trial=int(doc.get("n_trial", doc.get("n_obs", 10_000))),
        seeds=seeds,
        bootstrap_b=int(bootstrap.get("B", 2000)),
        bootstrap_level=float(bootstrap.get("level", 0.95)),
        h_family=nuisance.get("h_family", "gbm"),
        sampler=nuisance.get("sampler"),
        out_dir=output.get("dir"),
        formats=tuple(output.get("formats", ("csv", "json"))),
        plots=bool(output.get("plots", False)),
    )


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise IoError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return ExperimentConfig.from_dict(doc)


# ---------------------------------------------------------------------------
# results table
# ---------------------------------------------------------------------------

@dataclass
class ResultsTable:
    rows: list = field(default_factory=list)
    cate_traces: dict = field(default_factory=dict)   # (scenario, method) -> arrays

    def to_csv(self) -> str:
        lines = [",".join(RESULT_COLUMNS)]
        for row in self.rows:
            cells = []
            for col in RESULT_COLUMNS:
                value = row.get(col)
                if value is None:
                    cells.append("")
                elif isinstance(value, float):
                    cells.append(repr(value))
                else:
                    cells.append(str(value))
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_csv(text: str) -> "ResultsTable":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        header = lines[0].split(",")
        rows = []
        for line in lines[1:]:
            cells = line.split(",")
            row = {}
            for col, cell in zip(header, cells):
                if cell == "":
                    row[col] = None
                elif col in ("seed", "runtime_ms", "L", "B"):
                    row[col] = int(cell)
                elif col in ("scenario", "method", "status", "error", "clip"):
                    row[col] = cell
                else:
                    row[col] = float(cell)
            rows.append(row)
        return ResultsTable(rows=rows)

    def to_json(self) -> str:
        return json.dumps({
            "schema_version": SCHEMA_VERSION,
            "meta": {"created_at": datetime.datetime.now(
                datetime.timezone.utc).isoformat()},
            "rows": self.rows,
        }, indent=2)


def scenario_label(spec: ScenarioSpec) -> str:
    label = f"case_{spec.case_id}_{spec.nonlinearity}"
    if spec.unobserved_confounder:
        label += "_confounded"
    for name, value in (("med", spec.med_scale), ("leaf", spec.leaf_scale),
                        ("proxy", spec.proxy_scale)):
        if value != 1.0:
            label += f"_{name}x{value:g}"
    return label


# ---------------------------------------------------------------------------
# the runner
# ---------------------------------------------------------------------------

def _seed_cell(cfg: ExperimentConfig, seed: int):
    """Build (label, treatment/outcome cohort, trial cohort, truth) for one seed."""
    if cfg.scenario is not None:
        spec = replace(cfg.scenario, seed=seed)
        params = sample_scenario_params(spec, make_rng(seed, 101))
        obs, _ = generate_cohort(params, cfg.n_obs, OBSERVATIONAL,
                                 make_rng(seed, 102))
        trial, trial_truth = generate_cohort(params, cfg.n_trial, "trial",
                                             make_rng(seed, 103))
        return scenario_label(spec), obs, trial, trial_truth
    data = cfg.data
    cohort = load_cohort_csv(data.path, role_map=data.role_map,
                             population_tag=data.population)
    train, test = stratified_split(cohort, data.split_fraction,
                                   make_rng(data.split_seed, seed))
    reference_ate = ate_diff_in_means(test.y, test.t)
    label = os.path.splitext(os.path.basename(data.path))[0]
    return label, train, test, reference_ate


def run_experiment(cfg: ExperimentConfig) -> ResultsTable:
    """Execute the config: one results row per (scenario, seed, method).

    Failures of individual cells become error rows; the sweep never aborts.
    """
    table = ResultsTable()
    for seed in cfg.seeds:
        label, obs, trial, truth = _seed_cell(cfg, seed)
        bundle = None
        bundle_error = None
        if any(m.method_id.startswith(("bound_reg", "surrogate_sampling"))
               for m in cfg.methods):
            try:
                bundle = fit_nuisances(obs, obs, h_family=cfg.h_family,
                                       sampler_config=cfg.sampler,
                                       rng=make_rng(seed, 104))
            except Exception as exc:  # noqa: BLE001 - isolate to error rows
                bundle_error = exc

        for i, method in enumerate(cfg.methods):
            row = {col: None for col in RESULT_COLUMNS}
            row.update({
                "scenario": label, "seed": seed, "method": method.method_id,
                "status": "ok", "error": None,
                "l1_strength": float(method.options.get("l1_strength", DEFAULT_L1)),
                "clip": ":".join(f"{v:g}" for v in method.options.get(
                    "clip", DEFAULT_CLIP)),
                "L": int(method.options.get("L", DEFAULT_L)),
                "B": cfg.bootstrap_b,
            })
            start = time.perf_counter()
            try:
                needs_bundle = method.method_id.startswith(
                    ("bound_reg", "surrogate_sampling"))
                if needs_bundle and bundle is None:
                    raise bundle_error
                endpoint = fit_learner(method.method_id, obs, obs,
                                       options=method.options, bundle=bundle,
                                       rng=make_rng(seed, 300 + i))
                values = endpoint.trial_values(trial.x, trial.s)
                ate_hat = ate_diff_in_means(values, trial.t)
                cate = None
                if trial.k >= 1:
                    try:
                        cate = cate_t_learner(trial.x, trial.t, values)
                    except SingleArmData:
                        cate = None
                estimate = EffectEstimate(ate=ate_hat, method_id=method.method_id,
                                          cate=cate)
                report = score(estimate, truth)
                _, lo, hi = bootstrap_ate_ci(
                    values, trial.t, B=cfg.bootstrap_b,
                    level=cfg.bootstrap_level, rng=make_rng(seed, 400 + i))
                row.update({
                    "ate_hat": ate_hat, "mae": report.mae_ate,
                    "r2": report.r2_cate, "pehe": report.pehe,
                    "ci_lo": lo, "ci_hi": hi,
                })
                if cfg.plots and cate is not None and hasattr(truth, "cate"):
                    table.cate_traces[(label, method.method_id)] = (
                        truth.cate.copy(), cate.copy())
            except Exception as exc:  # noqa: BLE001 - per-cell isolation
                code = exc.code if isinstance(exc, SurrkitError) else "crash"
                row["status"] = "error"
                row["error"] = f"{code}: {exc}"
            row["runtime_ms"] = int(round(1000 * (time.perf_counter() - start)))
            table.rows.append(row)
    return table


def emit_results(table: ResultsTable, out_dir: str,
                 formats=("csv", "json"), plots: bool = False) -> list:
    """Write the table (fixed column order) and optional CATE scatter plots."""
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create output dir {out_dir}: {exc}") from exc
    written = []
    try:
        if "csv" in formats:
            path = os.path.join(out_dir, "results.csv")
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(table.to_csv())
            written.append(path)
        if "json" in formats:
            path = os.path.join(out_dir, "results.json")
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(table.to_json())
            written.append(path)
    except OSError as exc:
        raise IoError(f"cannot write results: {exc}") from exc
    if plots and table.cate_traces:
        written.extend(_emit_plots(table, out_dir))
    return written


def _emit_plots(table: ResultsTable, out_dir: str) -> list:
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError as exc:
        raise IoError("plot output requested but matplotlib is unavailable") from exc
    paths = []
    for (label, method), (true_cate, est_cate) in table.cate_traces.items():
        fig, ax = plt.subplots(figsize=(4, 4))
        ax.scatter(true_cate, est_cate, s=4, alpha=0.4)
        lo = min(true_cate.min(), est_cate.min())
        hi = max(true_cate.max(), est_cate.max())
        ax.plot([lo, hi], [lo, hi], lw=1, color="black")
        ax.set_xlabel("true conditional effect")
        ax.set_ylabel("estimated conditional effect")
        ax.set_title(f"{label}: {method}")
        path = os.path.join(out_dir, f"cate_{label}_{method}.png")
        fig.tight_layout()
        fig.savefig(path, dpi=120)
        plt.close(fig)
        paths.append(path)
    return paths


# ---------------------------------------------------------------------------
# oracle property harness (CLI-facing)
# ---------------------------------------------------------------------------

def run_oracle_checks(seed: int, instances: int, out=print) -> bool:
    """Randomized identity and dominance checks; one pass/fail line each."""
    from . import oracle as orc

    root = make_rng(seed)
    ok = True

    def emit(name, passed, detail=""):
        nonlocal ok
        ok = ok and passed
        out(f"[{'PASS' if passed else 'FAIL'}] {name}{': ' + detail if detail else ''}")

    violations = 0
    for i in range(instances):
        m = orc.random_discrete_scm(root.substream(i), case="d")
        f = root.substream(10_000 + i).generator().normal(size=m.n_s)
        risk = orc.exact_risk(m, f)
        if risk > orc.risk_bound(m, f, "w2") + 1e-10:
            violations += 1
        if risk > 2.0 * orc.risk_bound(m, f, "wplus") + 1e-10:
            violations += 1
    emit("risk bound dominance (w2 and 2*wplus)", violations == 0,
         f"{instances} instances")

    worst = 0.0
    for i in range(instances):
        m = orc.random_discrete_scm(root.substream(20_000 + i), case="b")
        tau = orc.exact_effects(m)["tau_y"]
        for kind in (orc.WPLUS, orc.W1, orc.PX_OVER_PXS):
            fstar = orc.exact_weighted_minimizer(m, orc.WeightScheme(kind))
            worst = max(worst, abs(orc.surrogate_ate(m, fstar) - tau))
    emit("confounded-outcome unbiased weights", worst < 1e-9,
         f"max gap {worst:.2e}")

    worst = 0.0
    saw_negative = False
    for i in range(instances):
        m = orc.random_discrete_scm(root.substream(30_000 + i), case="d",
                                    min_pi_bar=1e-3)
        tau = orc.exact_effects(m)["tau_y"]
        fstar = orc.exact_weighted_minimizer(m, orc.WeightScheme(orc.WMINUS))
        worst = max(worst, abs(orc.surrogate_ate(m, fstar) - tau))
        saw_negative = saw_negative or bool(
            orc.weight_table(m, orc.WeightScheme(orc.WMINUS)).min() < 0)
    emit("signed-weight ATE identity", worst < 1e-9, f"max gap {worst:.2e}")
    emit("signed weights can be negative", saw_negative)

    worst = 0.0
    for i in range(instances):
        m = orc.random_linear_discrete_scm(root.substream(40_000 + i))
        _, delta, _ = m.linear
        gen = root.substream(50_000 + i).generator()
        beta_f = gen.normal(size=m.d)
        f = m.s_values @ beta_f + float(gen.normal())
        eff = orc.exact_effects(m)
        closed = orc.linear_risk(delta, beta_f, eff["tau_s_of_x"],
                                 weights=m.p_x * m.n_x)
        worst = max(worst, abs(closed - orc.exact_risk(m, f)))
    emit("linear-case risk identity", worst < 1e-9, f"max gap {worst:.2e}")
    return ok


# ---------------------------------------------------------------------------
# command line
# ---------------------------------------------------------------------------

def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    out_dir = args.out_dir or cfg.out_dir or os.environ.get(OUTPUT_DIR_ENV, "out")
    formats = tuple(args.format) if args.format else cfg.formats
    table = run_experiment(cfg)
    written = emit_results(table, out_dir, formats=formats, plots=cfg.plots)
    for path in written:
        print(path)
    return 0


def _cmd_generate(args) -> int:
    spec = ScenarioSpec(case_id=args.case, nonlinearity=args.nonlinearity,
                        seed=args.seed)
    params = sample_scenario_params(spec, make_rng(args.seed, 101))
    out_dir = args.out or os.environ.get(OUTPUT_DIR_ENV, "out")
    os.makedirs(out_dir, exist_ok=True)
    label = scenario_label(spec)
    for regime, stream in ((OBSERVATIONAL, 102), ("trial", 103)):
        cohort, truth = generate_cohort(params, args.n, regime,
                                        make_rng(args.seed, stream))
        base = os.path.join(out_dir, f"{label}_seed{args.seed}_{regime}")
        with open(base + ".csv", "w", encoding="utf-8") as fh:
            fh.write(cohort_to_csv(cohort))
        with open(base + "_truth.csv", "w", encoding="utf-8") as fh:
            fh.write(truth_to_csv(truth))
        print(base + ".csv")
    return 0


def _cmd_oracle_check(args) -> int:
    return 0 if run_oracle_checks(args.seed, args.instances) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="surrkit",
        description="learn and evaluate plug-in composite surrogate endpoints")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute an experiment config")
    run_p.add_argument("config")
    run_p.add_argument("--out-dir", default=None)
    run_p.add_argument("--format", action="append",
                       choices=["csv", "json"], default=None)
    run_p.set_defaults(fn=_cmd_run)

    gen_p = sub.add_parser("generate", help="write synthetic cohorts to CSV")
    gen_p.add_argument("case", choices=list("abcdef"))
    gen_p.add_argument("--n", type=int, default=10_000)
    gen_p.add_argument("--seed", type=int, default=0)
    gen_p.add_argument("--nonlinearity", choices=["linear", "square"],
                       default="linear")
    gen_p.add_argument("--out", default=None)
    gen_p.set_defaults(fn=_cmd_generate)

    orc_p = sub.add_parser("oracle-check",
                           help="run randomized identity/dominance checks")
    orc_p.add_argument("--seed", type=int, default=0)
    orc_p.add_argument("--instances", type=int, default=200)
    orc_p.set_defaults(fn=_cmd_oracle_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except IoError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
