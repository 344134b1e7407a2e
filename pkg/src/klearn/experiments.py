"""Seeded experiment drivers behind ``klearn experiment``.

Each trial gets a sub-seed derived from ``(seed, n, trial)`` so any single
trial can be re-run in isolation and results do not depend on scheduling.
"""

from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Callable

import numpy as np

from ._rng import derive_seed
from .conditions import impossibility_thm13
from .distribution import (
    DEFAULT_CAP,
    enumerate_gibbs,
    sample_exact,
    sample_exact_many,
    sample_rejection,
    total_variation,
)
from .errors import InvalidParameterError, KlearnError
from .estimator import EstimatorConfig, Status, classify, estimate, estimate_from_classification
from .formula import Assignment, Formula, random_bounded_formula
from .gadgets import build_psi0, build_psi1, build_psi2, build_psi3

PRESETS = {
    # Flippable-rich monotone family used for the scaling check.
    "monotone": dict(k=5, d=3, beta_star=0.5, B=2.0),
    # Inside the strict learnability regime: disjoint 13-clauses, near-uniform weights.
    "strict": dict(k=13, d=1, beta_star=0.0, B=0.05),
}


@dataclass
class ExperimentConfig:
    kind: str = "consistency"
    n_grid: list[int] = field(default_factory=lambda: [64, 128, 256, 512])
    k: int = 5
    d: int = 3
    beta_star: float = 0.5
    B: float = 2.0
    trials: int = 200
    seed: int = 0
    sampler: str = "rejection"
    output_path: str | None = None
    format: str = "csv"
    # consistency
    clause_count: int | None = None  # default: floor(n d / k)
    monotone: bool = True
    epsilon: float | None = 1e-6  # None means the estimator default n^-1/2
    max_attempts: int = 1_000_000
    jobs: int = 1
    timing: bool = False
    cap: int = DEFAULT_CAP
    # impossibility
    variant: str = "psi0"
    b: float = 2.0
    beta_pair: tuple[float, float] = (3.0, 4.0)

    def validate(self) -> None:
        if self.kind not in ("consistency", "impossibility"):
            raise InvalidParameterError(f"unknown experiment kind {self.kind!r}")
        if self.trials < 1:
            raise InvalidParameterError("trials must be >= 1")
        if not self.n_grid:
            raise InvalidParameterError("n_grid must be non-empty")
        if self.sampler not in ("exact", "rejection"):
            raise InvalidParameterError(f"unknown sampler {self.sampler!r}")
        if self.format not in ("csv", "json"):
            raise InvalidParameterError(f"unknown format {self.format!r}")
        if self.seed < 0:
            raise InvalidParameterError("seed must be non-negative")
        if (self.sampler == "exact" or self.kind == "impossibility") and max(self.n_grid) > self.cap:
            raise InvalidParameterError(f"exact enumeration needs every n <= {self.cap}")


@dataclass
class TrialRecord:
    n: int
    trial: int
    beta_star: float
    beta_hat: float | None
    status: str
    abs_error: float | None
    flippable_total: int | None
    attempts: int | None
    wall_time_ms: float | None


TRIAL_FIELDS = [f.name for f in fields(TrialRecord)]
SUMMARY_FIELDS = ["n", "trials", "root_found", "failed", "median_abs_error", "p90_abs_error"]


def monotone_family(n: int, config: ExperimentConfig, seed: int) -> Formula:
    m = config.clause_count if config.clause_count is not None else n * config.d // config.k
    return random_bounded_formula(n, config.k, config.d, m, seed, monotone=config.monotone)


def run_trial(config: ExperimentConfig, n: int, trial: int, family: Callable | None = None) -> TrialRecord:
    started = time.perf_counter()
    sub = derive_seed(config.seed, n, trial)
    family = family or monotone_family
    try:
        formula = family(n, config, derive_seed(sub, 0))
        if config.sampler == "exact":
            report = sample_exact(enumerate_gibbs(formula, config.beta_star, config.cap), derive_seed(sub, 1))
        else:
            report = sample_rejection(formula, config.beta_star, derive_seed(sub, 1), config.max_attempts)
        result = estimate(formula, report.assignment, EstimatorConfig(config.B, config.epsilon))
    except KlearnError as exc:
        return TrialRecord(n, trial, config.beta_star, None, f"Failed:{type(exc).__name__}", None, None,
                           getattr(exc, "attempts", None), _elapsed(started, config))
    return TrialRecord(
        n, trial, config.beta_star, result.beta_hat, result.status.value,
        abs(result.beta_hat - config.beta_star), result.classification.flippable_total,
        report.attempts, _elapsed(started, config),
    )


def _elapsed(started: float, config: ExperimentConfig) -> float | None:
    return round(1000 * (time.perf_counter() - started), 3) if config.timing else None


def _run_trial_star(args):
    return run_trial(*args)


def run_consistency(config: ExperimentConfig, family: Callable | None = None) -> list[TrialRecord]:
    """Sample at ``beta_star``, estimate, and record one row per (n, trial)."""
    config.validate()
    tasks = [(config, n, t, family) for n in config.n_grid for t in range(config.trials)]
    if config.jobs > 1:
        with ProcessPoolExecutor(config.jobs) as pool:
            records = list(pool.map(_run_trial_star, tasks, chunksize=16))
    else:
        records = [run_trial(*task) for task in tasks]
    records.sort(key=lambda r: (config.n_grid.index(r.n), r.trial))
    return records


def summarize(records: list[TrialRecord]) -> list[dict]:
    rows = []
    for n in dict.fromkeys(r.n for r in records):
        group = [r for r in records if r.n == n]
        errors = np.array([r.abs_error for r in group if r.abs_error is not None])
        rows.append({
            "n": n,
            "trials": len(group),
            "root_found": sum(r.status == Status.ROOT_FOUND.value for r in group),
            "failed": sum(r.status.startswith("Failed") for r in group),
            "median_abs_error": float(np.median(errors)) if errors.size else None,
            "p90_abs_error": float(np.percentile(errors, 90)) if errors.size else None,
        })
    return rows


def _csv(rows: list[dict], header: list[str]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=header, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({key: ("" if row.get(key) is None else row[key]) for key in header})
    return buf.getvalue()


def render_consistency(records: list[TrialRecord], fmt: str) -> tuple[str, str]:
    """Return (trial table, summary table) as text in ``fmt``."""
    trials = [asdict(r) for r in records]
    summary = summarize(records)
    if fmt == "json":
        return json.dumps(trials, indent=1) + "\n", json.dumps(summary, indent=1) + "\n"
    return _csv(trials, TRIAL_FIELDS), _csv(summary, SUMMARY_FIELDS)


# -- impossibility -------------------------------------------------------------

IMPOSSIBILITY_FIELDS = [
    "n", "k", "variant", "beta_star", "degree", "clauses", "p_all_true", "p_all_false",
    "concentration_bound", "beta1", "beta2", "total_variation", "samples",
    "NonIdentifiable", "RootFound", "ClampedLow", "ClampedHigh", "jstar", "verified",
]


def build_gadget(variant: str, n: int, k: int, b: float, seed: int, cap: int = DEFAULT_CAP):
    """Return (formula, extra report fields) for a named gadget variant."""
    if variant == "psi0":
        return build_psi0(n, k), {}
    if variant == "psi1":
        return build_psi1(n, k), {}
    if variant in ("psi2", "psi3"):
        builder = build_psi2 if variant == "psi2" else build_psi3
        spec, formula = builder(n, k, b, seed, "verified", cap)
        return formula, {"jstar": spec.j_star, "verified": spec.verified}
    raise InvalidParameterError(f"unknown gadget variant {variant!r}")


def run_impossibility(config: ExperimentConfig) -> list[dict]:
    """Exact concentration, total variation and estimator outcomes on a gadget."""
    config.validate()
    rows = []
    for n in config.n_grid:
        formula, extra = build_gadget(config.variant, n, config.k, config.b, derive_seed(config.seed, n), config.cap)
        table = enumerate_gibbs(formula, config.beta_star, config.cap)
        beta1, beta2 = config.beta_pair
        statuses = {s.value: 0 for s in Status}
        cache: dict[Assignment, Status] = {}
        est_config = EstimatorConfig(config.B, config.epsilon)
        for report in sample_exact_many(table, derive_seed(config.seed, n, 1), config.trials):
            if report.assignment not in cache:
                cache[report.assignment] = estimate_from_classification(classify(formula, report.assignment), est_config).status
            statuses[cache[report.assignment].value] += 1
        bound = None
        isolated_sign = {"psi0": 1, "psi1": -1}.get(config.variant, 0)
        if isolated_sign * config.beta_star > 0 and impossibility_thm13(formula.d, config.k, config.beta_star).holds:
            bound = 1.0 / (1.0 + 2.0 ** -n)
        rows.append({
            "n": n,
            "k": config.k,
            "variant": config.variant,
            "beta_star": config.beta_star,
            "degree": formula.max_degree,
            "clauses": formula.m,
            "p_all_true": table.probability(Assignment.all_true(n)),
            "p_all_false": table.probability(Assignment.all_false(n)),
            "concentration_bound": bound,
            "beta1": beta1,
            "beta2": beta2,
            "total_variation": total_variation(formula, beta1, beta2, config.cap),
            "samples": config.trials,
            **statuses,
            "jstar": extra.get("jstar"),
            "verified": extra.get("verified"),
        })
    return rows


def render_impossibility(rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(rows, indent=1) + "\n"
    return _csv(rows, IMPOSSIBILITY_FIELDS)
