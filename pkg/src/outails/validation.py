"""Monte Carlo validation harness for the model's limit theorems.

Each suite turns the closed-form predictions into seeded statistical checks:
tail indices of the transformed process (T1), the Spearman perturbation
bound (T2), consistency and asymptotic variance of the sign estimator (T3),
and the exact small-sample moments under independence (T4).  Failures are
data, not errors: every check reports its statistic, target and verdict.

Two checks are known to fail at their nominal settings and are kept for
honesty rather than removed: the left-tail Hill window at the top-2%
threshold (the population Hill value there is ~3.92 because the linear term
still dominates the slow-growth tail; the window presumes a pure
square-exponential tail, reachable only deeper in, cf. the 0.2% companion
check) and the sign-estimator delta-method tolerances at n=1e4 with alpha
k = 1 (sd(p_hat) is ~0.46 of the distance to the domain boundary 1/4, far
outside the asymptotic regime; the companion checks at k=5, n=1e5 pass).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import alpha as al
from .dependence import spearman_perturbation_bound, spearman_rho
from .errors import DomainError
from .ou import OUParams, SamplePath, simulate_stationary
from .rng import RngSeed
from .tails import hill_estimator
from .transform import PaperTransform, apply


@dataclass(frozen=True)
class ValidationBudget:
    """Monte Carlo sizes per suite, capped to keep runs bounded."""

    t1_n: int = 300_000
    t2_constructions: int = 1000
    t2_pairs: int = 2000
    t3_reps: int = 500
    t3_n: int = 10_000
    t3_n_terms: int = 200
    t3_mc_size: int = 4096
    t3_large_reps: int = 400
    t3_large_n: int = 100_000
    t4_reps: int = 10_000
    t4_n: int = 1001

    _CAPS = {
        "t1_n": 5_000_000,
        "t2_constructions": 20_000,
        "t2_pairs": 100_000,
        "t3_reps": 10_000,
        "t3_n": 1_000_000,
        "t3_n_terms": 5_000,
        "t3_mc_size": 1_000_000,
        "t3_large_reps": 10_000,
        "t3_large_n": 1_000_000,
        "t4_reps": 100_000,
        "t4_n": 100_000,
    }

    def __post_init__(self):
        for name, cap in self._CAPS.items():
            value = getattr(self, name)
            if not 1 <= int(value) <= cap:
                raise DomainError(f"budget {name}={value} outside [1, {cap}]")

    @classmethod
    def smoke(cls) -> "ValidationBudget":
        """Small sizes for quick structural runs; verdicts are then noisy."""
        return cls(
            t1_n=20_000,
            t2_constructions=50,
            t2_pairs=500,
            t3_reps=30,
            t3_n=4_000,
            t3_n_terms=20,
            t3_mc_size=256,
            t3_large_reps=30,
            t3_large_n=20_000,
            t4_reps=300,
            t4_n=301,
        )


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    statistic: float
    target: str
    detail: str = ""

    def format_line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        line = f"[{verdict}] {self.name}: statistic={self.statistic:.6g} target={self.target}"
        return line if not self.detail else f"{line} ({self.detail})"

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "statistic": self.statistic,
            "target": self.target,
            "detail": self.detail,
        }


@dataclass(frozen=True)
class ValidationReport:
    suite: str
    checks: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def format_lines(self) -> list[str]:
        return [c.format_line() for c in self.checks]

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
        }


_STANDARD_PARAMS = OUParams(alpha=1.0, tau=math.sqrt(2.0))  # sigma^2 = 1


def _interval_check(name, value, lo, hi, detail="") -> CheckResult:
    return CheckResult(
        name=name,
        passed=bool(lo <= value <= hi),
        statistic=float(value),
        target=f"[{lo}, {hi}]",
        detail=detail,
    )


def check_t1(budget: ValidationBudget, seed: RngSeed) -> list[CheckResult]:
    """Hill estimates on transformed normals against the predicted indices."""
    h = PaperTransform()
    n = budget.t1_n
    g = seed.child_generator(1, 0)
    y = apply(h, g.standard_normal(n))
    right = hill_estimator(y, "right", 2.0).index
    left2 = hill_estimator(y, "left", 2.0).index
    left02 = hill_estimator(y, "left", 0.2).index
    g = seed.child_generator(1, 1)
    rho = math.exp(-1.0)
    z1 = g.standard_normal(n)
    z2 = rho * z1 + math.sqrt(1.0 - rho * rho) * g.standard_normal(n)
    diff = apply(h, z2) - apply(h, z1)
    incr = hill_estimator(diff, "right", 2.0).index
    return [
        _interval_check("t1_right_hill_2pct", right, 2.25, 2.75, "predicted index 2.5"),
        _interval_check(
            "t1_left_hill_2pct",
            left2,
            4.3,
            5.7,
            "known-failing: population Hill value at this threshold is ~3.92, "
            "the linear term still dominates there",
        ),
        _interval_check(
            "t1_left_hill_0.2pct", left02, 4.3, 5.7, "threshold deep enough for the x^2 growth"
        ),
        _interval_check("t1_increment_hill_2pct", incr, 2.2, 2.9, "predicted index 2.5"),
    ]


def check_t2(budget: ValidationBudget, seed: RngSeed) -> list[CheckResult]:
    """Randomized contamination never moves Spearman's rho past the bound."""
    n = budget.t2_pairs
    margin = 5.0 * math.sqrt(2.0 / n)  # sampling allowance on the rho difference
    violations = 0
    worst = -math.inf
    for i in range(budget.t2_constructions):
        g = seed.child_generator(2, i)
        eps1, eps2 = 0.1 * g.random(), 0.1 * g.random()
        rho = g.uniform(-0.9, 0.9)
        z1 = g.standard_normal(n)
        z2 = rho * z1 + math.sqrt(1.0 - rho * rho) * g.standard_normal(n)
        xi = (g.random(n) < eps1) * g.standard_normal(n) * math.exp(g.uniform(-1.0, 2.0))
        eta = (g.random(n) < eps2) * g.standard_normal(n) * math.exp(g.uniform(-1.0, 2.0))
        shift = abs(spearman_rho(z1 + xi, z2 + eta) - spearman_rho(z1, z2))
        bound = spearman_perturbation_bound(eps1, eps2) + margin
        worst = max(worst, shift - bound)
        violations += shift > bound
    return [
        CheckResult(
            name="t2_bound_violations",
            passed=violations == 0,
            statistic=float(violations),
            target="0",
            detail=f"{budget.t2_constructions} constructions, worst margin {worst:+.4f}",
        )
    ]


def _sign_replication(k, n, reps, seed, path_stream) -> np.ndarray:
    h = PaperTransform()
    params = OUParams(alpha=0.05, tau=1.0)
    median = apply(h, 0.0)
    values = np.full(reps, math.nan)
    for r in range(reps):
        x = simulate_stationary(params, n, 1.0, seed.child_generator(path_stream, r))
        est = al.alpha_sign_known_median(SamplePath(0.0, 1.0, apply(h, x.values)), k, median)
        values[r] = est.value
    return values


def _t3_pair(label, k, n, reps, seed, stream, budget, extra="") -> list[CheckResult]:
    values = _sign_replication(k, n, reps, seed, stream)
    finite = values[np.isfinite(values)]
    flagged = values.size - finite.size
    mean = finite.mean()
    se = finite.std(ddof=1) / math.sqrt(finite.size)
    vk = al.asymptotic_variance(
        0.05, k, n_terms=budget.t3_n_terms, mc_size=budget.t3_mc_size,
        rng=RngSeed(seed.seed, seed.stream_id + 1000 + stream),
    )
    p = al.sign_prob(0.05, k)
    g_prime = -2.0 * math.pi / math.tan(2.0 * math.pi * (p - 0.25))
    theory = vk.value * g_prime**2 / (n * k * k)
    ratio = finite.var(ddof=1) / theory
    note = f"{flagged} flagged replicate(s) excluded; {extra}" if extra or flagged else extra
    return [
        CheckResult(
            name=f"t3_mean_{label}",
            passed=bool(abs(mean - 0.05) <= 3.0 * se),
            statistic=float(mean),
            target=f"0.05 within 3 SE = {3 * se:.6f}",
            detail=note.strip("; "),
        ),
        CheckResult(
            name=f"t3_variance_{label}",
            passed=bool(0.85 <= ratio <= 1.15),
            statistic=float(ratio),
            target="[0.85, 1.15]",
            detail=f"v_k^2={vk.value:.4f}+-{vk.std_error:.4f}; {extra}".strip("; "),
        ),
    ]


def check_t3(budget: ValidationBudget, seed: RngSeed) -> list[CheckResult]:
    """Sign-estimator consistency and variance against the asymptotic law."""
    known = (
        "known-failing at these settings: sd(p_hat) is ~0.46 of the distance "
        "to the boundary 1/4, outside the delta-method regime"
    )
    checks = _t3_pair("k20_n1e4", 20, budget.t3_n, budget.t3_reps, seed, 3, budget, extra=known)
    checks += _t3_pair(
        "k5_n1e5", 5, budget.t3_large_n, budget.t3_large_reps, seed, 4, budget,
        extra="asymptotic-regime companion",
    )
    return checks


def check_t4(budget: ValidationBudget, seed: RngSeed) -> list[CheckResult]:
    """Exact small-sample moments of the sign statistics for i.i.d. normals."""
    n, k, reps = budget.t4_n, 20, budget.t4_reps
    p0 = np.empty(reps)
    p_hat = np.empty(reps)
    for r in range(reps):
        g = seed.child_generator(5, r)
        path = SamplePath(0.0, 1.0, g.standard_normal(n))
        p0[r] = al.alpha_sign_known_median(path, k, 0.0).diagnostics["p_hat"]
        p_hat[r] = al.alpha_sign_empirical_median(path, k).diagnostics["p_hat"]
    mom = al.theorem4_moments(n, k)
    se0 = p0.std(ddof=1) / math.sqrt(reps)
    ratio0 = p0.var(ddof=1) / mom.var_p0
    ratio1 = p_hat.var(ddof=1) / mom.var_p
    rmse_ratio = math.sqrt(np.mean((p0 - 0.25) ** 2) / np.mean((p_hat - 0.25) ** 2))
    return [
        CheckResult(
            name="t4_mean_p0",
            passed=bool(abs(p0.mean() - 0.25) <= 3.0 * se0),
            statistic=float(p0.mean()),
            target=f"0.25 within 3 SE = {3 * se0:.6f}",
        ),
        _interval_check("t4_var_p0_ratio", ratio0, 0.95, 1.05, f"exact var {mom.var_p0:.6g}"),
        _interval_check("t4_var_p_ratio", ratio1, 0.90, 1.10, f"leading-order var {mom.var_p:.6g}"),
        _interval_check(
            "t4_rmse_ratio",
            rmse_ratio,
            math.sqrt(5.0) * 0.9,
            math.sqrt(5.0) * 1.1,
            "independent-case limit sqrt(5)",
        ),
    ]


_SUITES = {"T1": check_t1, "T2": check_t2, "T3": check_t3, "T4": check_t4}


def validate_theorems(suite: str = "ALL", budget: ValidationBudget | None = None,
                      seed: RngSeed = RngSeed(0)) -> ValidationReport:
    """Run the requested oracle suite and report per-check verdicts.

    Per-check sub-seeds depend only on the check, so a suite's results are
    identical whether run alone or as part of ``ALL``.
    """
    suite = suite.upper()
    if suite != "ALL" and suite not in _SUITES:
        raise DomainError(f"unknown suite {suite!r}; choose from T1, T2, T3, T4, ALL")
    budget = budget or ValidationBudget()
    names = list(_SUITES) if suite == "ALL" else [suite]
    checks: list[CheckResult] = []
    for name in names:
        checks.extend(_SUITES[name](budget, seed))
    return ValidationReport(suite=suite, checks=tuple(checks))
