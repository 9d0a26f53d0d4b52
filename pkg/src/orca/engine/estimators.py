"""Treatment-effect estimators: adjusted OLS and propensity-score methods.

A dataset here is a plain mapping from column name to a 1-d float array; all
columns must share one length. Every stochastic step (bootstrap resampling)
is driven by a single integer seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.stats import norm

from ..errors import (
    EmptyArm,
    InsufficientRows,
    NonBinaryTreatment,
    Nonconvergence,
    SingularDesign,
)

Dataset = Mapping[str, np.ndarray]

PROPENSITY_CLIP = (0.01, 0.99)
DEFAULT_BOOTSTRAP = 500
N_STRATA = 5

LINEAR = "linear_regression"
MATCHING = "propensity_matching"
STRATIFICATION = "propensity_stratification"
WEIGHTING = "propensity_weighting"
ESTIMATION_METHODS = (LINEAR, MATCHING, STRATIFICATION, WEIGHTING)
PROPENSITY_METHODS = (MATCHING, STRATIFICATION, WEIGHTING)


@dataclass(frozen=True)
class EffectEstimate:
    ate: float
    ci_low: float
    ci_high: float
    n_used: int
    method: str
    ci_level: float = 0.95
    diagnostics: dict[str, float] = field(default_factory=dict)

    def covers(self, value: float) -> bool:
        return self.ci_low <= value <= self.ci_high

    def halfwidth(self) -> float:
        return (self.ci_high - self.ci_low) / 2.0


def _column_matrix(dataset: Dataset, names: Sequence[str]) -> np.ndarray:
    cols = [np.asarray(dataset[name], dtype=float) for name in names]
    if not cols:
        n = len(next(iter(dataset.values())))
        return np.empty((n, 0))
    return np.column_stack(cols)


def _design(dataset: Dataset, treatment: str, adjustment: Sequence[str]) -> np.ndarray:
    t = np.asarray(dataset[treatment], dtype=float)
    z = _column_matrix(dataset, adjustment)
    return np.column_stack([np.ones_like(t), t, z])


def estimate_linear(
    dataset: Dataset,
    treatment: str,
    outcome: str,
    adjustment: Sequence[str],
    ci_level: float = 0.95,
) -> EffectEstimate:
    """OLS of the outcome on [intercept, treatment, adjustment covariates].

    The treatment coefficient is the effect estimate; its CI uses the
    coefficient standard error with a normal critical value.
    """
    adjustment = sorted(adjustment)
    y = np.asarray(dataset[outcome], dtype=float)
    x = _design(dataset, treatment, adjustment)
    n, p = x.shape
    if n <= len(adjustment) + 2:
        raise InsufficientRows(f"n={n} rows for {len(adjustment)} covariates")

    q, r = np.linalg.qr(x)
    diag = np.abs(np.diag(r))
    if diag.min() <= max(n, p) * np.finfo(float).eps * diag.max():
        raise SingularDesign("design matrix is rank deficient (collinear columns)")
    beta = np.linalg.solve(r, q.T @ y)

    residuals = y - x @ beta
    dof = n - p
    sigma2 = float(residuals @ residuals) / dof
    r_inv = np.linalg.solve(r, np.eye(p))
    cov = sigma2 * (r_inv @ r_inv.T)
    se = float(np.sqrt(cov[1, 1]))
    crit = float(norm.ppf(0.5 + ci_level / 2.0))
    ate = float(beta[1])
    return EffectEstimate(
        ate=ate,
        ci_low=ate - crit * se,
        ci_high=ate + crit * se,
        n_used=n,
        method=LINEAR,
        ci_level=ci_level,
        diagnostics={"se": se, "sigma2": sigma2, "dof": float(dof)},
    )


# --- propensity scores ---------------------------------------------------------


@dataclass(frozen=True)
class PropensityFit:
    scores: np.ndarray  # clipped to PROPENSITY_CLIP
    coef: np.ndarray
    iterations: int
    grad_norm: float
    raw_min: float
    raw_max: float


def _check_binary(t: np.ndarray) -> None:
    values = np.unique(t)
    if not np.all(np.isin(values, (0.0, 1.0))):
        raise NonBinaryTreatment(f"treatment values {values.tolist()} are not 0/1")


def fit_propensity(
    dataset: Dataset,
    treatment: str,
    adjustment: Sequence[str],
    max_iter: int = 200,
    tol: float = 1e-6,
) -> PropensityFit:
    """Logistic regression of treatment on covariates via Newton/IRLS.

    Stops when the score-vector norm drops below ``tol``; hitting the
    iteration cap with the norm still above 1e-3 raises Nonconvergence
    (milder residual gradients, as with separable data, are accepted).
    Fitted probabilities are clipped to [0.01, 0.99].
    """
    t = np.asarray(dataset[treatment], dtype=float)
    _check_binary(t)
    x = np.column_stack(
        [np.ones_like(t), _column_matrix(dataset, sorted(adjustment))]
    )
    beta = np.zeros(x.shape[1])
    grad_norm = np.inf
    iterations = 0
    for iterations in range(1, max_iter + 1):
        eta = x @ beta
        p = 1.0 / (1.0 + np.exp(-np.clip(eta, -35, 35)))
        grad = x.T @ (t - p)
        grad_norm = float(np.linalg.norm(grad))
        if grad_norm < tol:
            break
        w = np.clip(p * (1.0 - p), 1e-10, None)
        hessian = (x * w[:, None]).T @ x
        hessian[np.diag_indices_from(hessian)] += 1e-10
        try:
            beta = beta + np.linalg.solve(hessian, grad)
        except np.linalg.LinAlgError:
            raise Nonconvergence("singular Hessian in propensity fit") from None
    else:
        if grad_norm > 1e-3:
            raise Nonconvergence(
                f"propensity fit gradient norm {grad_norm:.3g} after {max_iter} steps"
            )
    raw = 1.0 / (1.0 + np.exp(-np.clip(x @ beta, -35, 35)))
    scores = np.clip(raw, *PROPENSITY_CLIP)
    return PropensityFit(
        scores=scores,
        coef=beta,
        iterations=iterations,
        grad_norm=grad_norm,
        raw_min=float(raw.min()),
        raw_max=float(raw.max()),
    )


def _ipw_hajek(y: np.ndarray, t: np.ndarray, scores: np.ndarray) -> float:
    """Self-normalized inverse-propensity-weighted mean difference."""
    w1 = t / scores
    w0 = (1.0 - t) / (1.0 - scores)
    return float((w1 @ y) / w1.sum() - (w0 @ y) / w0.sum())


def _stratified(
    y: np.ndarray, t: np.ndarray, scores: np.ndarray
) -> tuple[float, int]:
    """Five equal-frequency score strata, size-weighted mean difference.

    Returns (estimate, strata dropped for having an empty arm).
    """
    order = np.argsort(scores, kind="stable")
    strata = np.array_split(order, N_STRATA)
    total = 0.0
    used = 0
    dropped = 0
    for idx in strata:
        ts = t[idx]
        if ts.sum() == 0 or ts.sum() == len(idx):
            dropped += 1
            continue
        ys = y[idx]
        diff = ys[ts == 1].mean() - ys[ts == 0].mean()
        total += diff * len(idx)
        used += len(idx)
    if used == 0:
        raise EmptyArm("every propensity stratum lacks a treatment arm")
    return total / used, dropped


def _matched(y: np.ndarray, t: np.ndarray, scores: np.ndarray) -> float:
    """1-nearest-neighbor matching on the score, with replacement.

    Distance ties break toward the lower score, then the lower original
    index, so matching is deterministic.
    """
    estimates = np.empty(len(y))
    for arm in (0.0, 1.0):
        take = t == arm
        pool = np.flatnonzero(~take)
        pool_scores = scores[~take]
        order = np.lexsort((pool, pool_scores))
        sorted_scores = pool_scores[order]
        sorted_idx = pool[order]
        pos = np.searchsorted(sorted_scores, scores[take])
        left = np.clip(pos - 1, 0, len(sorted_scores) - 1)
        right = np.clip(pos, 0, len(sorted_scores) - 1)
        d_left = np.abs(scores[take] - sorted_scores[left])
        d_right = np.abs(scores[take] - sorted_scores[right])
        chosen = np.where(d_left <= d_right, left, right)
        matched_y = y[sorted_idx[chosen]]
        if arm == 1.0:
            estimates[take] = y[take] - matched_y
        else:
            estimates[take] = matched_y - y[take]
    return float(estimates.mean())


def _point_estimate(
    y: np.ndarray,
    t: np.ndarray,
    x_adjust: np.ndarray,
    variant: str,
) -> tuple[float, dict[str, float]]:
    names = [f"z{i}" for i in range(x_adjust.shape[1])]
    data = {"__t": t, **{name: x_adjust[:, i] for i, name in enumerate(names)}}
    fit = fit_propensity(data, "__t", names)
    diagnostics = {
        "propensity_min": fit.raw_min,
        "propensity_max": fit.raw_max,
    }
    if variant == WEIGHTING:
        return _ipw_hajek(y, t, fit.scores), diagnostics
    if variant == STRATIFICATION:
        estimate, dropped = _stratified(y, t, fit.scores)
        diagnostics["strata_dropped"] = float(dropped)
        diagnostics["strata_used"] = float(N_STRATA - dropped)
        return estimate, diagnostics
    if variant == MATCHING:
        return _matched(y, t, fit.scores), diagnostics
    raise ValueError(f"unknown propensity variant {variant!r}")


def estimate_propensity(
    dataset: Dataset,
    treatment: str,
    outcome: str,
    adjustment: Sequence[str],
    variant: str,
    seed: int = 0,
    n_boot: int = DEFAULT_BOOTSTRAP,
    ci_level: float = 0.95,
) -> EffectEstimate:
    """Propensity-score effect estimate with a seeded percentile bootstrap.

    ``variant`` is one of weighting (self-normalized IPW), stratification
    (five equal-frequency strata), or matching (1-NN with replacement). The
    propensity model is refit inside every bootstrap resample. The reported
    interval is widened, if needed, to bracket the point estimate.
    """
    adjustment = sorted(adjustment)
    y = np.asarray(dataset[outcome], dtype=float)
    t = np.asarray(dataset[treatment], dtype=float)
    _check_binary(t)
    if t.sum() == 0 or t.sum() == len(t):
        raise EmptyArm("dataset contains a single treatment arm")
    x_adjust = _column_matrix(dataset, adjustment)
    n = len(y)

    ate, diagnostics = _point_estimate(y, t, x_adjust, variant)

    rng = np.random.default_rng(seed)
    indices = rng.integers(0, n, size=(n_boot, n))
    draws = []
    failures = 0
    for row in indices:
        try:
            est, _ = _point_estimate(y[row], t[row], x_adjust[row], variant)
            draws.append(est)
        except (EmptyArm, Nonconvergence, np.linalg.LinAlgError):
            failures += 1
    if not draws:
        raise Nonconvergence("every bootstrap resample failed")
    alpha = (1.0 - ci_level) / 2.0
    lo, hi = np.percentile(draws, [100 * alpha, 100 * (1 - alpha)])
    diagnostics["bootstrap_failures"] = float(failures)
    diagnostics["bootstrap_draws"] = float(len(draws))
    return EffectEstimate(
        ate=ate,
        ci_low=min(float(lo), ate),
        ci_high=max(float(hi), ate),
        n_used=n,
        method=variant,
        ci_level=ci_level,
        diagnostics=diagnostics,
    )


def estimate_effect(
    dataset: Dataset,
    treatment: str,
    outcome: str,
    adjustment: Sequence[str],
    method: str,
    seed: int = 0,
    n_boot: int = DEFAULT_BOOTSTRAP,
) -> EffectEstimate:
    """Dispatch to the named estimation method."""
    if method == LINEAR:
        return estimate_linear(dataset, treatment, outcome, adjustment)
    if method in PROPENSITY_METHODS:
        return estimate_propensity(
            dataset, treatment, outcome, adjustment, method, seed=seed, n_boot=n_boot
        )
    raise ValueError(f"unknown estimation method {method!r}")
