"""Disparity statistics: logistic regression, proportion tests, matching.

The regression is fit by iteratively reweighted least squares with
step-halving, standard errors from the inverse Fisher information at the
optimum. Matching is greedy nearest-neighbor Mahalanobis 1:1 without
replacement; the caliper is applied as a post-filter on the greedy pairing
(pairs whose distance exceeds caliper x SD of all candidate distances are
discarded), which makes n_matched monotone under caliper shrinking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats as sp_stats

from .corpus import Corpus, SegmentFeatures, Speaker

# coefficients beyond this magnitude indicate (quasi-)complete separation
SEPARATION_COEF_LIMIT = 30.0

COVARIATES = (
    "intercept",
    "has_aphasia",
    "nonvocal_duration_s",
    "nonvocal_share",
    "average_word_speed",
    "word_count",
    "is_female",
    "age",
    "age_squared",
    "race_african_american",
    "race_other",
    "years_education",
    "english_first_language",
    "no_vision_loss",
    "no_hearing_loss",
)

# covariates that require speaker demographics to be present
_DEMOGRAPHIC_COVARIATES = {
    "is_female",
    "age",
    "age_squared",
    "race_african_american",
    "race_other",
    "years_education",
    "english_first_language",
    "no_vision_loss",
    "no_hearing_loss",
}


class StatsError(Exception):
    """Design-matrix or fitting failure with a named cause."""


@dataclass(frozen=True)
class RegressionSpec:
    covariates: tuple[str, ...]
    tolerance: float = 1e-8
    max_iterations: int = 50
    name: str = "hallucination"

    def __post_init__(self) -> None:
        cov = tuple(self.covariates)
        if "intercept" not in cov:
            cov = ("intercept",) + cov
            object.__setattr__(self, "covariates", cov)
        if len(set(cov)) != len(cov):
            raise ValueError("duplicate covariates in regression spec")
        unknown = set(cov) - set(COVARIATES)
        if unknown:
            raise ValueError(f"unknown covariates: {sorted(unknown)}")
        if "age_squared" in cov and "age" not in cov:
            raise ValueError("age_squared requires age")


@dataclass(frozen=True)
class Coefficient:
    name: str
    estimate: float
    standard_error: float


@dataclass(frozen=True)
class RegressionResult:
    coefficients: tuple[Coefficient, ...]
    log_likelihood: float
    aic: float
    n_observations: int
    converged: bool
    iterations: int
    separation_warning: bool = False

    def coefficient(self, name: str) -> Coefficient:
        for c in self.coefficients:
            if c.name == name:
                return c
        raise KeyError(name)


@dataclass(frozen=True)
class DesignMatrix:
    X: np.ndarray
    y: np.ndarray
    segment_ids: tuple[str, ...]
    columns: tuple[str, ...]
    dropped_missing: int


def covariate_value(
    name: str, speaker: Speaker, features: SegmentFeatures
) -> float:
    if name == "intercept":
        return 1.0
    if name == "has_aphasia":
        return 1.0 if speaker.group == "aphasia" else 0.0
    if name == "nonvocal_duration_s":
        if features.nonvocal_duration is None:
            raise StatsError(f"segment '{features.segment_id}': nonvocal_duration unset")
        return features.nonvocal_duration
    if name == "nonvocal_share":
        if features.nonvocal_share is None:
            raise StatsError(f"segment '{features.segment_id}': nonvocal_share unset")
        return features.nonvocal_share
    if name == "average_word_speed":
        return features.average_word_speed
    if name == "word_count":
        return float(features.word_count)
    if name == "is_female":
        return 1.0 if speaker.gender == "female" else 0.0
    if name == "age":
        return float(speaker.age)  # type: ignore[arg-type]
    if name == "age_squared":
        return float(speaker.age) ** 2  # type: ignore[arg-type]
    if name == "race_african_american":
        return 1.0 if speaker.race == "african_american" else 0.0
    if name == "race_other":
        return 1.0 if speaker.race == "other" else 0.0
    if name == "years_education":
        return float(speaker.years_education)  # type: ignore[arg-type]
    if name == "english_first_language":
        return 1.0 if speaker.english_first_language else 0.0
    if name == "no_vision_loss":
        return 1.0 if speaker.vision_normal else 0.0
    if name == "no_hearing_loss":
        return 1.0 if speaker.hearing_normal else 0.0
    raise StatsError(f"unknown covariate '{name}'")


def design_matrix(
    corpus: Corpus,
    features: dict[str, SegmentFeatures],
    confirmed_segment_ids: set[str],
    spec: RegressionSpec,
) -> DesignMatrix:
    """Build (X, y) for the hallucination-indicator regression.

    y is 1 iff the segment has a confirmed hallucination candidate. Rows
    whose speaker is missing any requested demographic covariate are
    dropped and counted. Row order is sorted by segment_id.
    """
    needs_demographics = bool(set(spec.covariates) & _DEMOGRAPHIC_COVARIATES)
    rows: list[list[float]] = []
    ids: list[str] = []
    dropped = 0
    for segment_id in corpus.segment_ids():
        speaker = corpus.speakers[corpus.segments[segment_id].speaker_id]
        if needs_demographics and not speaker.has_demographics():
            dropped += 1
            continue
        feats = features[segment_id]
        rows.append([covariate_value(c, speaker, feats) for c in spec.covariates])
        ids.append(segment_id)
    if not rows:
        raise StatsError("design matrix empty after dropping rows with missing demographics")

    X = np.asarray(rows, dtype=np.float64)
    y = np.asarray([1.0 if s in confirmed_segment_ids else 0.0 for s in ids])
    for j, name in enumerate(spec.covariates):
        if name == "intercept":
            continue
        if float(np.var(X[:, j])) == 0.0:
            raise StatsError(f"covariate '{name}' is constant (zero variance)")
    return DesignMatrix(X, y, tuple(ids), tuple(spec.covariates), dropped)


def _log_likelihood(X: np.ndarray, y: np.ndarray, beta: np.ndarray) -> float:
    eta = X @ beta
    # log(1 + e^eta) computed stably
    return float(y @ eta - np.sum(np.logaddexp(0.0, eta)))


def fit_logistic(
    X: np.ndarray,
    y: np.ndarray,
    spec: RegressionSpec | None = None,
    columns: tuple[str, ...] | None = None,
) -> RegressionResult:
    """Maximum-likelihood logistic fit by IRLS with step-halving.

    Standard errors come from the inverse Fisher information at the
    optimum. Convergence means the max absolute coefficient change fell
    below the tolerance within max_iterations. Coefficients larger than
    SEPARATION_COEF_LIMIT in magnitude raise the separation warning
    instead of being silently returned.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n, k = X.shape
    if n <= k:
        raise StatsError(f"need more observations ({n}) than coefficients ({k})")
    if np.linalg.matrix_rank(X) < k:
        raise StatsError("design matrix is rank deficient")
    tolerance = spec.tolerance if spec else 1e-8
    max_iterations = spec.max_iterations if spec else 50
    names = columns or (spec.covariates if spec else tuple(f"x{j}" for j in range(k)))

    beta = np.zeros(k)
    ll = _log_likelihood(X, y, beta)
    converged = False
    iterations = 0
    for iterations in range(1, max_iterations + 1):
        eta = X @ beta
        p = 1.0 / (1.0 + np.exp(-np.clip(eta, -700, 700)))
        w = np.clip(p * (1.0 - p), 1e-10, None)
        z = eta + (y - p) / w
        Xw = X * w[:, None]
        try:
            beta_new = np.linalg.solve(X.T @ Xw, X.T @ (w * z))
        except np.linalg.LinAlgError as exc:
            raise StatsError(f"IRLS normal equations singular: {exc}") from exc

        # step-halve toward the current iterate if the likelihood drops
        ll_new = _log_likelihood(X, y, beta_new)
        halvings = 0
        while ll_new < ll - 1e-12 and halvings < 30:
            beta_new = 0.5 * (beta + beta_new)
            ll_new = _log_likelihood(X, y, beta_new)
            halvings += 1

        delta = float(np.max(np.abs(beta_new - beta)))
        beta, ll = beta_new, ll_new
        if delta < tolerance:
            converged = True
            break

    eta = X @ beta
    p = 1.0 / (1.0 + np.exp(-np.clip(eta, -700, 700)))
    w = np.clip(p * (1.0 - p), 1e-10, None)
    fisher = X.T @ (X * w[:, None])
    try:
        covariance = np.linalg.inv(fisher)
        ses = np.sqrt(np.clip(np.diag(covariance), 0.0, None))
    except np.linalg.LinAlgError:
        ses = np.full(k, float("nan"))

    separation = bool(np.any(np.abs(beta) > SEPARATION_COEF_LIMIT))
    coefficients = tuple(
        Coefficient(name, float(b), float(se)) for name, b, se in zip(names, beta, ses)
    )
    return RegressionResult(
        coefficients=coefficients,
        log_likelihood=ll,
        aic=2.0 * k - 2.0 * ll,
        n_observations=n,
        converged=converged,
        iterations=iterations,
        separation_warning=separation,
    )


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    method: str


def two_proportion_test(
    x1: int, n1: int, x2: int, n2: int, method: str = "z"
) -> TestResult:
    """Two-sided pooled test of equal proportions.

    method="z" is the pooled z-test; method="chi2" is the equivalent
    chi-square variant (identical p-value, squared statistic).
    """
    if n1 <= 0 or n2 <= 0:
        raise ValueError("both samples need at least one trial")
    if not (0 <= x1 <= n1 and 0 <= x2 <= n2):
        raise ValueError("successes must lie in [0, trials]")

    p1, p2 = x1 / n1, x2 / n2
    pooled = (x1 + x2) / (n1 + n2)
    se = math.sqrt(pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2))
    if se == 0.0:
        z = 0.0
        p_value = 1.0
    else:
        z = (p1 - p2) / se
        p_value = math.erfc(abs(z) / math.sqrt(2.0))

    if method == "z":
        return TestResult(z, p_value, "two-sided pooled two-proportion z-test")
    if method == "chi2":
        chi2 = z * z
        p_chi = float(sp_stats.chi2.sf(chi2, df=1)) if se > 0 else 1.0
        return TestResult(chi2, p_chi, "chi-square test of equal proportions")
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True)
class MatchSpec:
    covariates: tuple[str, ...] = ()
    caliper: float = 0.20

    def __post_init__(self) -> None:
        if self.caliper <= 0:
            raise ValueError("caliper must be > 0")


@dataclass(frozen=True)
class MatchedPair:
    treated_index: int
    control_index: int
    distance: float


@dataclass(frozen=True)
class MatchResult:
    pairs: tuple[MatchedPair, ...]
    n_matched: int
    smd_before: dict[str, float]
    smd_after: dict[str, float]
    caliper_distance: float
    ridge_applied: bool


def _smd(
    treated: np.ndarray, control: np.ndarray, denominators: np.ndarray
) -> np.ndarray:
    diff = treated.mean(axis=0) - control.mean(axis=0)
    out = np.zeros_like(diff)
    nonzero = denominators > 0
    out[nonzero] = diff[nonzero] / denominators[nonzero]
    # zero denominator with zero difference is balanced by definition
    out[~nonzero & (diff != 0)] = np.inf
    return out


def mahalanobis_match(
    treated: np.ndarray, control: np.ndarray, spec: MatchSpec
) -> MatchResult:
    """Greedy 1:1 Mahalanobis matching without replacement.

    Treated units are processed hardest-first (descending distance to
    their nearest control); each takes its nearest still-available
    control. The caliper then discards pairs whose distance exceeds
    spec.caliper x SD of all treated-control distances. Standardized mean
    differences use the full-sample pooled SD as denominator before and
    after, so they are comparable.
    """
    treated = np.atleast_2d(np.asarray(treated, dtype=np.float64))
    control = np.atleast_2d(np.asarray(control, dtype=np.float64))
    if treated.shape[0] < 1 or control.shape[0] < 1:
        raise ValueError("need at least one unit per arm")
    if treated.shape[1] != control.shape[1]:
        raise ValueError("treated and control covariate dimensions differ")
    k = treated.shape[1]
    names = spec.covariates or tuple(f"x{j}" for j in range(k))
    if len(names) != k:
        raise ValueError("covariate name count does not match matrix width")

    pooled = np.vstack([treated, control])
    cov = np.cov(pooled.T, ddof=1) if pooled.shape[0] > 1 else np.zeros((k, k))
    cov = np.atleast_2d(cov)
    ridge_applied = False
    try:
        vi = np.linalg.inv(cov)
    except np.linalg.LinAlgError:
        ridge_applied = True
        try:
            vi = np.linalg.inv(cov + 1e-8 * np.eye(k))
        except np.linalg.LinAlgError as exc:
            raise StatsError(f"covariance singular even after ridge: {exc}") from exc

    diff = treated[:, None, :] - control[None, :, :]
    d2 = np.einsum("tck,kl,tcl->tc", diff, vi, diff)
    distances = np.sqrt(np.clip(d2, 0.0, None))

    sd = float(distances.std())
    caliper_distance = spec.caliper * sd

    # hardest treated first: largest nearest-control distance, index tiebreak
    nearest = distances.min(axis=1)
    order = sorted(range(len(treated)), key=lambda i: (-nearest[i], i))

    available = np.ones(len(control), dtype=bool)
    pairs: list[MatchedPair] = []
    for i in order:
        if not available.any():
            break
        row = np.where(available, distances[i], np.inf)
        j = int(np.argmin(row))
        pairs.append(MatchedPair(i, j, float(distances[i, j])))
        available[j] = False

    kept = tuple(
        sorted(
            (p for p in pairs if p.distance <= caliper_distance),
            key=lambda p: p.treated_index,
        )
    )

    def variance(arr: np.ndarray) -> np.ndarray:
        return arr.var(axis=0, ddof=1) if arr.shape[0] > 1 else np.zeros(arr.shape[1])

    denominators = np.sqrt((variance(treated) + variance(control)) / 2.0)
    before = _smd(treated, control, denominators)
    if kept:
        t_idx = [p.treated_index for p in kept]
        c_idx = [p.control_index for p in kept]
        after = _smd(treated[t_idx], control[c_idx], denominators)
    else:
        after = np.zeros(k)

    return MatchResult(
        pairs=kept,
        n_matched=len(kept),
        smd_before={name: float(v) for name, v in zip(names, before)},
        smd_after={name: float(v) for name, v in zip(names, after)},
        caliper_distance=caliper_distance,
        ridge_applied=ridge_applied,
    )


@dataclass(frozen=True)
class GroupRates:
    group: str
    segments: int
    confirmed: int

    @property
    def rate(self) -> float:
        return self.confirmed / self.segments


@dataclass(frozen=True)
class GroupRateComparison:
    rates: dict[str, GroupRates]
    test: TestResult


def group_rate_comparison(
    confirmed_segment_ids: set[str],
    corpus: Corpus,
    subset: set[str] | None = None,
    method: str = "z",
) -> GroupRateComparison:
    """Per-group hallucination rates with a two-proportion test attached.

    Rates are computed over the full corpus or, when given, a segment-id
    subset (e.g. a matched cohort).
    """
    ids = corpus.segment_ids() if subset is None else sorted(subset)
    counts: dict[str, list[int]] = {}
    for segment_id in ids:
        group = corpus.group_of(segment_id)
        entry = counts.setdefault(group, [0, 0])
        entry[0] += 1
        if segment_id in confirmed_segment_ids:
            entry[1] += 1
    if len(counts) < 2:
        raise ValueError(f"need both groups represented, got {sorted(counts)}")
    for group, (n, _) in counts.items():
        if n == 0:
            raise ValueError(f"group '{group}' is empty")

    rates = {
        group: GroupRates(group, n, x) for group, (n, x) in sorted(counts.items())
    }
    aphasia = rates["aphasia"]
    control = rates["control"]
    test = two_proportion_test(
        aphasia.confirmed, aphasia.segments, control.confirmed, control.segments, method
    )
    return GroupRateComparison(rates, test)


def _stars(p: float) -> str:
    if p < 0.01:
        return "***"
    if p < 0.05:
        return "**"
    if p < 0.1:
        return "*"
    return ""


def format_regression_table(result: RegressionResult, title: str = "Hallucination") -> str:
    """Text table with estimate, standard error, and significance stars."""
    lines = [
        f"Dependent variable: {title}",
        "-" * 58,
    ]
    for coef in result.coefficients:
        if coef.standard_error > 0 and math.isfinite(coef.standard_error):
            z = coef.estimate / coef.standard_error
            p = math.erfc(abs(z) / math.sqrt(2.0))
            stars = _stars(p)
        else:
            stars = ""
        lines.append(f"{coef.name:<28}{coef.estimate:>10.3f}{stars:<3} ({coef.standard_error:.3f})")
    lines.append("-" * 58)
    lines.append(f"{'Observations':<28}{result.n_observations:>10,}")
    lines.append(f"{'Log Likelihood':<28}{result.log_likelihood:>10.3f}")
    lines.append(f"{'Akaike Inf. Crit.':<28}{result.aic:>10.3f}")
    if result.separation_warning:
        lines.append("warning: separation suspected (|coefficient| > 30)")
    if not result.converged:
        lines.append("warning: IRLS did not converge")
    lines.append("Note: *p<0.1; **p<0.05; ***p<0.01")
    return "\n".join(lines)
