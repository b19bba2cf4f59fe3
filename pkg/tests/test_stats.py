"""Regression, proportion tests, matching, and rate comparison tests."""

import math

import numpy as np
import pytest

from sttaudit.corpus import Corpus, GroundTruth, Speaker
from sttaudit.stats import (
    MatchSpec,
    RegressionSpec,
    StatsError,
    design_matrix,
    fit_logistic,
    format_regression_table,
    group_rate_comparison,
    mahalanobis_match,
    two_proportion_test,
)

from conftest import build_corpus, make_features, make_segment, make_speaker


def simulate_logistic(beta, n, seed):
    rng = np.random.default_rng(seed)
    x1 = rng.integers(0, 2, n).astype(float)
    x2 = rng.uniform(0, 20, n)
    X = np.column_stack([np.ones(n), x1, x2])
    p = 1.0 / (1.0 + np.exp(-(X @ np.asarray(beta))))
    y = (rng.random(n) < p).astype(float)
    return X, y


class TestRegressionSpec:
    def test_intercept_auto_included(self):
        spec = RegressionSpec(covariates=("has_aphasia",))
        assert spec.covariates[0] == "intercept"

    def test_duplicates_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            RegressionSpec(covariates=("intercept", "age", "age"))

    def test_age_squared_requires_age(self):
        with pytest.raises(ValueError, match="age_squared"):
            RegressionSpec(covariates=("age_squared",))

    def test_unknown_covariate(self):
        with pytest.raises(ValueError, match="unknown"):
            RegressionSpec(covariates=("shoe_size",))


def toy_corpus_with_features(n_missing=0):
    corpus = build_corpus(
        [
            (make_speaker("a1", "aphasia", age=70), [("s1", 10.0, "one two three"),
                                                     ("s2", 8.0, "four five")]),
            (make_speaker("c1", "control", age=50), [("s3", 5.0, "six seven eight nine"),
                                                     ("s4", 4.0, "ten")]),
        ]
    )
    for i in range(n_missing):
        sid = f"m{i}"
        speaker_id = f"miss{i}"
        corpus.speakers[speaker_id] = Speaker(speaker_id=speaker_id, group="control")
        corpus.segments[sid] = make_segment(sid, speaker_id, 5.0)
        corpus.ground_truths[sid] = GroundTruth(sid, "a b c")
    features = {
        sid: make_features(sid, corpus.ground_truths[sid].word_count,
                           corpus.segments[sid].duration, 0.2 + 0.1 * i)
        for i, sid in enumerate(corpus.segment_ids())
    }
    return corpus, features


class TestDesignMatrix:
    def test_toy_columns(self):
        corpus, features = toy_corpus_with_features()
        dm = design_matrix(corpus, features, {"s1"}, RegressionSpec(covariates=("has_aphasia",)))
        assert dm.columns == ("intercept", "has_aphasia")
        assert dm.X.shape == (4, 2)
        assert list(dm.X[:, 0]) == [1.0, 1.0, 1.0, 1.0]
        assert list(dm.X[:, 1]) == [1.0, 1.0, 0.0, 0.0]
        assert list(dm.y) == [1.0, 0.0, 0.0, 0.0]

    def test_age_squared_is_elementwise_square(self):
        corpus, features = toy_corpus_with_features()
        dm = design_matrix(
            corpus, features, set(), RegressionSpec(covariates=("age", "age_squared"))
        )
        age = dm.X[:, dm.columns.index("age")]
        age2 = dm.X[:, dm.columns.index("age_squared")]
        assert np.array_equal(age2, age**2)

    def test_missing_demographics_dropped_and_counted(self):
        corpus, features = toy_corpus_with_features(n_missing=3)
        spec = RegressionSpec(covariates=("has_aphasia", "age"))
        dm = design_matrix(corpus, features, set(), spec)
        assert dm.X.shape[0] == 4
        assert dm.dropped_missing == 3
        # without demographic covariates nothing is dropped
        dm_all = design_matrix(corpus, features, set(),
                               RegressionSpec(covariates=("has_aphasia",)))
        assert dm_all.X.shape[0] == 7
        assert dm_all.dropped_missing == 0

    def test_demographic_subset_row_count(self):
        """Paper-shaped fixture: demographics on 10,830 of 13,140 segments."""
        corpus = Corpus()
        corpus.speakers["a"] = make_speaker("a", "aphasia", age=64)
        corpus.speakers["c"] = make_speaker("c", "control", age=58)
        corpus.speakers["m"] = Speaker(speaker_id="m", group="control")  # missing
        features = {}
        for i in range(13140):
            sid = f"s{i:05d}"
            speaker = "m" if i < 2310 else ("a" if i < 2310 + 5335 else "c")
            corpus.segments[sid] = make_segment(sid, speaker, 10.0)
            corpus.ground_truths[sid] = GroundTruth(sid, "u v w")
            features[sid] = make_features(sid, 3, 10.0, 0.25 + (i % 7) * 0.01)
        dm = design_matrix(
            corpus, features, set(),
            RegressionSpec(covariates=("has_aphasia", "age", "nonvocal_share")),
        )
        assert dm.X.shape[0] == 10830
        assert dm.dropped_missing == 2310

    def test_constant_covariate_named(self):
        corpus, features = toy_corpus_with_features()
        spec = RegressionSpec(covariates=("english_first_language",))
        with pytest.raises(StatsError, match="english_first_language"):
            design_matrix(corpus, features, set(), spec)

    def test_deterministic_row_order(self):
        corpus, features = toy_corpus_with_features()
        dm = design_matrix(corpus, features, set(), RegressionSpec(covariates=("has_aphasia",)))
        assert dm.segment_ids == tuple(sorted(dm.segment_ids))


class TestFitLogistic:
    def test_recovers_known_coefficients(self):
        beta = (-3.0, 0.6, 0.06)
        X, y = simulate_logistic(beta, 10_000, seed=12345)
        result = fit_logistic(X, y)
        assert result.converged
        for coef, true in zip(result.coefficients, beta):
            assert coef.estimate == pytest.approx(true, abs=0.1)
            assert coef.standard_error > 0

    def test_balanced_symmetric_data_gives_zeros(self):
        X = np.column_stack([np.ones(4), [1.0, -1.0, 1.0, -1.0]])
        y = np.array([1.0, 0.0, 0.0, 1.0])
        result = fit_logistic(X, y)
        for coef in result.coefficients:
            assert abs(coef.estimate) < 1e-6

    def test_aic_identity(self):
        X, y = simulate_logistic((-1.0, 0.5, 0.02), 500, seed=3)
        result = fit_logistic(X, y)
        k = len(result.coefficients)
        assert result.aic == pytest.approx(2 * k - 2 * result.log_likelihood, abs=1e-9)

    def test_published_aic_triple(self):
        # internal-consistency identity: k = 13, LL = -785.562
        assert 2 * 13 - 2 * (-785.562) == pytest.approx(1597.125, abs=1e-3)

    def test_score_vanishes_at_optimum(self):
        X, y = simulate_logistic((-2.0, 0.8, 0.05), 2_000, seed=8)
        result = fit_logistic(X, y)
        beta = np.array([c.estimate for c in result.coefficients])
        p = 1.0 / (1.0 + np.exp(-(X @ beta)))
        score = X.T @ (y - p)
        assert float(np.max(np.abs(score))) < 1e-6

    def test_separation_reported(self):
        X = np.column_stack([np.ones(20), np.r_[np.zeros(10), np.ones(10)]])
        y = np.r_[np.zeros(10), np.ones(10)]
        result = fit_logistic(X, y)
        assert result.separation_warning

    def test_rank_deficiency_rejected(self):
        X = np.column_stack([np.ones(30), np.arange(30.0), 2 * np.arange(30.0)])
        y = (np.arange(30) % 2).astype(float)
        with pytest.raises(StatsError, match="rank"):
            fit_logistic(X, y)

    def test_needs_more_rows_than_columns(self):
        with pytest.raises(StatsError, match="observations"):
            fit_logistic(np.eye(3), np.array([1.0, 0.0, 1.0]))

    def test_all_zero_outcome_flagged_not_converged(self):
        """Degenerate outcome: partial result with converged=False, never a crash."""
        rng = np.random.default_rng(3)
        X = np.column_stack([np.ones(200), rng.normal(0, 1, 200)])
        result = fit_logistic(X, np.zeros(200))
        assert not result.converged
        assert result.iterations == 50
        assert result.coefficient("x0").estimate < -10  # drifting toward -inf

    def test_log_likelihood_nondecreasing_over_refits(self):
        X, y = simulate_logistic((-1.5, 0.4, 0.03), 800, seed=5)
        lls = []
        for max_iter in range(1, 8):
            spec = RegressionSpec(covariates=("has_aphasia",), max_iterations=max_iter)
            # spec covariate names are irrelevant to the numeric path here
            result = fit_logistic(X, y, columns=("b0", "b1", "b2"),
                                  spec=None if max_iter == 0 else spec)
            lls.append(result.log_likelihood)
        assert all(b >= a - 1e-9 for a, b in zip(lls, lls[1:]))


class TestTwoProportionTest:
    def test_group_split_example(self):
        result = two_proportion_test(91, 5335, 94, 7805)
        assert result.statistic == pytest.approx(2.40, abs=0.01)
        assert result.p_value == pytest.approx(0.0166, abs=0.001)

    def test_identical_proportions(self):
        result = two_proportion_test(5, 50, 10, 100)
        assert result.statistic == 0.0
        assert result.p_value == 1.0

    def test_extreme_difference(self):
        result = two_proportion_test(0, 100, 50, 100)
        assert result.p_value < 1e-10

    def test_symmetry_under_arm_swap(self):
        a = two_proportion_test(30, 400, 20, 500)
        b = two_proportion_test(20, 500, 30, 400)
        assert a.p_value == pytest.approx(b.p_value, abs=1e-12)
        assert a.statistic == pytest.approx(-b.statistic, abs=1e-12)

    def test_chi2_variant_matches_z(self):
        z = two_proportion_test(91, 5335, 94, 7805, method="z")
        chi2 = two_proportion_test(91, 5335, 94, 7805, method="chi2")
        assert chi2.statistic == pytest.approx(z.statistic**2, abs=1e-9)
        assert chi2.p_value == pytest.approx(z.p_value, abs=1e-9)

    def test_validation(self):
        with pytest.raises(ValueError):
            two_proportion_test(1, 0, 1, 10)
        with pytest.raises(ValueError):
            two_proportion_test(11, 10, 1, 10)


def brute_force_match(treated, control, caliper):
    """Replays the production order rule with plain loops."""
    treated = np.asarray(treated, float)
    control = np.asarray(control, float)
    pooled = np.vstack([treated, control])
    cov = np.atleast_2d(np.cov(pooled.T, ddof=1))
    try:
        vi = np.linalg.inv(cov)
    except np.linalg.LinAlgError:
        vi = np.linalg.inv(cov + 1e-8 * np.eye(cov.shape[0]))

    def dist(t, c):
        d = t - c
        return math.sqrt(max(0.0, float(d @ vi @ d)))

    all_d = [dist(t, c) for t in treated for c in control]
    mean = sum(all_d) / len(all_d)
    sd = math.sqrt(sum((d - mean) ** 2 for d in all_d) / len(all_d))
    limit = caliper * sd

    nearest = []
    for i, t in enumerate(treated):
        nearest.append(min(dist(t, c) for c in control))
    order = sorted(range(len(treated)), key=lambda i: (-nearest[i], i))

    used = set()
    pairs = []
    for i in order:
        best_j, best_d = None, None
        for j, c in enumerate(control):
            if j in used:
                continue
            d = dist(treated[i], c)
            if best_d is None or d < best_d:
                best_j, best_d = j, d
        if best_j is None:
            break
        used.add(best_j)
        pairs.append((i, best_j, best_d))
    return sorted((i, j) for i, j, d in pairs if d <= limit)


class TestMahalanobisMatch:
    def test_identical_rows_all_matched_zero_smd(self):
        treated = np.tile([1.0, 2.0], (5, 1))
        control = np.tile([1.0, 2.0], (9, 1))
        result = mahalanobis_match(treated, control, MatchSpec(covariates=("a", "b")))
        assert result.n_matched == 5
        assert result.smd_after == {"a": 0.0, "b": 0.0}
        assert result.ridge_applied

    def test_matches_brute_force_on_small_instances(self):
        rng = np.random.default_rng(77)
        for trial in range(30):
            nt = int(rng.integers(2, 12))
            nc = int(rng.integers(2, 12))
            k = int(rng.integers(1, 4))
            treated = rng.normal(0.3, 1.0, size=(nt, k))
            control = rng.normal(0.0, 1.0, size=(nc, k))
            spec = MatchSpec(covariates=tuple(f"x{j}" for j in range(k)), caliper=0.8)
            result = mahalanobis_match(treated, control, spec)
            ours = sorted((p.treated_index, p.control_index) for p in result.pairs)
            assert ours == brute_force_match(treated, control, 0.8), f"trial {trial}"

    def test_never_reuses_a_control(self):
        rng = np.random.default_rng(31)
        treated = rng.normal(0, 1, size=(40, 2))
        control = rng.normal(0, 1, size=(25, 2))
        result = mahalanobis_match(treated, control, MatchSpec(covariates=("x", "y"), caliper=5.0))
        controls = [p.control_index for p in result.pairs]
        assert len(controls) == len(set(controls))
        assert result.n_matched <= 25

    def test_caliper_shrink_monotonicity(self):
        rng = np.random.default_rng(19)
        treated = rng.normal(0.5, 1.0, size=(50, 3))
        control = rng.normal(0.0, 1.0, size=(80, 3))
        counts = [
            mahalanobis_match(
                treated, control, MatchSpec(covariates=("x", "y", "z"), caliper=c)
            ).n_matched
            for c in (0.05, 0.10, 0.15, 0.20)
        ]
        assert counts == sorted(counts)

    def test_smd_improves_on_imbalanced_corpus(self):
        rng = np.random.default_rng(4)
        treated = rng.normal([1.0, 0.6, -0.4], 1.0, size=(80, 3))
        control = rng.normal([0.0, 0.0, 0.0], 1.0, size=(200, 3))
        result = mahalanobis_match(treated, control, MatchSpec(covariates=("x", "y", "z")))
        assert result.n_matched > 0
        for name in ("x", "y", "z"):
            assert abs(result.smd_after[name]) <= abs(result.smd_before[name])

    def test_empty_arm_rejected(self):
        with pytest.raises(ValueError, match="arm"):
            mahalanobis_match(np.zeros((0, 2)), np.zeros((3, 2)), MatchSpec(covariates=("a", "b")))

    def test_empty_matched_set_is_valid(self):
        treated = np.array([[0.0], [0.1]])
        control = np.array([[100.0], [101.0]])
        # distances are huge and uniform: a tiny caliper discards everything
        result = mahalanobis_match(treated, control, MatchSpec(covariates=("x",), caliper=0.001))
        assert result.n_matched == 0
        assert result.pairs == ()


class TestGroupRateComparison:
    def make_group_corpus(self, n_aphasia, n_control):
        corpus = build_corpus([(make_speaker("a", "aphasia"), []), (make_speaker("c", "control"), [])])
        for i in range(n_aphasia):
            sid = f"a{i}"
            corpus.segments[sid] = make_segment(sid, "a", 10.0)
            corpus.ground_truths[sid] = GroundTruth(sid, "x")
        for i in range(n_control):
            sid = f"c{i}"
            corpus.segments[sid] = make_segment(sid, "c", 10.0)
            corpus.ground_truths[sid] = GroundTruth(sid, "x")
        return corpus

    def test_full_corpus_rates(self):
        corpus = self.make_group_corpus(5335, 7805)
        confirmed = {f"a{i}" for i in range(91)} | {f"c{i}" for i in range(94)}
        result = group_rate_comparison(confirmed, corpus)
        assert round(100 * result.rates["aphasia"].rate, 2) == 1.71
        assert round(100 * result.rates["control"].rate, 2) == 1.20
        assert result.test.p_value == pytest.approx(0.0166, abs=0.001)

    def test_matched_subset_rates(self):
        corpus = self.make_group_corpus(3023, 3023)
        confirmed = {f"a{i}" for i in range(55)} | {f"c{i}" for i in range(35)}
        subset = {f"a{i}" for i in range(3023)} | {f"c{i}" for i in range(3023)}
        result = group_rate_comparison(confirmed, corpus, subset)
        assert round(100 * result.rates["aphasia"].rate, 2) == 1.82
        assert round(100 * result.rates["control"].rate, 2) == 1.16

    def test_zero_confirmed(self):
        corpus = self.make_group_corpus(10, 10)
        result = group_rate_comparison(set(), corpus)
        assert result.rates["aphasia"].rate == 0.0
        assert result.rates["control"].rate == 0.0
        assert result.test.p_value == 1.0

    def test_single_group_rejected(self):
        corpus = build_corpus([(make_speaker("a", "aphasia"), [("s1", 5.0, "x")])])
        with pytest.raises(ValueError, match="group"):
            group_rate_comparison(set(), corpus)


def test_regression_table_formatting():
    X, y = simulate_logistic((-2.0, 1.5, 0.1), 3000, seed=6)
    result = fit_logistic(X, y, columns=("intercept", "exposed", "dose"))
    table = format_regression_table(result)
    assert "exposed" in table
    assert "Observations" in table
    assert "3,000" in table
    assert "*" in table  # strong effect earns stars
    assert "p<0.01" in table
