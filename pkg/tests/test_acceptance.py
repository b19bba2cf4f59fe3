"""Acceptance suite: every exit criterion at its stated tolerance.

Run with `pytest tests/test_acceptance.py -v -s` to see one PASS/FAIL line
per criterion. Each criterion is a single test; tolerances are pinned here
and nowhere else.
"""

import math
import random
import time

import numpy as np
import pytest
from scipy import stats as sp_stats

from sttaudit.alignment import align
from sttaudit.backends import BackendDescriptor, MockConfig, mock_transcribe
from sttaudit.corpus import GroundTruth
from sttaudit.detection import DetectionConfig, detect_candidate
from sttaudit.harms import HARMFUL_GROUPS, HarmLabel, aggregate
from sttaudit.pipeline import PipelineConfig, run_pipeline
from sttaudit.stats import (
    MatchSpec,
    fit_logistic,
    mahalanobis_match,
    two_proportion_test,
)
from sttaudit.synthcorpus import GroupProfile, SynthCorpusSpec, write_synth_corpus
from sttaudit.vad import PROFILES, SynthPart, synth_fixture, vad_profile

from conftest import make_features, make_segment
from test_alignment import brute_force_distance
from test_stats import brute_force_match


def passed(name: str) -> None:
    print(f"\nACCEPTANCE {name}: PASS")


_WORDS = (
    "the and she he they went came said saw little big old house tree ball "
    "window dog cat girl boy story book water street school morning day hand "
    "door table garden park friend family dinner letter walked talked played"
).split()


def build_mock_corpus(n_segments, seed, share_fn, words_fn):
    rng = random.Random(seed)
    items = []
    for i in range(n_segments):
        words = words_fn(rng, i)
        text = " ".join(rng.choice(_WORDS) for _ in range(words))
        segment_id = f"seg{i:05d}"
        duration = max(1.0, words / 1.6)
        segment = make_segment(segment_id, duration=duration)
        truth = GroundTruth(segment_id, text)
        features = make_features(segment_id, truth.word_count, duration, share_fn(rng, i))
        items.append((segment, truth, features))
    return items


@pytest.fixture(scope="module")
def flat_rate_detection():
    """2,000 segments, flat 5% injection, two run tags, default detector."""
    items = build_mock_corpus(
        2000,
        seed=202,
        share_fn=lambda rng, i: min(0.9, max(0.02, rng.gauss(0.25, 0.08))),
        words_fn=lambda rng, i: rng.randint(8, 18),
    )
    config = MockConfig(
        substitution_rate=0.02,
        hallucination_logit_intercept=math.log(0.05 / 0.95),
        hallucination_logit_slope=0.0,
        base_seed=202,
    )
    detection = DetectionConfig()
    injected, detected = set(), set()
    start = time.monotonic()
    for segment, truth, features in items:
        run_a, record_a = mock_transcribe(config, segment, truth, features, "2023-04")
        run_b, _ = mock_transcribe(config, segment, truth, features, "2023-05")
        if record_a.injected:
            injected.add(segment.segment_id)
        if detect_candidate(truth, run_a, run_b, detection) is not None:
            detected.add(segment.segment_id)
    elapsed = time.monotonic() - start
    return injected, detected, len(items), elapsed


def test_alignment_oracle():
    """1,000 random pairs (len <= 10): align == brute-force recursion, < 10 s."""
    rng = random.Random(99)
    alphabet = "abcd"
    start = time.monotonic()
    for _ in range(1000):
        ref = [rng.choice(alphabet) for _ in range(rng.randint(0, 10))]
        hyp = [rng.choice(alphabet) for _ in range(rng.randint(0, 10))]
        assert align(ref, hyp).edit_distance == brute_force_distance(ref, hyp)
    elapsed = time.monotonic() - start
    assert elapsed < 10.0, f"alignment oracle took {elapsed:.1f}s"
    passed(f"alignment-oracle ({elapsed:.2f}s)")


def test_detector_fidelity(flat_rate_detection):
    """Recall >= 0.90 and precision >= 0.90 against the injection oracle, < 60 s."""
    injected, detected, _, elapsed = flat_rate_detection
    assert injected, "fixture produced no injections"
    recall = len(detected & injected) / len(injected)
    precision = len(detected & injected) / max(1, len(detected))
    assert elapsed < 60.0, f"detection took {elapsed:.1f}s"
    assert recall >= 0.90, f"recall {recall:.3f} < 0.90"
    assert precision >= 0.90, f"precision {precision:.3f} < 0.90"
    passed(f"detector-fidelity (recall {recall:.3f}, precision {precision:.3f}, {elapsed:.1f}s)")


def test_rate_recovery(flat_rate_detection):
    """Detected rate falls inside the exact 95% binomial CI of the injected rate."""
    injected, detected, n, _ = flat_rate_detection
    x = len(injected)
    lower = float(sp_stats.beta.ppf(0.025, x, n - x + 1)) if x > 0 else 0.0
    upper = float(sp_stats.beta.ppf(0.975, x + 1, n - x)) if x < n else 1.0
    detected_rate = len(detected) / n
    assert lower <= detected_rate <= upper, (
        f"detected rate {detected_rate:.4f} outside CI [{lower:.4f}, {upper:.4f}]"
    )
    passed(f"rate-recovery ({detected_rate:.4f} in [{lower:.4f}, {upper:.4f}])")


def test_group_disparity_reproduction():
    """5,335 aphasia / 7,805 control, injection keyed to non-vocal share
    calibrated to group means 0.41 / 0.15: aphasia rate > control rate, and
    the published-count proportion test lands in [0.010, 0.025]; < 2 min."""
    start = time.monotonic()
    rng = random.Random(19)

    def build_group(prefix, n, share_mean, words_mean):
        items = []
        for i in range(n):
            words = max(3, int(rng.gauss(words_mean, 3)))
            text = " ".join(rng.choice(_WORDS) for _ in range(words))
            segment_id = f"{prefix}{i:05d}"
            duration = max(1.0, words / 1.5)
            share = min(0.9, max(0.02, rng.gauss(share_mean, 0.06)))
            items.append(
                (
                    make_segment(segment_id, duration=duration),
                    GroundTruth(segment_id, text),
                    make_features(segment_id, words, duration, share),
                )
            )
        return items

    aphasia = build_group("a", 5335, 0.41, 12)
    control = build_group("c", 7805, 0.15, 16)

    # b > 0 keyed to non-vocal share; intercept calibrated for ~1.7% at 0.41
    config = MockConfig(
        substitution_rate=0.02,
        hallucination_logit_intercept=-4.672,
        hallucination_logit_slope=1.5,
        base_seed=19,
    )
    detection = DetectionConfig()

    def measured_rate(items):
        hits = 0
        for segment, truth, features in items:
            run_a, _ = mock_transcribe(config, segment, truth, features, "2023-04")
            run_b, _ = mock_transcribe(config, segment, truth, features, "2023-05")
            if detect_candidate(truth, run_a, run_b, detection) is not None:
                hits += 1
        return hits / len(items)

    aphasia_rate = measured_rate(aphasia)
    control_rate = measured_rate(control)
    elapsed = time.monotonic() - start
    assert elapsed < 120.0, f"group disparity run took {elapsed:.1f}s"
    assert aphasia_rate > control_rate, (
        f"aphasia rate {aphasia_rate:.4f} not above control {control_rate:.4f}"
    )

    test = two_proportion_test(91, 5335, 94, 7805)
    assert 0.010 <= test.p_value <= 0.025, f"p = {test.p_value:.4f} outside [0.010, 0.025]"
    passed(
        "group-disparity "
        f"(rates {100 * aphasia_rate:.2f}% > {100 * control_rate:.2f}%, "
        f"p = {test.p_value:.4f}, {elapsed:.0f}s)"
    )


def test_vad_fixture_and_rank_order():
    """10 s file with exactly 4 s silence: share 0.40 +/- 0.05 under both
    profiles; four-group ordering identical under both profiles."""
    fixture = synth_fixture(
        [SynthPart("tone", 3.0, -10.0), SynthPart("silence", 4.0), SynthPart("tone", 3.0, -10.0)],
        16000,
    )
    shares = {}
    for name in ("strict", "lenient"):
        share = vad_profile(fixture, 16000, PROFILES[name], "fx").nonvocal_share
        assert share == pytest.approx(0.40, abs=0.05), f"{name}: share {share:.3f}"
        shares[name] = share

    targets = {
        "aphasia_hallucinated": 0.424,
        "aphasia_clean": 0.406,
        "control_hallucinated": 0.162,
        "control_clean": 0.154,
    }
    expected_order = sorted(targets, key=targets.get, reverse=True)
    orderings = {}
    for name in ("strict", "lenient"):
        cfg = PROFILES[name]
        means = {}
        for cell, target in targets.items():
            values = []
            for i in range(8):
                s = target + 0.02 * ((i / 7) * 2 - 1)
                samples = synth_fixture(
                    [SynthPart("tone", (1 - s) * 10.0, -10.0), SynthPart("silence", s * 10.0)],
                    16000,
                )
                values.append(vad_profile(samples, 16000, cfg).nonvocal_share)
            means[cell] = float(np.mean(values))
        orderings[name] = sorted(means, key=means.get, reverse=True)
    assert orderings["strict"] == expected_order, orderings["strict"]
    assert orderings["lenient"] == expected_order, orderings["lenient"]
    passed(
        "vad-fixture "
        f"(shares strict {shares['strict']:.3f} / lenient {shares['lenient']:.3f}, "
        "rank order stable)"
    )


def test_irls_correctness():
    """(a) beta recovery within +/-0.1 at n = 10,000; (b) score < 1e-6 at the
    optimum; (c) AIC identity reproduces the published triple."""
    beta_true = np.array([-3.0, 0.6, 0.06])
    rng = np.random.default_rng(12345)
    n = 10_000
    X = np.column_stack(
        [np.ones(n), rng.integers(0, 2, n).astype(float), rng.uniform(0, 20, n)]
    )
    p = 1.0 / (1.0 + np.exp(-(X @ beta_true)))
    y = (rng.random(n) < p).astype(float)
    result = fit_logistic(X, y)
    assert result.converged
    estimates = np.array([c.estimate for c in result.coefficients])
    for est, true in zip(estimates, beta_true):
        assert abs(est - true) <= 0.1, f"estimate {est:.4f} vs {true}"

    p_hat = 1.0 / (1.0 + np.exp(-(X @ estimates)))
    score = X.T @ (y - p_hat)
    max_score = float(np.max(np.abs(score)))
    assert max_score < 1e-6, f"score {max_score:.2e}"

    aic = 2 * 13 - 2 * (-785.562)
    assert abs(aic - 1597.125) <= 1e-3, f"AIC {aic}"
    passed(
        "irls-correctness "
        f"(max |error| {float(np.max(np.abs(estimates - beta_true))):.4f}, "
        f"score {max_score:.1e}, AIC {aic:.3f})"
    )


def test_matching_correctness():
    """Brute-force pairing equivalence on 100 random instances (n <= 20);
    SMD improvement on an imbalanced corpus; caliper-shrink monotonicity."""
    rng = np.random.default_rng(555)
    for trial in range(100):
        nt = int(rng.integers(1, 11))
        nc = int(rng.integers(1, 11))
        k = int(rng.integers(1, 4))
        treated = rng.normal(0.4, 1.0, size=(nt, k))
        control = rng.normal(0.0, 1.0, size=(nc, k))
        spec = MatchSpec(covariates=tuple(f"x{j}" for j in range(k)), caliper=0.5)
        result = mahalanobis_match(treated, control, spec)
        ours = sorted((p.treated_index, p.control_index) for p in result.pairs)
        expected = brute_force_match(treated, control, 0.5)
        assert ours == expected, f"trial {trial}: {ours} != {expected}"

    treated = rng.normal([1.0, 0.5], 1.0, size=(120, 2))
    control = rng.normal([0.0, 0.0], 1.0, size=(360, 2))
    names = ("x", "y")
    result = mahalanobis_match(treated, control, MatchSpec(covariates=names, caliper=1.0))
    assert result.n_matched > 0
    for name in names:
        assert abs(result.smd_after[name]) <= abs(result.smd_before[name]), name

    counts = [
        mahalanobis_match(treated, control, MatchSpec(covariates=names, caliper=c)).n_matched
        for c in (0.05, 0.10, 0.15, 0.20)
    ]
    assert counts == sorted(counts), f"caliper grid counts not monotone: {counts}"
    passed(
        f"matching-correctness (100 oracle trials, n_matched {result.n_matched}, "
        f"caliper grid {counts})"
    )


def test_harm_aggregation_fixture():
    """312 confirmed labeled to 19% / 13% / 8% broad groups, 38% any-harm."""
    labels = []
    idx = 0

    def add(count, categories):
        nonlocal idx
        for _ in range(count):
            labels.append(
                HarmLabel(f"c{idx}", "fixture", True, frozenset(categories),
                          labeled_at="2024-01-01T00:00:00")
            )
            idx += 1

    add(53, {"violence"})
    add(6, {"violence", "names"})   # overlap: violence + association
    add(35, {"relationships"})
    add(25, {"thanks"})
    add(312 - idx, set())           # benign fabrication

    dist = aggregate(labels)
    assert dist.total_confirmed == 312
    rounded = {g: round(100 * dist.per_broad_group[g]) for g in HARMFUL_GROUPS}
    assert rounded["perpetuating_violence"] == 19, rounded
    assert rounded["incorrect_association"] == 13, rounded
    assert rounded["false_authority_phishing"] == 8, rounded
    assert round(100 * dist.any_harm_share) == 38, dist.any_harm_share
    passed("harm-aggregation (19/13/8, any 38)")


def test_pipeline_determinism(tmp_path):
    """Two full mock-backend pipeline runs produce byte-identical reports."""
    spec = SynthCorpusSpec(
        aphasia=GroupProfile(n_segments=100, mean_words=12, mean_duration=5.0,
                             mean_nonvocal_share=0.41),
        control=GroupProfile(n_segments=100, mean_words=16, mean_duration=4.0,
                             mean_nonvocal_share=0.15),
        seed=31,
    )
    manifest = write_synth_corpus(spec, tmp_path / "corpus")

    def config(out):
        return PipelineConfig(
            manifest=str(manifest),
            output_dir=str(out),
            backends=[BackendDescriptor("mock-1", "mock", parallelism_limit=8)],
            run_tags=["2023-04", "2023-05"],
            mock=MockConfig(substitution_rate=0.02, hallucination_logit_intercept=-2.5,
                            hallucination_logit_slope=2.5, base_seed=31),
            auto_label=True,
            seed=31,
            parallelism=8,
        )

    run_pipeline(config(tmp_path / "run1"))
    run_pipeline(config(tmp_path / "run2"))
    json_a = (tmp_path / "run1" / "report" / "report.json").read_bytes()
    json_b = (tmp_path / "run2" / "report" / "report.json").read_bytes()
    md_a = (tmp_path / "run1" / "report" / "report.md").read_bytes()
    md_b = (tmp_path / "run2" / "report" / "report.md").read_bytes()
    assert json_a == json_b, "report.json differs between identical runs"
    assert md_a == md_b, "report.md differs between identical runs"
    passed(f"pipeline-determinism ({len(json_a)} byte report)")
