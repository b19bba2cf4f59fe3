"""Energy VAD and synthetic fixture tests."""

import math

import numpy as np
import pytest

from sttaudit.vad import (
    PROFILES,
    SynthPart,
    VadConfig,
    profile_for_name,
    synth_fixture,
    vad_profile,
)


class TestSynthFixture:
    def test_silence_sample_count(self):
        samples = synth_fixture([SynthPart("silence", 1.0)], 16000)
        assert len(samples) == 16000
        assert not samples.any()

    def test_tone_rms_matches_level(self):
        samples = synth_fixture([SynthPart("tone", 1.0, -10.0)], 16000)
        rms_db = 20 * math.log10(math.sqrt(float(np.mean(samples**2))))
        assert abs(rms_db - (-10.0)) < 0.5

    def test_noise_rms_matches_level(self):
        samples = synth_fixture([SynthPart("noise", 1.0, -20.0)], 16000, seed=4)
        rms_db = 20 * math.log10(math.sqrt(float(np.mean(samples**2))))
        assert abs(rms_db - (-20.0)) < 0.5

    def test_noise_deterministic(self):
        a = synth_fixture([SynthPart("noise", 0.5, -15.0)], 16000, seed=9)
        b = synth_fixture([SynthPart("noise", 0.5, -15.0)], 16000, seed=9)
        assert np.array_equal(a, b)

    def test_zero_duration_rejected(self):
        with pytest.raises(ValueError, match="duration"):
            SynthPart("tone", 0.0)

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError, match="kind"):
            SynthPart("hum", 1.0)


def ten_second_fixture():
    return synth_fixture(
        [SynthPart("tone", 3.0, -10.0), SynthPart("silence", 4.0), SynthPart("tone", 3.0, -10.0)],
        16000,
    )


class TestVadProfile:
    @pytest.mark.parametrize("profile", ["strict", "lenient"])
    def test_forty_percent_silence_fixture(self, profile):
        result = vad_profile(ten_second_fixture(), 16000, PROFILES[profile], "fx")
        assert result.nonvocal_share == pytest.approx(0.40, abs=0.05)

    def test_pure_silence(self):
        result = vad_profile(np.zeros(16000), 16000, PROFILES["strict"])
        assert result.nonvocal_share == 1.0
        assert result.vocal_intervals == ()

    def test_pure_tone(self):
        samples = synth_fixture([SynthPart("tone", 1.0, -5.0)], 16000)
        result = vad_profile(samples, 16000, PROFILES["strict"])
        assert result.nonvocal_share == pytest.approx(0.0, abs=0.01)

    def test_dc_signal_counts_as_silence(self):
        result = vad_profile(np.full(16000, 0.25), 16000, PROFILES["strict"])
        assert result.nonvocal_share == 1.0

    def test_empty_audio_rejected(self):
        with pytest.raises(ValueError, match="frame"):
            vad_profile(np.zeros(10), 16000, PROFILES["strict"])

    def test_intervals_within_bounds_and_sorted(self):
        result = vad_profile(ten_second_fixture(), 16000, PROFILES["strict"])
        previous_end = 0.0
        for start, end in result.vocal_intervals:
            assert 0.0 <= start < end <= result.total_duration
            assert start >= previous_end
            previous_end = end

    def test_share_in_unit_interval_on_noise_mixes(self):
        rng = np.random.default_rng(17)
        for trial in range(10):
            parts = []
            for _ in range(rng.integers(1, 5)):
                kind = ["silence", "tone", "noise"][rng.integers(3)]
                parts.append(SynthPart(kind, float(rng.uniform(0.2, 1.0)), float(rng.uniform(-40, -5))))
            samples = synth_fixture(parts, 16000, seed=trial)
            result = vad_profile(samples, 16000, PROFILES["strict"])
            assert 0.0 <= result.nonvocal_share <= 1.0

    def test_extra_silence_increases_nonvocal_duration(self):
        base = synth_fixture(
            [SynthPart("tone", 2.0, -10.0), SynthPart("silence", 1.0)], 16000
        )
        longer = synth_fixture(
            [SynthPart("tone", 2.0, -10.0), SynthPart("silence", 3.0)], 16000
        )
        cfg = PROFILES["strict"]
        assert (
            vad_profile(longer, 16000, cfg).nonvocal_duration
            > vad_profile(base, 16000, cfg).nonvocal_duration
        )

    def test_concatenation_additivity(self):
        cfg = PROFILES["strict"]
        a = synth_fixture([SynthPart("tone", 2.0, -10.0), SynthPart("silence", 1.5)], 16000)
        b = synth_fixture([SynthPart("silence", 2.0), SynthPart("tone", 1.0, -12.0)], 16000)
        separate = (
            vad_profile(a, 16000, cfg).nonvocal_duration
            + vad_profile(b, 16000, cfg).nonvocal_duration
        )
        joined = vad_profile(np.concatenate([a, b]), 16000, cfg).nonvocal_duration
        slack = (cfg.hangover_frames + 1) * cfg.frame_ms / 1000.0
        assert abs(joined - separate) <= slack

    def test_adaptive_threshold_tracks_noise_floor(self):
        # noise floor at -28 dB would defeat the absolute -35 dB threshold
        speech = synth_fixture([SynthPart("tone", 2.0, -8.0)], 16000)
        noise = synth_fixture([SynthPart("noise", 2.0, -28.0)], 16000, seed=2)
        samples = np.concatenate([speech, noise])
        adaptive = vad_profile(samples, 16000, PROFILES["strict"])
        fixed = vad_profile(
            samples, 16000,
            VadConfig(frame_ms=30, energy_threshold_db=-35.0, adaptive=False, hangover_frames=5),
        )
        assert adaptive.nonvocal_share == pytest.approx(0.5, abs=0.08)
        assert fixed.nonvocal_share == pytest.approx(0.0, abs=0.02)


class TestConfig:
    def test_frame_bounds(self):
        with pytest.raises(ValueError):
            VadConfig(frame_ms=5)
        with pytest.raises(ValueError):
            VadConfig(frame_ms=60)

    def test_negative_hangover(self):
        with pytest.raises(ValueError):
            VadConfig(hangover_frames=-1)

    def test_unknown_profile(self):
        with pytest.raises(ValueError, match="profile"):
            profile_for_name("fuzzy")


def build_group_fixtures(share_targets, n_per_group=8, duration=10.0, rate=16000):
    """One tone+silence file per requested share; single gap each."""
    fixtures = {}
    for name, share in share_targets.items():
        files = []
        for i in range(n_per_group):
            # deterministic +/-2% spread around the target share
            s = share + 0.02 * ((i / max(1, n_per_group - 1)) * 2 - 1)
            files.append(
                synth_fixture(
                    [
                        SynthPart("tone", (1 - s) * duration, -10.0),
                        SynthPart("silence", s * duration),
                    ],
                    rate,
                )
            )
        fixtures[name] = files
    return fixtures


def test_four_group_rank_order_robust_across_profiles():
    """Group ordering of mean non-vocal share must agree between profiles."""
    targets = {
        "aphasia_hallucinated": 0.424,
        "aphasia_clean": 0.406,
        "control_hallucinated": 0.162,
        "control_clean": 0.154,
    }
    fixtures = build_group_fixtures(targets)
    orderings = {}
    for profile in ("strict", "lenient"):
        cfg = PROFILES[profile]
        means = {
            name: float(np.mean([vad_profile(f, 16000, cfg).nonvocal_share for f in files]))
            for name, files in fixtures.items()
        }
        orderings[profile] = sorted(means, key=means.get, reverse=True)
        # recovered means stay close to the constructed ones
        for name, target in targets.items():
            assert means[name] == pytest.approx(target, abs=0.03)
    expected = ["aphasia_hallucinated", "aphasia_clean", "control_hallucinated", "control_clean"]
    assert orderings["strict"] == expected
    assert orderings["lenient"] == expected
