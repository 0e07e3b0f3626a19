import numpy as np
import pytest

from corrkit.learn import LearnConfig, learn_bundle
from corrkit.synth import generate, single_coordination_task


def test_three_segments_learned(single_bundle):
    kinds = [s.kind for s in single_bundle.segments]
    assert kinds == ["free_space", "in_contact", "free_space"]


def test_contact_segment_uses_surface_schema(single_bundle):
    contact = single_bundle.segments[1]
    names = [c.name for c in contact.schema]
    assert names == ["u", "v", "f_n", "v_tool", "rate", "theta_u", "theta_v"]


def test_free_segments_keep_world_schema(single_bundle):
    free = single_bundle.segments[0]
    names = [c.name for c in free.schema]
    assert "x" in names and "qx" in names and "f_n" not in names


def test_k_reports_cover_all_segments(single_bundle):
    assert len(single_bundle.k_reports) == len(single_bundle.segments)
    for report in single_bundle.k_reports:
        assert report["k"] in (1, 3)
        assert 0.0 <= report["mean_explained"][0] <= 1.0


def test_single_structure_recommends_one_dof(single_bundle):
    assert single_bundle.recommended_k == 1


def test_config_snapshot_stored(single_bundle):
    snap = single_bundle.config_snapshot
    assert snap["force_threshold_n"] == 1.0
    assert snap["k_threshold"] == 0.85


def test_dmp_time_constant_matches_segment_length(single_bundle):
    for seg in single_bundle.segments:
        dt = 1.0 / single_bundle.capture_rate_hz
        assert seg.params.tau == pytest.approx((seg.length - 1) * dt)


def test_schedule_smoothing_applied(single_task):
    spec, demos, _ = single_task
    rough = learn_bundle(demos, spec.surface, LearnConfig(schedule_smoothing_s=0.0))
    smooth = learn_bundle(demos, spec.surface, LearnConfig(schedule_smoothing_s=0.3))
    seg_r = rough.segments[1].schedule
    seg_s = smooth.segments[1].schedule
    # smoothing damps frame-to-frame variation of the scaled components
    def roughness(schedule):
        diffs = []
        for a, b in zip(schedule.frames, schedule.frames[1:]):
            if a.scaled.size and b.scaled.size:
                diffs.append(np.linalg.norm(b.scaled[0] - a.scaled[0]))
        return np.mean(diffs)

    assert roughness(seg_s) < roughness(seg_r)


def test_too_few_demos_rejected():
    spec = single_coordination_task(seed=0)
    demos, _ = generate(spec)
    demos.demos = demos.demos[:2]
    bundle = learn_bundle(demos, spec.surface, LearnConfig())
    assert bundle is not None  # two demos is the documented minimum
    with pytest.raises(Exception):
        demos.demos = demos.demos[:1]
        learn_bundle(demos, spec.surface, LearnConfig())
