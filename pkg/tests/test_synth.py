import numpy as np
import pytest

from corrkit.alignment import align, resample_to_reference
from corrkit.channels import index_of
from corrkit.corrections import extract
from corrkit.segmentation import segment
from corrkit.synth import (
    PlantedComponent,
    SynthSpec,
    dual_structure_task,
    generate,
    single_coordination_task,
)


def test_deterministic_for_seed():
    a, _ = generate(single_coordination_task(seed=5))
    b, _ = generate(single_coordination_task(seed=5))
    assert a.digest() == b.digest()
    c, _ = generate(single_coordination_task(seed=6))
    assert a.digest() != c.digest()


def test_positions_identical_across_demos(single_task):
    _, demos, _ = single_task
    ref = demos.demos[0].values[:, :3]
    for d in demos.demos[1:]:
        assert np.array_equal(d.values[:, :3], ref)


def test_alignment_is_identity(single_task):
    _, demos, _ = single_task
    warp = align(demos)
    for pairs in warp.pair_paths:
        assert np.array_equal(pairs[:, 0], pairs[:, 1])
    data, schema = resample_to_reference(warp)
    rate = data[:, :, index_of(schema, "rate")]
    assert np.all(rate == 1.0)


def test_contact_window_matches_segmentation(single_task):
    spec, demos, truth = single_task
    warp = align(demos)
    data, schema = resample_to_reference(warp)
    segs = segment(data, schema, spec.capture_rate_hz)
    kinds = [s.kind for s in segs]
    assert kinds == ["free_space", "in_contact", "free_space"]
    c0, c1 = truth.contact_window
    contact = segs[1]
    # force climbs a smoothstep ramp, so the 1 N crossing sits inside the
    # window by up to the ramp length plus the detection filter delay
    ramp = int(round(0.25 * spec.capture_rate_hz))
    assert c0 <= contact.start <= c0 + ramp + 4
    assert c1 - ramp - 4 <= contact.end <= c1


def test_planted_direction_recovered(single_task):
    spec, demos, truth = single_task
    warp = align(demos)
    data, schema = resample_to_reference(warp)
    segs = segment(data, schema, spec.capture_rate_hz)
    from corrkit.segmentation import project_to_surface_schema

    contact = project_to_surface_schema(segs[1], spec.surface)
    schedule = extract(contact.data, contact.schema, 1.0 / spec.capture_rate_hz)
    d1 = truth.directions[0]
    gate0, gate1 = truth.gate_window
    worst = 0.0
    for t in range(gate0 - contact.start, gate1 - contact.start):
        frame = schedule.frames[t]
        if frame.zero_variance:
            continue
        cos = abs(np.clip(frame.components[0] @ d1, -1, 1))
        worst = max(worst, np.degrees(np.arccos(cos)))
    assert worst < 3.0


def test_explained_matches_shares(dual_task):
    spec, demos, truth = dual_task
    warp = align(demos)
    data, schema = resample_to_reference(warp)
    segs = segment(data, schema, spec.capture_rate_hz)
    from corrkit.segmentation import project_to_surface_schema

    contact = project_to_surface_schema(segs[1], spec.surface)
    schedule = extract(contact.data, contact.schema, 1.0 / spec.capture_rate_hz)
    gate0, gate1 = truth.gate_window
    mid = (gate0 + gate1) // 2 - contact.start
    frame = schedule.frames[mid]
    for share, got in zip(truth.shares, frame.explained):
        assert abs(share - got) < 0.02


def test_shares_must_sum_to_one():
    with pytest.raises(ValueError):
        SynthSpec(
            name="bad",
            surface=single_coordination_task().surface,
            planted=(
                PlantedComponent("a", {"f_n": 1.0}, 0.6),
                PlantedComponent("b", {"v_tool": 1.0}, 0.6),
            ),
            free_planted=(PlantedComponent("c", {"v_tool": 1.0}, 1.0),),
        )


def test_nonorthogonal_directions_rejected():
    with pytest.raises(ValueError):
        SynthSpec(
            name="bad",
            surface=single_coordination_task().surface,
            planted=(
                PlantedComponent("a", {"f_n": 1.0}, 0.5),
                PlantedComponent("b", {"f_n": 0.9, "v_tool": 0.1}, 0.5),
            ),
            free_planted=(PlantedComponent("c", {"v_tool": 1.0}, 1.0),),
        )


def test_presets_have_expected_structure():
    a = single_coordination_task()
    assert [p.share for p in a.planted] == [0.87, 0.07, 0.06]
    b = dual_structure_task()
    assert [p.share for p in b.planted] == [0.80, 0.15, 0.05]
