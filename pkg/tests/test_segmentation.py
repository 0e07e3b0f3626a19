import numpy as np
import pytest

from corrkit.channels import ChannelKind, ChannelSchema, raw_capture_schema
from corrkit.segmentation import (
    SegmentationError,
    filter_group_delay_samples,
    quat_from_tilts,
    segment,
    tilt_angles,
    tool_axis,
)
from corrkit.surface import cylinder_patch, flat_plane

RATE_HZ = 50.0


def _schema():
    return [
        ChannelSchema("x", ChannelKind.POSITION, spatial_axis="x"),
        ChannelSchema("v_tool", ChannelKind.TOOL_SPEED),
        ChannelSchema("f_n", ChannelKind.FORCE_NORMAL),
    ]


def _pulse_demos(n_demos, t_total, c0, c1, rng, force=6.0):
    """Force turns on smoothly inside [c0, c1); positions ramp linearly."""
    t = np.arange(t_total)
    data = np.zeros((n_demos, t_total, 3))
    ramp = 3
    prof = np.zeros(t_total)
    prof[c0:c1] = force
    for k in range(1, ramp):
        frac = k / ramp
        if c0 + k < t_total:
            prof[c0 + k - 1] = force * frac
        if c1 - k >= 0:
            prof[c1 - k] = force * frac
    for i in range(n_demos):
        data[i, :, 0] = t / t_total
        data[i, :, 1] = 2.0
        data[i, :, 2] = prof + 0.02 * rng.normal(size=t_total)
    return data


def test_boundaries_within_group_delay():
    rng = np.random.default_rng(1)
    delay = filter_group_delay_samples(5.0, RATE_HZ)
    for case in range(12):
        t_total = int(rng.integers(120, 200))
        c0 = int(rng.integers(25, 45))
        c1 = int(rng.integers(t_total - 45, t_total - 25))
        data = _pulse_demos(4, t_total, c0, c1, rng)
        segs = segment(data, _schema(), RATE_HZ)
        contact = [s for s in segs if s.kind == "in_contact"]
        assert len(contact) == 1, f"case {case}: expected one contact segment"
        assert abs(contact[0].start - c0) <= delay
        assert abs(contact[0].end - c1) <= delay


def test_three_section_structure():
    rng = np.random.default_rng(2)
    data = _pulse_demos(4, 160, 40, 120, rng)
    segs = segment(data, _schema(), RATE_HZ)
    assert [s.kind for s in segs] == ["free_space", "in_contact", "free_space"]
    assert segs[0].start == 0
    assert segs[-1].end == 160
    for a, b in zip(segs, segs[1:]):
        assert a.end == b.start


def test_short_contact_blip_merged():
    rng = np.random.default_rng(3)
    data = _pulse_demos(4, 160, 40, 120, rng)
    data[:, 70:73, 2] = 0.0  # three-sample dropout mid-contact
    segs = segment(data, _schema(), RATE_HZ, min_segment_len=10)
    assert [s.kind for s in segs] == ["free_space", "in_contact", "free_space"]


def test_majority_vote_ignores_minority_demo():
    rng = np.random.default_rng(4)
    data = _pulse_demos(5, 160, 40, 120, rng)
    data[0, :, 2] = 0.0  # one demo lost force sensing entirely
    segs = segment(data, _schema(), RATE_HZ)
    assert [s.kind for s in segs] == ["free_space", "in_contact", "free_space"]


def test_free_space_segments_drop_force():
    rng = np.random.default_rng(5)
    data = _pulse_demos(4, 160, 40, 120, rng)
    segs = segment(data, _schema(), RATE_HZ)
    free_names = [c.name for c in segs[0].schema]
    assert "f_n" not in free_names
    contact_names = [c.name for c in segs[1].schema]
    assert "f_n" in contact_names


def test_expect_contact_raises_when_none():
    rng = np.random.default_rng(6)
    data = _pulse_demos(4, 120, 40, 80, rng, force=0.2)  # never crosses 1 N
    with pytest.raises(SegmentationError):
        segment(data, _schema(), RATE_HZ, expect_contact=True)


def test_tilt_angles_invert_quat_from_tilts():
    rng = np.random.default_rng(7)
    surf = cylinder_patch()
    for _ in range(50):
        u, v = rng.uniform(0.1, 0.9, 2)
        normal, axis_u, axis_v = surf.frame(u, v)
        th_u, th_v = rng.uniform(-1.0, 1.0, 2)
        quat = quat_from_tilts(th_u, th_v, normal, axis_u, axis_v)
        assert abs(np.linalg.norm(quat) - 1.0) < 1e-12
        got_u, got_v = tilt_angles(tool_axis(quat), normal, axis_u, axis_v)
        assert abs(got_u - th_u) < 1e-9
        assert abs(got_v - th_v) < 1e-9


def test_zero_tilt_means_axis_along_normal():
    surf = flat_plane()
    normal, axis_u, axis_v = surf.frame(0.5, 0.5)
    quat = quat_from_tilts(0.0, 0.0, normal, axis_u, axis_v)
    assert np.allclose(tool_axis(quat), normal, atol=1e-12)
