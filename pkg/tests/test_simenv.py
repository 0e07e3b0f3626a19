import numpy as np
import pytest

from corrkit.simenv import (
    Scenario,
    load_scenario,
    local_density,
    make_field,
    removal_fraction,
    save_scenario,
    seeded_patch_scenario,
    shipped_scenario,
    step_env,
)


def test_subthreshold_force_removes_nothing():
    field = make_field(shipped_scenario())
    before = field.density.sum()
    events = step_env(field, (0.5, 0.5, 1.99, 3.0), 0.01)
    assert field.density.sum() == before
    assert events == []


def test_zero_speed_removes_nothing():
    field = make_field(shipped_scenario())
    before = field.density.sum()
    step_env(field, (0.5, 0.5, 10.0, 0.0), 0.01)
    assert field.density.sum() == before


def test_removal_linear_in_force_excess_and_speed():
    sc = shipped_scenario()
    f1, f2 = make_field(sc), make_field(sc)
    step_env(f1, (0.5, 0.5, 4.0, 2.0), 0.01)
    step_env(f2, (0.5, 0.5, 6.0, 1.0), 0.01)
    r1 = make_field(sc).density.sum() - f1.density.sum()
    r2 = make_field(sc).density.sum() - f2.density.sum()
    assert r1 == pytest.approx(r2, rel=1e-12)


def test_erosion_confined_to_footprint():
    sc = shipped_scenario()
    field = make_field(sc)
    before = field.density.copy()
    step_env(field, (0.5, 0.5, 10.0, 3.0), 0.05)
    changed = np.argwhere(before != field.density)
    nu, nv = field.density.shape
    centers_u = (changed[:, 0] + 0.5) / nu
    centers_v = (changed[:, 1] + 0.5) / nv
    dist = np.hypot(centers_u - 0.5, centers_v - 0.5)
    assert dist.max() <= sc.tool_radius + 1e-9


def test_density_never_negative():
    field = make_field(shipped_scenario())
    for _ in range(200):
        step_env(field, (0.5, 0.5, 40.0, 5.0), 0.05)
    assert field.density.min() >= 0.0


def test_collision_event_on_obstacle():
    field = make_field(shipped_scenario())
    assert step_env(field, (0.5, 0.83, 5.0, 1.0), 0.01) == ["collision"]
    assert step_env(field, (0.5, 0.5, 5.0, 1.0), 0.01) == []


def test_removal_fraction_endpoints():
    field = make_field(shipped_scenario())
    assert removal_fraction(field) == 0.0
    field.density[:] = 0.0
    assert removal_fraction(field) == 1.0


def test_local_density_sees_patches():
    field = make_field(shipped_scenario())
    assert local_density(field, 0.5, 0.5) > local_density(field, 0.5, 0.2)


def test_scenario_round_trip(tmp_path):
    sc = seeded_patch_scenario(seed=5)
    path = tmp_path / "scenario.json"
    save_scenario(sc, path)
    sc2 = load_scenario(path)
    assert sc2.name == sc.name
    assert sc2.patches == sc.patches
    assert sc2.removal_rate == sc.removal_rate
    assert np.array_equal(make_field(sc).density, make_field(sc2).density)


def test_seeded_scenario_deterministic():
    a = seeded_patch_scenario(seed=9)
    b = seeded_patch_scenario(seed=9)
    assert a.patches == b.patches


def test_unknown_format_rejected(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"format": "other", "version": 1}')
    with pytest.raises(Exception):
        load_scenario(path)


def test_field_copy_is_independent():
    field = make_field(shipped_scenario())
    clone = field.copy()
    step_env(clone, (0.5, 0.5, 10.0, 3.0), 0.05)
    assert field.density.sum() != clone.density.sum()


def test_out_of_domain_tool_rejected():
    field = make_field(shipped_scenario())
    with pytest.raises(Exception):
        step_env(field, (1.4, 0.5, 5.0, 1.0), 0.01)
