import numpy as np
import pytest

from corrkit.channels import (
    ChannelKind,
    ChannelSchema,
    SchemaError,
    contact_schema,
    free_space_schema,
    index_of,
    indices_of_kind,
    ranges,
    raw_capture_schema,
    validate_schema,
    validate_vector,
)


def test_default_ranges_by_kind():
    assert ChannelSchema("f", ChannelKind.FORCE_NORMAL).normalization_range == 20.0
    assert ChannelSchema("v", ChannelKind.TOOL_SPEED).normalization_range == 5.0
    assert ChannelSchema("r", ChannelKind.EXEC_RATE).normalization_range == 2.0
    assert ChannelSchema("t", ChannelKind.SURFACE_ANGLE).normalization_range == 1.57
    assert ChannelSchema("x", ChannelKind.POSITION).normalization_range == 1.0


def test_explicit_range_kept():
    ch = ChannelSchema("f", ChannelKind.FORCE_NORMAL, normalization_range=10.0)
    assert ch.normalization_range == 10.0


def test_nonpositive_range_rejected():
    with pytest.raises(SchemaError):
        ChannelSchema("f", ChannelKind.FORCE_NORMAL, normalization_range=-1.0)


def test_raw_capture_schema_layout():
    schema = raw_capture_schema()
    assert [c.name for c in schema] == [
        "x", "y", "z", "qx", "qy", "qz", "qw", "v_tool", "f_n",
    ]
    assert [schema[i].spatial_axis for i in range(3)] == ["x", "y", "z"]


def test_contact_schema_layout():
    schema = contact_schema()
    assert [c.name for c in schema] == [
        "u", "v", "f_n", "v_tool", "rate", "theta_u", "theta_v",
    ]
    assert schema[2].kind is ChannelKind.FORCE_NORMAL


def test_free_space_drops_force():
    names = [c.name for c in free_space_schema()]
    assert "f_n" not in names
    assert "v_tool" in names


def test_duplicate_names_rejected():
    schema = [
        ChannelSchema("a", ChannelKind.POSITION, spatial_axis="x"),
        ChannelSchema("a", ChannelKind.POSITION, spatial_axis="y"),
    ]
    with pytest.raises(SchemaError):
        validate_schema(schema)


def test_vector_length_checked():
    schema = contact_schema()
    validate_vector(np.zeros(len(schema)), schema)
    with pytest.raises(SchemaError):
        validate_vector(np.zeros(len(schema) + 1), schema)


def test_index_helpers():
    schema = contact_schema()
    assert index_of(schema, "f_n") == 2
    with pytest.raises(SchemaError):
        index_of(schema, "missing")
    assert indices_of_kind(schema, ChannelKind.SURFACE_COORD) == [0, 1]
    assert np.allclose(ranges(schema)[:3], [1.0, 1.0, 20.0])
