"""Channel schemas: what each column of a trajectory means and how it scales.

Every trajectory in the toolkit (raw demonstration, warped matrix, segment
data, executor state) is a float matrix whose columns are described by a list
of :class:`ChannelSchema`. The schema carries the normalization range used to
put heterogeneous units (meters, newtons, volts) on a common footing before
any variance analysis, and tags the channels that have a spatial meaning so
low-DOF input can be assigned a world direction.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence


class ChannelKind(str, enum.Enum):
    POSITION = "position-cartesian"
    QUATERNION = "quaternion-component"
    SURFACE_COORD = "surface-coordinate"
    FORCE_NORMAL = "force-normal"
    TOOL_SPEED = "tool-speed"
    EXEC_RATE = "execution-rate"
    SURFACE_ANGLE = "surface-angle"


# Default normalization range per kind: 1 m positions, unit quaternions,
# unit surface coordinates, 20 N normal force, 5 V tool speed command,
# execution-rate span 2, 1.57 rad surface-relative angles.
DEFAULT_RANGES = {
    ChannelKind.POSITION: 1.0,
    ChannelKind.QUATERNION: 1.0,
    ChannelKind.SURFACE_COORD: 1.0,
    ChannelKind.FORCE_NORMAL: 20.0,
    ChannelKind.TOOL_SPEED: 5.0,
    ChannelKind.EXEC_RATE: 2.0,
    ChannelKind.SURFACE_ANGLE: 1.57,
}

DEFAULT_UNITS = {
    ChannelKind.POSITION: "m",
    ChannelKind.QUATERNION: "",
    ChannelKind.SURFACE_COORD: "",
    ChannelKind.FORCE_NORMAL: "N",
    ChannelKind.TOOL_SPEED: "V",
    ChannelKind.EXEC_RATE: "",
    ChannelKind.SURFACE_ANGLE: "rad",
}


class SchemaError(ValueError):
    """A channel schema or a vector checked against one is invalid."""


@dataclass(frozen=True)
class ChannelSchema:
    """One named channel of a state vector.

    ``spatial_axis`` is set only for channels that carry a spatial
    correspondence (an ``x``/``y``/``z`` axis for world-frame channels;
    surface-frame channels are resolved against the live surface frame by the
    input mapping instead).
    """

    name: str
    kind: ChannelKind
    normalization_range: float = 0.0
    unit: str = ""
    spatial_axis: Optional[str] = None

    def __post_init__(self):
        if self.normalization_range == 0.0:
            object.__setattr__(
                self, "normalization_range", DEFAULT_RANGES[self.kind]
            )
        if not self.unit:
            object.__setattr__(self, "unit", DEFAULT_UNITS[self.kind])
        if self.normalization_range <= 0:
            raise SchemaError(
                f"channel {self.name!r}: normalization_range must be > 0, "
                f"got {self.normalization_range}"
            )
        if self.spatial_axis is not None and self.spatial_axis not in ("x", "y", "z"):
            raise SchemaError(
                f"channel {self.name!r}: spatial_axis must be x, y or z"
            )

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "kind": self.kind.value,
            "unit": self.unit,
            "normalization_range": self.normalization_range,
        }
        if self.spatial_axis is not None:
            d["spatial_axis"] = self.spatial_axis
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ChannelSchema":
        return cls(
            name=d["name"],
            kind=ChannelKind(d["kind"]),
            normalization_range=float(d["normalization_range"]),
            unit=d.get("unit", ""),
            spatial_axis=d.get("spatial_axis"),
        )


def validate_schema(channels: Sequence[ChannelSchema]) -> None:
    """Check schema-level invariants: unique names, complete quaternion groups."""
    names = [c.name for c in channels]
    if len(set(names)) != len(names):
        raise SchemaError(f"duplicate channel names in schema: {names}")
    n_quat = sum(1 for c in channels if c.kind is ChannelKind.QUATERNION)
    if n_quat not in (0, 4):
        raise SchemaError(
            f"quaternion channels must come as a complete group of 4, got {n_quat}"
        )


def validate_vector(channels: Sequence[ChannelSchema], values: Sequence[float]) -> None:
    if len(values) != len(channels):
        raise SchemaError(
            f"vector length {len(values)} does not match schema length {len(channels)}"
        )


def index_of(channels: Sequence[ChannelSchema], name: str) -> int:
    for i, c in enumerate(channels):
        if c.name == name:
            return i
    raise SchemaError(f"channel {name!r} not in schema")


def indices_of_kind(channels: Sequence[ChannelSchema], kind: ChannelKind) -> list[int]:
    return [i for i, c in enumerate(channels) if c.kind is kind]


def ranges(channels: Sequence[ChannelSchema]):
    import numpy as np

    return np.array([c.normalization_range for c in channels], dtype=float)


def raw_capture_schema() -> list[ChannelSchema]:
    """Schema of an as-captured demonstration log.

    World position, tool quaternion, tool speed command, and the normal force
    read at the tool tip (zero while in free space).
    """
    return [
        ChannelSchema("x", ChannelKind.POSITION, spatial_axis="x"),
        ChannelSchema("y", ChannelKind.POSITION, spatial_axis="y"),
        ChannelSchema("z", ChannelKind.POSITION, spatial_axis="z"),
        ChannelSchema("qx", ChannelKind.QUATERNION),
        ChannelSchema("qy", ChannelKind.QUATERNION),
        ChannelSchema("qz", ChannelKind.QUATERNION),
        ChannelSchema("qw", ChannelKind.QUATERNION),
        ChannelSchema("v_tool", ChannelKind.TOOL_SPEED),
        ChannelSchema("f_n", ChannelKind.FORCE_NORMAL),
    ]


def free_space_schema() -> list[ChannelSchema]:
    """State channels used while moving through free space (position control)."""
    return [
        ChannelSchema("x", ChannelKind.POSITION, spatial_axis="x"),
        ChannelSchema("y", ChannelKind.POSITION, spatial_axis="y"),
        ChannelSchema("z", ChannelKind.POSITION, spatial_axis="z"),
        ChannelSchema("qx", ChannelKind.QUATERNION),
        ChannelSchema("qy", ChannelKind.QUATERNION),
        ChannelSchema("qz", ChannelKind.QUATERNION),
        ChannelSchema("qw", ChannelKind.QUATERNION),
        ChannelSchema("v_tool", ChannelKind.TOOL_SPEED),
        ChannelSchema("rate", ChannelKind.EXEC_RATE),
    ]


def contact_schema() -> list[ChannelSchema]:
    """State channels used while pressing against the surface (hybrid control)."""
    return [
        ChannelSchema("u", ChannelKind.SURFACE_COORD),
        ChannelSchema("v", ChannelKind.SURFACE_COORD),
        ChannelSchema("f_n", ChannelKind.FORCE_NORMAL),
        ChannelSchema("v_tool", ChannelKind.TOOL_SPEED),
        ChannelSchema("rate", ChannelKind.EXEC_RATE),
        ChannelSchema("theta_u", ChannelKind.SURFACE_ANGLE),
        ChannelSchema("theta_v", ChannelKind.SURFACE_ANGLE),
    ]
