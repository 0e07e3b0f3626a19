"""Map low-DOF device input onto the per-frame correction directions.

1-DOF input scales the first component directly. 3-DOF input is assigned
spatial meaning: each component's spatially tagged coefficients (cartesian
position axes, the surface normal for force, the live surface axes for the
(u, v) coordinates) are summed into a world-frame direction, orthogonalized
against the preceding components and normalized. Device input projected on
those directions drives the corresponding corrections.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import ChannelKind, ChannelSchema
from .corrections import CorrectionFrame

DEGENERACY_FLOOR = 1e-6

_AXES = {"x": np.array([1.0, 0.0, 0.0]),
         "y": np.array([0.0, 1.0, 0.0]),
         "z": np.array([0.0, 0.0, 1.0])}


class MappingError(ValueError):
    pass


@dataclass(frozen=True)
class SpatialBasis:
    """World-frame directions for up to three components; invalid rows are
    zero and contribute nothing."""

    directions: np.ndarray  # (K, 3)
    valid: np.ndarray  # (K,) bool

    def __post_init__(self):
        for k in range(len(self.valid)):
            if self.valid[k]:
                if abs(np.linalg.norm(self.directions[k]) - 1.0) > 1e-9:
                    raise MappingError("valid directions must be unit length")


def spatial_part(
    component: np.ndarray,
    schema: list[ChannelSchema],
    surface_frame: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None,
) -> np.ndarray:
    """Accumulate one component's spatially tagged coefficients into a
    world 3-vector. surface_frame = (normal, axis_u, axis_v) at the current
    nominal pose; required when the schema carries force or surface
    coordinates."""
    acc = np.zeros(3)
    for i, ch in enumerate(schema):
        c = component[i]
        if ch.kind is ChannelKind.POSITION and ch.spatial_axis:
            acc += c * _AXES[ch.spatial_axis]
        elif ch.kind is ChannelKind.FORCE_NORMAL:
            if surface_frame is None:
                raise MappingError("force channel needs a surface frame")
            acc += c * np.asarray(surface_frame[0])
        elif ch.kind is ChannelKind.SURFACE_COORD:
            if surface_frame is None:
                raise MappingError("surface coordinates need a surface frame")
            axis = surface_frame[1] if ch.name == "u" else surface_frame[2]
            acc += c * np.asarray(axis)
    return acc


def spatial_basis(
    frame: CorrectionFrame,
    schema: list[ChannelSchema],
    surface_frame: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None,
    k_max: int = 3,
) -> SpatialBasis:
    """Algorithm: sum spatial coefficients, orthogonalize, normalize."""
    k = min(k_max, frame.n_valid)
    dirs = np.zeros((k_max, 3))
    valid = np.zeros(k_max, dtype=bool)
    kept: list[np.ndarray] = []
    for j in range(k):
        d = spatial_part(frame.components[j], schema, surface_frame)
        for p in kept:
            d = d - (d @ p) * p
        norm = np.linalg.norm(d)
        if norm < DEGENERACY_FLOOR:
            continue
        d = d / norm
        dirs[j] = d
        valid[j] = True
        kept.append(d)
    return SpatialBasis(dirs, valid)


def map_input_3dof(
    u: np.ndarray, basis: SpatialBasis, frame: CorrectionFrame
) -> np.ndarray:
    """delta-y = sum over valid k of (u . d_k) * scaled_k, in raw units."""
    u = np.asarray(u, dtype=float)
    if u.shape != (3,):
        raise MappingError("3-DOF input must be a 3-vector")
    out = np.zeros(frame.scaled.shape[1] if frame.n_valid else len(frame.mean))
    for k in range(min(len(basis.valid), frame.n_valid)):
        if basis.valid[k]:
            out += float(u @ basis.directions[k]) * frame.scaled[k]
    return out


def map_input_1dof(u: float, frame: CorrectionFrame) -> np.ndarray:
    """delta-y = u * scaled_1; the extraction stage already oriented the
    first component so positive input increases applied force."""
    if frame.n_valid == 0:
        return np.zeros(len(frame.mean))
    return float(u) * frame.scaled[0]
