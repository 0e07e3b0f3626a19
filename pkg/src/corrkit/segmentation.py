"""Partition warped demonstrations into free-space and in-contact segments.

Contact is detected per demonstration from a low-pass-filtered normal-force
magnitude against a threshold, fused across demonstrations by per-sample
majority vote so every demonstration shares one set of boundaries, and the
boundaries are snapped to the nearest force-gradient peak to undo filter
bias. In-contact segments can then be re-expressed in surface coordinates
for hybrid control.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import signal
from scipy.spatial.transform import Rotation

from .channels import (
    ChannelKind,
    ChannelSchema,
    contact_schema,
    index_of,
    indices_of_kind,
)
from .surface import SurfaceModel

SegmentKind = Literal["free_space", "in_contact"]


class SegmentationError(ValueError):
    pass


@dataclass
class Segment:
    """A contiguous span of the reference timeline, one control regime.

    ``data`` is (N, length, channels) against ``schema``. In-contact segments
    come out of :func:`segment` still in the raw capture channels; run them
    through :func:`project_to_surface_schema` to obtain the hybrid-control
    state variables.
    """

    kind: SegmentKind
    start: int
    end: int  # exclusive reference index
    schema: list[ChannelSchema]
    data: np.ndarray

    @property
    def length(self) -> int:
        return self.end - self.start

    @property
    def n_demos(self) -> int:
        return self.data.shape[0]


def design_force_filter(cutoff_hz: float, rate_hz: float):
    """Second-order Butterworth low-pass used for contact detection."""
    wn = min(cutoff_hz / (rate_hz / 2.0), 0.99)
    return signal.butter(2, wn)


def filter_group_delay_samples(cutoff_hz: float, rate_hz: float) -> int:
    """DC group delay of the contact filter, in samples (rounded up).

    The detection pipeline filters zero-phase, but one filter's worth of
    delay is the natural yardstick for how far a detected boundary may sit
    from the true force transition.
    """
    b, a = design_force_filter(cutoff_hz, rate_hz)
    _, gd = signal.group_delay((b, a), w=[1e-4])
    return int(np.ceil(gd[0]))


def _lowpass(x: np.ndarray, b, a) -> np.ndarray:
    padlen = 3 * max(len(a), len(b))
    if x.shape[-1] <= padlen:
        return x
    return signal.filtfilt(b, a, x, axis=-1)


def _runs(mask: np.ndarray) -> list[tuple[bool, int, int]]:
    runs = []
    start = 0
    for i in range(1, len(mask) + 1):
        if i == len(mask) or mask[i] != mask[start]:
            runs.append((bool(mask[start]), start, i))
            start = i
    return runs


def _merge_short_runs(runs, min_len):
    runs = list(runs)
    while len(runs) > 1:
        lengths = [(e - s) for _, s, e in runs]
        short = [i for i, L in enumerate(lengths) if L < min_len]
        if not short:
            break
        i = min(short, key=lambda k: lengths[k])
        kind, s, e = runs[i]
        if i == 0:
            nk, ns, ne = runs[1]
            runs[0:2] = [(nk, s, ne)]
        elif i == len(runs) - 1:
            pk, ps, pe = runs[-2]
            runs[-2:] = [(pk, ps, e)]
        else:
            pk, ps, _ = runs[i - 1]
            _, _, ne = runs[i + 1]
            runs[i - 1 : i + 2] = [(pk, ps, ne)]
    return runs


def _snap_boundaries(runs, gradient: np.ndarray, window: int):
    """Move internal boundaries to the strongest nearby force transition."""
    if len(runs) < 2:
        return runs
    bounds = [e for _, _, e in runs[:-1]]
    snapped = []
    prev = 0
    for idx, b in enumerate(bounds):
        nxt = bounds[idx + 1] if idx + 1 < len(bounds) else len(gradient)
        lo = max(b - window, prev + 1)
        hi = min(b + window, nxt - 1)
        if hi <= lo:
            snapped.append(b)
            prev = b
            continue
        local = gradient[lo : hi + 1]
        nb = lo + int(np.argmax(local))
        snapped.append(nb)
        prev = nb
    out = []
    cursor = 0
    for i, (kind, _, _) in enumerate(runs):
        end = snapped[i] if i < len(snapped) else runs[-1][2]
        out.append((kind, cursor, end))
        cursor = end
    return out


def free_space_view(schema: list[ChannelSchema]) -> list[int]:
    """Columns of the raw schema that form the free-space state."""
    keep = []
    for kind in (ChannelKind.POSITION, ChannelKind.QUATERNION,
                 ChannelKind.TOOL_SPEED, ChannelKind.EXEC_RATE):
        keep.extend(indices_of_kind(schema, kind))
    return sorted(keep)


def segment(
    warped: np.ndarray,
    schema: list[ChannelSchema],
    capture_rate_hz: float,
    force_channel: str = "f_n",
    threshold: float = 1.0,
    filter_cutoff_hz: float = 5.0,
    min_segment_len: int = 10,
    snap_window: int = 5,
    expect_contact: bool = False,
) -> list[Segment]:
    """Split the warped demo matrix (N, T, channels) into alternating segments.

    All demonstrations share the returned boundaries. Raises when
    ``expect_contact`` is set but no contact was detected anywhere.
    """
    if threshold <= 0:
        raise SegmentationError("threshold must be positive")
    f_idx = index_of(schema, force_channel)
    n, t, _ = warped.shape

    b, a = design_force_filter(filter_cutoff_hz, capture_rate_hz)
    filtered = _lowpass(np.abs(warped[:, :, f_idx]), b, a)
    votes = (filtered > threshold).sum(axis=0)
    fused = votes * 2 > n

    runs = _merge_short_runs(_runs(fused), min_segment_len)
    mean_grad = np.abs(np.gradient(filtered.mean(axis=0)))
    runs = _snap_boundaries(runs, mean_grad, snap_window)

    if expect_contact and not any(kind for kind, _, _ in runs):
        raise SegmentationError(
            "no contact detected although an in-contact task was declared"
        )

    free_cols = free_space_view(schema)
    segments = []
    for contact, s, e in runs:
        if contact:
            segments.append(
                Segment("in_contact", s, e, list(schema), warped[:, s:e, :].copy())
            )
        else:
            seg_schema = [schema[i] for i in free_cols]
            segments.append(
                Segment("free_space", s, e, seg_schema, warped[:, s:e, free_cols].copy())
            )
    return segments


# -- orientation helpers ------------------------------------------------------

def tool_axis(quat_xyzw: np.ndarray) -> np.ndarray:
    """World-frame tool z-axis for a (x, y, z, w) quaternion."""
    return Rotation.from_quat(quat_xyzw).apply([0.0, 0.0, 1.0])


def tilt_angles(axis: np.ndarray, normal, axis_u, axis_v) -> tuple[float, float]:
    """Surface-relative tilt of the tool axis.

    theta_u is the rotation about axis_u (tilt toward -axis_v), theta_v the
    rotation about axis_v (tilt toward axis_u); both are zero when the tool
    axis coincides with the surface normal. The pair is extracted in the
    factored order R_v(theta_v) o R_u(theta_u), making it an exact inverse
    of :func:`quat_from_tilts`.
    """
    cu = float(axis @ axis_u)
    cv = float(axis @ axis_v)
    cn = float(axis @ normal)
    theta_u = float(np.arctan2(-cv, np.hypot(cu, cn)))
    theta_v = float(np.arctan2(cu, cn))
    return theta_u, theta_v


def quat_from_tilts(theta_u: float, theta_v: float, normal, axis_u, axis_v) -> np.ndarray:
    """Quaternion (x, y, z, w) of a tool tilted off the surface normal."""
    a = (
        np.cos(theta_u) * np.sin(theta_v) * np.asarray(axis_u)
        - np.sin(theta_u) * np.asarray(axis_v)
        + np.cos(theta_u) * np.cos(theta_v) * np.asarray(normal)
    )
    ref = np.asarray(axis_u)
    x_t = ref - (ref @ a) * a
    nx = np.linalg.norm(x_t)
    if nx < 1e-9:  # tool axis parallel to axis_u; pick axis_v as the x seed
        ref = np.asarray(axis_v)
        x_t = ref - (ref @ a) * a
        nx = np.linalg.norm(x_t)
    x_t /= nx
    y_t = np.cross(a, x_t)
    mat = np.column_stack([x_t, y_t, a])
    return Rotation.from_matrix(mat).as_quat()


def project_to_surface_schema(
    seg: Segment, surface: SurfaceModel, seed: tuple[float, float] = (0.5, 0.5)
) -> Segment:
    """Re-express an in-contact segment in hybrid-control state variables.

    Cartesian position becomes the nearest-point surface coordinates (u, v);
    orientation becomes tilt angles about the surface principal axes; the
    normal force, tool speed and execution rate carry over. Projection is
    chained sample to sample so it tracks the moving contact point.
    """
    if seg.kind != "in_contact":
        raise SegmentationError("only in-contact segments can be projected")
    pos_idx = indices_of_kind(seg.schema, ChannelKind.POSITION)
    quat_idx = indices_of_kind(seg.schema, ChannelKind.QUATERNION)
    f_idx = index_of(seg.schema, "f_n")
    v_idx = index_of(seg.schema, "v_tool")
    r_idx = index_of(seg.schema, "rate")
    if len(pos_idx) != 3 or len(quat_idx) != 4:
        raise SegmentationError("projection needs xyz position and a quaternion")

    out_schema = contact_schema()
    n, t, _ = seg.data.shape
    out = np.empty((n, t, len(out_schema)))
    for i in range(n):
        uv = seed
        for k in range(t):
            p = seg.data[i, k, pos_idx]
            uv = surface.project(p, seed=uv)
            normal, axis_u, axis_v = surface.frame(*uv)
            axis = tool_axis(seg.data[i, k, quat_idx])
            th_u, th_v = tilt_angles(axis, normal, axis_u, axis_v)
            out[i, k] = [
                uv[0],
                uv[1],
                max(seg.data[i, k, f_idx], 0.0),
                seg.data[i, k, v_idx],
                seg.data[i, k, r_idx],
                th_u,
                th_v,
            ]
    return Segment(seg.kind, seg.start, seg.end, out_schema, out)
