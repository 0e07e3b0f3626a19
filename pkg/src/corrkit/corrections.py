"""Per-frame principal component analysis of demonstration variability.

At every aligned time sample the cross-demonstration state matrix is
normalized by channel range, mean-removed, and decomposed by SVD. The right
singular vectors are the correction directions offered to the operator; each
is scaled so unit device input spans three standard deviations of what the
demonstrators actually varied. Components are sign-aligned frame to frame so
the directions do not flip mid-execution.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .channels import ChannelKind, ChannelSchema, index_of, ranges

SIGMA_FLOOR = 1e-9


class CorrectionError(ValueError):
    pass


@dataclass
class CorrectionFrame:
    """PCA result at one reference sample.

    components are orthonormal in normalized state space, rows descending by
    singular value; scaled rows are the same directions expressed as raw-unit
    state offsets worth three demonstrated standard deviations. explained
    covers the full spectrum (sums to 1 when variance exists), independent of
    how many components are retained.
    """

    t: int
    mean: np.ndarray  # raw units
    components: np.ndarray  # (n_valid, m) normalized space
    singulars: np.ndarray  # (n_valid,)
    scaled: np.ndarray  # (n_valid, m) raw units
    explained: np.ndarray  # full spectrum fractions
    zero_variance: bool = False

    @property
    def n_valid(self) -> int:
        return self.components.shape[0]


@dataclass
class CorrectionSchedule:
    """Concatenated per-frame PCA over one segment."""

    frames: list[CorrectionFrame]
    schema: list[ChannelSchema]
    frame_dt: float
    k_retained: int = 1
    smoothing_time_constant: float = 0.0

    def __post_init__(self):
        if not self.frames:
            raise CorrectionError("schedule needs at least one frame")


def _frame_svd(block: np.ndarray, rng_vec: np.ndarray):
    """Normalized, mean-removed SVD of one (N, m) cross-demo sample."""
    n = block.shape[0]
    normed = block / rng_vec
    mean_n = normed.mean(axis=0)
    d = normed - mean_n
    _, sing, vt = np.linalg.svd(d, full_matrices=False)
    valid = sing >= SIGMA_FLOOR
    return sing[valid], vt[valid], sing, block.mean(axis=0)


def extract(data: np.ndarray, schema: list[ChannelSchema], frame_dt: float) -> CorrectionSchedule:
    """Build the correction schedule for one segment's (N, T, m) data."""
    if data.ndim != 3 or data.shape[0] < 2:
        raise CorrectionError("need (N >= 2, T, channels) demonstration data")
    n, t_len, m = data.shape
    if m != len(schema):
        raise CorrectionError("data width disagrees with schema")
    rng_vec = ranges(schema)

    frames: list[CorrectionFrame] = []
    prev_components: np.ndarray | None = None
    for t in range(t_len):
        sing, comps, spectrum, mean_raw = _frame_svd(data[:, t, :], rng_vec)
        total = float((spectrum**2).sum())
        if total >= SIGMA_FLOOR**2:
            explained = spectrum**2 / total
        else:
            explained = np.zeros_like(spectrum)
        if len(sing) == 0:
            # degenerate frame: keep the previous directions, offer no motion
            if prev_components is not None and len(prev_components):
                comps = prev_components.copy()
            else:
                comps = np.zeros((0, m))
            frames.append(
                CorrectionFrame(
                    t, mean_raw, comps, np.zeros(len(comps)),
                    np.zeros_like(comps), explained, zero_variance=True,
                )
            )
            prev_components = comps if len(comps) else prev_components
            continue
        if prev_components is not None:
            upto = min(len(comps), len(prev_components))
            for k in range(upto):
                if comps[k] @ prev_components[k] < 0:
                    comps[k] = -comps[k]
        scaled = comps * (3.0 * sing[:, None] / np.sqrt(n)) * rng_vec
        frames.append(CorrectionFrame(t, mean_raw, comps, sing, scaled, explained))
        prev_components = comps
    _orient_force_positive(frames, schema)
    return CorrectionSchedule(frames, list(schema), frame_dt)


def _orient_force_positive(frames: list[CorrectionFrame], schema: list[ChannelSchema]) -> None:
    """Fix the first component's overall sign for the 1-DOF convention.

    Positive device input should increase applied force. A per-frame flip
    would break sign continuity whenever the force coefficient crosses zero,
    so the whole segment's chain of first components is flipped together
    based on its mean coefficient; the anchor channel is force when present,
    otherwise the coefficient of largest mean magnitude.
    """
    kinds = [c.kind for c in schema]
    if ChannelKind.FORCE_NORMAL in kinds:
        anchor = kinds.index(ChannelKind.FORCE_NORMAL)
    else:
        anchor = None
    coeffs = []
    for fr in frames:
        if fr.n_valid:
            coeffs.append(fr.components[0])
    if not coeffs:
        return
    mean_coeff = np.mean(coeffs, axis=0)
    if anchor is None or abs(mean_coeff[anchor]) < 1e-12:
        anchor = int(np.argmax(np.abs(mean_coeff)))
    if mean_coeff[anchor] < 0:
        for fr in frames:
            if fr.n_valid:
                fr.components[0] = -fr.components[0]
                fr.scaled[0] = -fr.scaled[0]


def smooth_schedule(schedule: CorrectionSchedule, time_constant: float) -> CorrectionSchedule:
    """Exponentially smooth the scaled correction vectors across frames.

    Acts on outputs only: components and singulars stay raw, so the smoothed
    scaled rows are no longer exactly 3-sigma multiples of unit directions.
    """
    if time_constant < 0:
        raise CorrectionError("time constant must be non-negative")
    if time_constant == 0:
        return replace(schedule, smoothing_time_constant=0.0)
    gain = 1.0 - float(np.exp(-schedule.frame_dt / time_constant))
    k_max = max(fr.n_valid for fr in schedule.frames)
    m = len(schedule.schema)
    state = np.zeros((k_max, m))
    seeded = False
    out_frames = []
    for fr in schedule.frames:
        target = np.zeros((k_max, m))
        target[: fr.n_valid] = fr.scaled
        if not seeded:
            state = target.copy()
            seeded = True
        else:
            state = state + gain * (target - state)
        out_frames.append(replace(fr, scaled=state[: fr.n_valid].copy()))
    return replace(schedule, frames=out_frames, smoothing_time_constant=time_constant)


@dataclass
class KReport:
    """Human-facing summary backing the 1-vs-3 DOF recommendation."""

    k: int
    mean_explained: np.ndarray
    threshold: float
    zero_variance: bool = False
    warning: str = ""


def choose_k(schedule: CorrectionSchedule, threshold: float = 0.85) -> KReport:
    """Recommend 1-DOF input when one direction dominates the variance."""
    live = [fr for fr in schedule.frames if not fr.zero_variance]
    if not live:
        return KReport(
            1, np.zeros(1), threshold, zero_variance=True,
            warning="no demonstrated variance anywhere in the segment",
        )
    depth = max(len(fr.explained) for fr in live)
    acc = np.zeros(depth)
    for fr in live:
        acc[: len(fr.explained)] += fr.explained
    mean_explained = acc / len(live)
    k = 1 if mean_explained[0] >= threshold else 3
    return KReport(k, mean_explained, threshold)


def frame_variance_identity(data_t: np.ndarray, schema: list[ChannelSchema]) -> tuple[float, float]:
    """(sum sigma^2, total normalized variance) for one (N, m) sample block."""
    rng_vec = ranges(schema)
    normed = data_t / rng_vec
    d = normed - normed.mean(axis=0)
    sing = np.linalg.svd(d, compute_uv=False)
    return float((sing**2).sum()), float((d**2).sum())
