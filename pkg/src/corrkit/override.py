"""Two-region device input law with a haptic wall.

Inside the wall the input passes through unchanged and maps to a bounded,
proportional correction. Penetrating the wall switches to integral
accumulation, so sustained pressure grows the correction without bound. The
resistive force that a haptic device would render is computed alongside and
streamed to the UI as a gauge; no physical device is driven here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class OverrideError(ValueError):
    pass


@dataclass(frozen=True)
class OverrideConfig:
    """d_wall and gains of the two-region law. gamma is per second and is
    scaled by the tick dt. latch_override keeps the accumulated override
    when the handle re-enters the proportional region instead of snapping
    back to proportional tracking."""

    d_wall: float = 0.6
    gamma: float = 0.5
    k: float = 1.0
    k_wall: float = 10.0
    b: float = 0.05
    latch_override: bool = False

    def __post_init__(self):
        if not (self.d_wall > 0 and self.gamma > 0 and self.b > 0):
            raise OverrideError("d_wall, gamma, b must be positive")
        if not (self.k_wall > self.k > 0):
            raise OverrideError("need k_wall > k > 0")


@dataclass
class OverrideState:
    u_prev: np.ndarray
    d_prev: np.ndarray

    @classmethod
    def zeros(cls, n_axes: int) -> "OverrideState":
        return cls(np.zeros(n_axes), np.zeros(n_axes))


def update(
    state: OverrideState, d: np.ndarray, dt: float, config: OverrideConfig
) -> tuple[np.ndarray, np.ndarray, OverrideState]:
    """One tick of the input law, per axis. Returns (u_t, f_t, new state)."""
    d = np.atleast_1d(np.asarray(d, dtype=float))
    if d.shape != state.u_prev.shape:
        raise OverrideError("input width disagrees with state")
    if dt <= 0:
        raise OverrideError("dt must be positive")
    d_dot = (d - state.d_prev) / dt
    inside = np.abs(d) <= config.d_wall
    sgn = np.sign(d)
    over = np.abs(d) - config.d_wall

    u_t = np.where(inside, d, state.u_prev + config.gamma * dt * sgn * over)
    if config.latch_override:
        held = inside & (np.abs(state.u_prev) > config.d_wall)
        u_t = np.where(held, state.u_prev, u_t)

    f_t = config.k * d + config.b * d_dot
    f_t = f_t + np.where(inside, 0.0, config.k_wall * (d - sgn * config.d_wall))
    return u_t, f_t, OverrideState(u_t.copy(), d.copy())


def reset(state: OverrideState) -> OverrideState:
    """Zero the accumulator (session start, segment transitions)."""
    return OverrideState(np.zeros_like(state.u_prev), state.d_prev.copy())
