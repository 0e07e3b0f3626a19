"""Dynamic movement primitives for per-segment nominal behavior.

Each channel gets an independent second-order attractor driven by a learned
forcing function of the phase variable s, which decays under a first-order
canonical system. Every segment is learned twice, forward and time-reversed,
so execution can be reversed by swapping primitives instead of integrating
with a negative time constant (which is unstable).

State is kept as (x, z, s) with z the time-constant-scaled velocity z = tau
* dx/dt; the execution-rate factor then multiplies both integrators
symmetrically and the canonical phase admits an exact per-step exponential
update.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .channels import ChannelSchema, indices_of_kind, ChannelKind


class DmpError(ValueError):
    pass


@dataclass(frozen=True)
class DmpParams:
    """Constants of the attractor and canonical systems.

    beta = alpha/4 is critical damping. tau is the nominal segment duration
    in seconds; rate corrections scale it at integration time.
    """

    tau: float
    alpha: float = 60.0
    beta: float = None  # type: ignore[assignment]
    a_canonical: float = 4.0
    n_basis: int = 30
    ridge: float = 1e-10

    @property
    def s_end(self) -> float:
        """Phase value at the nominal end of the segment."""
        return float(np.exp(-self.a_canonical))

    def __post_init__(self):
        if self.beta is None:
            object.__setattr__(self, "beta", self.alpha / 4.0)
        if min(self.tau, self.alpha, self.beta, self.a_canonical) <= 0:
            raise DmpError("tau, alpha, beta, a_canonical must be positive")
        if self.n_basis < 2:
            raise DmpError("need at least 2 basis functions")


@dataclass(frozen=True)
class LearnedDmp:
    """Immutable per-segment primitive for one direction of travel.

    z0 is the demonstrated initial velocity scaled by tau; seeding rollouts
    with it keeps reproduction faithful when the segment starts moving.
    """

    weights: np.ndarray  # (channels, n_basis)
    x0: np.ndarray
    g: np.ndarray
    z0: np.ndarray
    direction: Literal["forward", "backward"]

    def __post_init__(self):
        if self.weights.ndim != 2 or self.weights.shape[0] != len(self.g):
            raise DmpError("weight matrix must be channels x n_basis")


@dataclass
class DmpState:
    """Integration state: position x, scaled velocity z = tau*dx/dt, phase s."""

    x: np.ndarray
    z: np.ndarray
    s: float


def basis_centers_widths(params: DmpParams) -> tuple[np.ndarray, np.ndarray]:
    """Gaussian centers on the canonical decay, widths set by center spacing.

    Spacing-based widths keep resolution in phase regions where the decay
    compresses many samples into a narrow band of s, which is where forcing
    targets change fastest.
    """
    times = np.linspace(0.0, 1.0, params.n_basis)
    c = np.exp(-params.a_canonical * times)
    d = np.diff(c)
    h = np.empty(params.n_basis)
    h[:-1] = 1.0 / (2.0 * (0.55 * d) ** 2)
    h[-1] = h[-2]
    return c, h


def forcing(s, weights: np.ndarray, params: DmpParams) -> np.ndarray:
    """f(s) per channel: phase-gated normalized basis expansion.

    The conventional goal-amplitude factor is omitted so segments whose
    start and goal coincide on some channel still reproduce their shape.
    """
    c, h = basis_centers_widths(params)
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    psi = np.exp(-h * (s_arr[:, None] - c) ** 2)  # (S, n_basis)
    denom = psi.sum(axis=1)
    safe = denom > 1e-12
    out = np.zeros((len(s_arr), weights.shape[0]))
    if safe.any():
        num = psi[safe] @ weights.T  # (S_safe, channels)
        out[safe] = s_arr[safe, None] * num / denom[safe, None]
    return out[0] if np.isscalar(s) or np.ndim(s) == 0 else out


def _smoothed(y: np.ndarray, window: int = 5) -> np.ndarray:
    if len(y) < window:
        return y
    pad = window // 2
    padded = np.pad(y, ((pad, pad), (0, 0)), mode="edge")
    kernel = np.ones(window) / window
    out = np.empty_like(y)
    for c in range(y.shape[1]):
        out[:, c] = np.convolve(padded[:, c], kernel, mode="valid")
    return out


def _fit_weights(traj: np.ndarray, dt: float, params: DmpParams) -> tuple[np.ndarray, np.ndarray]:
    t_len = traj.shape[0]
    smooth = _smoothed(traj)
    ydot = np.gradient(smooth, dt, axis=0)
    yddot = np.gradient(ydot, dt, axis=0)
    g = traj[-1]
    z = params.tau * ydot
    zdot = params.tau * yddot
    f_target = params.tau * zdot - params.alpha * (
        params.beta * (g - traj) - z
    )  # (T, channels)

    steps = np.arange(t_len) / (t_len - 1)
    s = np.exp(-params.a_canonical * steps)
    c, h = basis_centers_widths(params)
    psi = np.exp(-h * (s[:, None] - c) ** 2)  # (T, n_basis)
    n_ch = traj.shape[1]
    w = np.empty((n_ch, params.n_basis))
    for i in range(params.n_basis):
        # per-basis locally weighted fit: w_i = sum(psi_i s f) / (sum(psi_i s^2) + ridge)
        w[:, i] = (psi[:, i, None] * s[:, None] * f_target).sum(axis=0) / (
            (psi[:, i] * s**2).sum() + params.ridge
        )
    return w, z[0].copy()


def learn(traj: np.ndarray, dt: float, params: DmpParams) -> tuple[LearnedDmp, LearnedDmp]:
    """Fit forward and backward primitives to a mean trajectory (T, channels)."""
    traj = np.asarray(traj, dtype=float)
    if traj.ndim != 2 or traj.shape[0] < 3:
        raise DmpError("trajectory must be (T >= 3, channels)")
    if not np.isfinite(traj).all():
        raise DmpError("trajectory contains non-finite values")
    w_f, z0_f = _fit_weights(traj, dt, params)
    fwd = LearnedDmp(w_f, traj[0].copy(), traj[-1].copy(), z0_f, "forward")
    rev_traj = traj[::-1]
    w_b, z0_b = _fit_weights(rev_traj, dt, params)
    bwd = LearnedDmp(w_b, rev_traj[0].copy(), rev_traj[-1].copy(), z0_b, "backward")
    return fwd, bwd


def initial_state(dmp: LearnedDmp) -> DmpState:
    return DmpState(dmp.x0.copy(), dmp.z0.copy(), 1.0)


def step(
    state: DmpState,
    dmp: LearnedDmp,
    params: DmpParams,
    dt: float,
    rate_scale: float = 1.0,
) -> DmpState:
    """One semi-implicit Euler step; the canonical decay is exact per step.

    Forcing is zeroed once the phase passes the learned domain (s below the
    segment-end value): the basis extrapolation there is an artifact, and
    zero forcing is what lets the attractor settle onto g. Stiff settings
    are integrated with internal substeps; the phase update stays a single
    exact exponential so closed-form phase checks hold to roundoff.
    """
    if dt <= 0 or rate_scale <= 0:
        raise DmpError("dt and rate_scale must be positive")
    r = rate_scale / params.tau
    n_sub = max(1, int(np.ceil(params.alpha * dt * r / 0.5)))
    sub = dt / n_sub
    x, z = state.x, state.z
    for k in range(n_sub):
        s_k = state.s * float(np.exp(-params.a_canonical * sub * k * r))
        if s_k >= params.s_end:
            f = forcing(s_k, dmp.weights, params)
        else:
            f = np.zeros_like(x)
        zdot = (params.alpha * (params.beta * (dmp.g - x) - z) + f) * r
        z = z + zdot * sub
        x = x + z * r * sub
    s_new = state.s * float(np.exp(-params.a_canonical * dt * r))
    return DmpState(x, z, s_new)


def phase_progress(s: float, params: DmpParams) -> float:
    """Fraction of the segment timeline covered by phase s (0 start, 1 end)."""
    if s <= 0:
        return 1.0
    return min(-np.log(s) / params.a_canonical, 1.0)


def reversed_phase(s: float, params: DmpParams) -> float:
    """Phase of the opposite-direction primitive at the same timeline point."""
    s_rev = float(np.exp(-params.a_canonical) / max(s, 1e-300))
    return min(max(s_rev, np.exp(-params.a_canonical)), 1.0)


def switch_direction(
    state: DmpState, params: DmpParams, negate_velocity: bool = True
) -> DmpState:
    """Re-seed integration state when swapping to the counterpart primitive.

    Position is continuous; velocity is negated by default (zeroing is the
    conservative alternative); phase maps to the reversed timeline.
    """
    z = -state.z if negate_velocity else np.zeros_like(state.z)
    return DmpState(state.x.copy(), z, reversed_phase(state.s, params))


def rollout(
    dmp: LearnedDmp,
    params: DmpParams,
    dt: float,
    rate_scale: float = 1.0,
    duration: float | None = None,
    state: DmpState | None = None,
) -> np.ndarray:
    """Integrate from the start state for `duration` seconds (default tau)."""
    if duration is None:
        duration = params.tau
    st = state if state is not None else initial_state(dmp)
    n = int(round(duration / dt))
    out = np.empty((n + 1, len(dmp.x0)))
    out[0] = st.x
    for k in range(n):
        st = step(st, dmp, params, dt, rate_scale)
        out[k + 1] = st.x
    return out


def renormalize_quaternion(x: np.ndarray, schema: list[ChannelSchema]) -> np.ndarray:
    """Rescale the quaternion group of a state vector to unit norm."""
    idx = indices_of_kind(schema, ChannelKind.QUATERNION)
    if not idx:
        raise DmpError("schema has no quaternion group")
    out = np.array(x, dtype=float)
    q = out[idx]
    norm = np.linalg.norm(q)
    if norm < 1e-12:
        raise DmpError("zero-norm quaternion cannot be renormalized")
    out[idx] = q / norm
    return out
