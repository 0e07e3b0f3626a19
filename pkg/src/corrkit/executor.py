"""The arbitration loop: nominal primitive plus operator correction.

Every tick the override law shapes the raw device displacement into an
effective input, the current correction frame maps that input to a state
offset, the offset is low-pass filtered and added to the freshly integrated
nominal state, saturation clamps force and execution rate, and the simulated
environment advances. Commanded corrections to the rate channel feed back as
the next tick's integration speed. Holding reverse swaps in the backward
primitive with position kept continuous.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Literal, Optional, Union

import numpy as np

from .bundle import BehaviorBundle, LearnedSegment
from .channels import ChannelKind, ChannelSchema, indices_of_kind
from .corrections import CorrectionFrame
from .dmp import (
    DmpState,
    initial_state,
    phase_progress,
    step as dmp_step,
    switch_direction,
)
from .mapping import map_input_1dof, map_input_3dof, spatial_basis
from .override import OverrideConfig, OverrideState, reset as override_reset, update as override_update
from .segmentation import quat_from_tilts, tilt_angles, tool_axis
from .simenv import PaintField, local_density, removal_fraction, step_env

InputMode = Literal["1dof", "3dof"]

PROGRESS_DONE = 1.0 - 1e-9


class ExecutorError(RuntimeError):
    pass


@dataclass(frozen=True)
class ExecutorConfig:
    dt: float = 0.01
    correction_filter_tc: float = 0.05  # 0 disables the applied-correction filter
    rate_min: float = 0.25
    rate_max: float = 4.0
    force_min: float = 0.0
    force_max: float = 40.0
    carry_corrections: bool = False
    reverse_negates_velocity: bool = True
    override: OverrideConfig = field(default_factory=OverrideConfig)

    def to_dict(self) -> dict:
        d = asdict(self)
        return d


@dataclass
class TelemetryFrame:
    tick: int
    t: float
    lifecycle: str
    segment_index: int
    segment_kind: str
    direction: str
    s: float
    progress: float  # along the segment's forward timeline
    frame_index: int  # absolute reference sample
    rate_scale: float
    d: list
    u_t: list
    f_t: list
    x_n: list
    delta_y: list
    x_pre_sat: list
    x: list
    saturated: list
    basis_directions: list
    basis_valid: list
    components: list
    scaled_norms: list
    explained: list
    k_retained: int
    n_valid: int
    zero_variance: bool
    env_events: list
    removal: float
    local_density: float
    tool_uv: Optional[list]

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TelemetryFrame":
        return cls(**d)


def _convert_state(
    x: np.ndarray,
    src: list[ChannelSchema],
    dst: list[ChannelSchema],
    surface,
    defaults: np.ndarray,
) -> np.ndarray:
    """Carry a commanded state across segment schemas.

    Shared channel names copy over; positions and surface coordinates map
    through the surface; orientation converts between quaternion and tilt
    angles; anything unresolvable keeps the incoming segment's learned start.
    """
    out = defaults.astype(float).copy()
    src_names = {c.name: i for i, c in enumerate(src)}
    dst_names = {c.name: i for i, c in enumerate(dst)}
    for name, j in dst_names.items():
        if name in src_names:
            out[j] = x[src_names[name]]

    src_pos = indices_of_kind(src, ChannelKind.POSITION)
    dst_pos = indices_of_kind(dst, ChannelKind.POSITION)
    src_uv = [src_names[n] for n in ("u", "v") if n in src_names]
    dst_uv = [dst_names[n] for n in ("u", "v") if n in dst_names]
    src_quat = indices_of_kind(src, ChannelKind.QUATERNION)
    dst_quat = indices_of_kind(dst, ChannelKind.QUATERNION)

    uv = None
    if len(src_uv) == 2:
        uv = (float(x[src_uv[0]]), float(x[src_uv[1]]))
    elif len(src_pos) == 3 and (len(dst_uv) == 2 or len(dst_quat) == 4):
        seed = (
            (float(defaults[dst_uv[0]]), float(defaults[dst_uv[1]]))
            if len(dst_uv) == 2
            else (0.5, 0.5)
        )
        uv = surface.project(x[src_pos], seed=seed)

    if len(dst_uv) == 2 and uv is not None and len(src_uv) != 2:
        out[dst_uv[0]], out[dst_uv[1]] = uv
    if len(dst_pos) == 3 and len(src_pos) != 3 and uv is not None:
        out[dst_pos] = surface.evaluate(*uv)

    if len(dst_quat) == 4 and len(src_quat) != 4 and uv is not None:
        th_u = x[src_names["theta_u"]] if "theta_u" in src_names else 0.0
        th_v = x[src_names["theta_v"]] if "theta_v" in src_names else 0.0
        out[dst_quat] = quat_from_tilts(th_u, th_v, *surface.frame(*uv))
    if {"theta_u", "theta_v"} <= set(dst_names) and len(src_quat) == 4 and uv is not None:
        axis = tool_axis(x[src_quat])
        th_u, th_v = tilt_angles(axis, *surface.frame(*uv))
        out[dst_names["theta_u"]] = th_u
        out[dst_names["theta_v"]] = th_v
    return out


class Session:
    """Owns one execution: bundle, environment, integration and input state."""

    def __init__(
        self,
        bundle: BehaviorBundle,
        env: Optional[PaintField] = None,
        config: ExecutorConfig = ExecutorConfig(),
        input_mode: InputMode = "1dof",
    ):
        self.bundle = bundle
        self.env = env
        self.config = config
        self.input_mode: InputMode = input_mode
        self.n_axes = 1 if input_mode == "1dof" else 3
        self.lifecycle = "created"
        self.tick_count = 0
        self.direction: Literal["forward", "backward"] = "forward"
        self.override_state = OverrideState.zeros(self.n_axes)
        self._rate_cmd = 1.0
        self._enter_segment(0, "forward", x_from=None, src_schema=None)

    # -- lifecycle -------------------------------------------------------

    def start(self) -> None:
        if self.lifecycle != "created":
            raise ExecutorError(f"cannot start from state {self.lifecycle!r}")
        self.lifecycle = "running"

    def pause(self) -> None:
        if self.lifecycle != "running":
            raise ExecutorError(f"cannot pause from state {self.lifecycle!r}")
        self.lifecycle = "paused"

    def resume(self) -> None:
        if self.lifecycle != "paused":
            raise ExecutorError(f"cannot resume from state {self.lifecycle!r}")
        self.lifecycle = "running"

    def abort(self) -> None:
        self.lifecycle = "faulted"

    # -- segment plumbing ------------------------------------------------

    @property
    def segment(self) -> LearnedSegment:
        return self.bundle.segments[self.segment_index]

    def _enter_segment(self, idx, direction, x_from, src_schema) -> None:
        self.segment_index = idx
        self.direction = direction
        seg = self.bundle.segments[idx]
        dmp = seg.forward if direction == "forward" else seg.backward
        x0 = dmp.x0.copy()
        if x_from is not None:
            x0 = _convert_state(x_from, src_schema, seg.schema, self.bundle.surface, x0)
        self.dmp_state = DmpState(x0, dmp.z0.copy(), 1.0)
        if not (self.config.carry_corrections and x_from is not None):
            self.delta_y = np.zeros(len(seg.schema))
            self.override_state = override_reset(self.override_state)
        else:
            old = self.delta_y
            self.delta_y = np.zeros(len(seg.schema))
            if src_schema is not None:
                self.delta_y = _convert_state(
                    old, src_schema, seg.schema, self.bundle.surface,
                    np.zeros(len(seg.schema)),
                )

    def _active_dmp(self):
        seg = self.segment
        return seg.forward if self.direction == "forward" else seg.backward

    def _forward_progress(self, s: float) -> float:
        p = phase_progress(s, self.segment.params)
        return p if self.direction == "forward" else 1.0 - p

    def _frame_for(self, progress: float) -> tuple[int, CorrectionFrame]:
        seg = self.segment
        local = int(round(progress * (seg.length - 1)))
        local = min(max(local, 0), seg.length - 1)
        return local, seg.schedule.frames[local]

    @property
    def segment_length_samples(self) -> int:
        return self.segment.length

    # -- the tick --------------------------------------------------------

    def tick(self, device_input, reverse_pressed: bool = False) -> TelemetryFrame:
        if self.lifecycle != "running":
            raise ExecutorError(f"tick in lifecycle state {self.lifecycle!r}")
        cfg = self.config
        seg = self.segment
        d = np.clip(np.atleast_1d(np.asarray(device_input, dtype=float)), -1.5, 1.5)
        if d.shape != (self.n_axes,):
            raise ExecutorError(f"expected {self.n_axes} input axes, got {d.shape}")

        # 1. input law
        u_t, f_t, self.override_state = override_update(
            self.override_state, d, cfg.dt, cfg.override
        )

        # 2. map input to a raw-unit correction target
        progress = self._forward_progress(self.dmp_state.s)
        local_idx, frame = self._frame_for(progress)
        surface_frame = None
        basis = None
        if seg.kind == "in_contact":
            u_nom = float(np.clip(self.dmp_state.x[0], 0.0, 1.0))
            v_nom = float(np.clip(self.dmp_state.x[1], 0.0, 1.0))
            surface_frame = self.bundle.surface.frame(u_nom, v_nom)
        if frame.zero_variance or frame.n_valid == 0:
            dy_target = np.zeros(len(seg.schema))
        elif self.input_mode == "1dof":
            dy_target = map_input_1dof(float(u_t[0]), frame)
        else:
            basis = spatial_basis(frame, seg.schema, surface_frame)
            dy_target = map_input_3dof(u_t, basis, frame)

        # 3. applied-correction filter
        if cfg.correction_filter_tc > 0:
            gain = 1.0 - float(np.exp(-cfg.dt / cfg.correction_filter_tc))
            self.delta_y = self.delta_y + gain * (dy_target - self.delta_y)
        else:
            self.delta_y = dy_target.copy()

        # 4. direction from the reverse control
        want = "backward" if reverse_pressed else "forward"
        if want != self.direction:
            self.dmp_state = switch_direction(
                self.dmp_state, seg.params, cfg.reverse_negates_velocity
            )
            self.direction = want

        # 5. advance the nominal behavior
        rate_scale = float(np.clip(self._rate_cmd, cfg.rate_min, cfg.rate_max))
        self.dmp_state = dmp_step(
            self.dmp_state, self._active_dmp(), seg.params, cfg.dt, rate_scale
        )

        # 6. arbitration and saturation
        x_n = self.dmp_state.x
        x_pre = x_n + self.delta_y
        x_cmd, saturated = self._saturate(x_pre, seg.schema)
        rate_idx = indices_of_kind(seg.schema, ChannelKind.EXEC_RATE)
        self._rate_cmd = float(x_cmd[rate_idx[0]]) if rate_idx else 1.0

        # 7. environment
        events: list[str] = []
        tool_uv = None
        if seg.kind == "in_contact" and self.env is not None:
            names = {c.name: i for i, c in enumerate(seg.schema)}
            tool = (
                float(x_cmd[names["u"]]),
                float(x_cmd[names["v"]]),
                float(x_cmd[names["f_n"]]),
                float(x_cmd[names["v_tool"]]),
            )
            tool_uv = [tool[0], tool[1]]
            events = step_env(self.env, tool, cfg.dt)
            if "collision" in events:
                self.lifecycle = "paused"

        # 8. telemetry
        frame_abs = seg.start + local_idx
        tele = TelemetryFrame(
            tick=self.tick_count,
            t=self.tick_count * cfg.dt,
            lifecycle=self.lifecycle,
            segment_index=self.segment_index,
            segment_kind=seg.kind,
            direction=self.direction,
            s=float(self.dmp_state.s),
            progress=float(self._forward_progress(self.dmp_state.s)),
            frame_index=frame_abs,
            rate_scale=rate_scale,
            d=d.tolist(),
            u_t=u_t.tolist(),
            f_t=f_t.tolist(),
            x_n=x_n.tolist(),
            delta_y=self.delta_y.tolist(),
            x_pre_sat=x_pre.tolist(),
            x=x_cmd.tolist(),
            saturated=saturated,
            basis_directions=basis.directions.tolist() if basis is not None else [],
            basis_valid=basis.valid.tolist() if basis is not None else [],
            components=frame.components[: min(3, frame.n_valid)].tolist(),
            scaled_norms=[float(np.linalg.norm(r)) for r in frame.scaled[:3]],
            explained=frame.explained[:3].tolist(),
            k_retained=seg.schedule.k_retained,
            n_valid=frame.n_valid,
            zero_variance=frame.zero_variance,
            env_events=events,
            removal=removal_fraction(self.env) if self.env is not None else 0.0,
            local_density=(
                local_density(self.env, *tool_uv) if tool_uv is not None else 0.0
            ),
            tool_uv=tool_uv,
        )
        self.tick_count += 1
        self._maybe_advance_segment()
        return tele

    def _saturate(self, x_pre: np.ndarray, schema) -> tuple[np.ndarray, list]:
        cfg = self.config
        x = x_pre.copy()
        flagged = []
        for i, ch in enumerate(schema):
            if ch.kind is ChannelKind.FORCE_NORMAL:
                clipped = min(max(x[i], cfg.force_min), cfg.force_max)
            elif ch.kind is ChannelKind.EXEC_RATE:
                clipped = min(max(x[i], cfg.rate_min), cfg.rate_max)
            elif ch.kind is ChannelKind.SURFACE_COORD:
                clipped = min(max(x[i], 0.0), 1.0)
            else:
                continue
            if clipped != x[i]:
                flagged.append(ch.name)
                x[i] = clipped
        quat = indices_of_kind(schema, ChannelKind.QUATERNION)
        if quat:
            q = x[quat]
            norm = float(np.linalg.norm(q))
            if norm > 1e-12:
                x[quat] = q / norm
        return x, flagged

    def _maybe_advance_segment(self) -> None:
        if self.lifecycle != "running":
            return
        progress = phase_progress(self.dmp_state.s, self.segment.params)
        if progress < PROGRESS_DONE:
            return
        x_now = self.dmp_state.x + self.delta_y
        if self.direction == "forward":
            if self.segment_index + 1 < len(self.bundle.segments):
                self._enter_segment(
                    self.segment_index + 1, "forward", x_now, self.segment.schema
                )
            else:
                self.lifecycle = "completed"
        else:
            if self.segment_index > 0:
                self._enter_segment(
                    self.segment_index - 1, "backward", x_now, self.segment.schema
                )
            # reversed at the very start: the backward goal holds the state


# -- headless runs and logs ------------------------------------------------

Policy = Callable[[Optional[TelemetryFrame]], tuple[np.ndarray, bool]]


@dataclass
class ExecutionLog:
    meta: dict
    frames: list[TelemetryFrame]

    def commanded_states(self) -> list[list]:
        return [f.x for f in self.frames]


def run_headless(
    bundle: BehaviorBundle,
    env: Optional[PaintField],
    policy: Policy,
    duration_s: float,
    config: ExecutorConfig = ExecutorConfig(),
    input_mode: InputMode = "1dof",
    meta: Optional[dict] = None,
) -> ExecutionLog:
    session = Session(bundle, env, config, input_mode)
    session.start()
    frames: list[TelemetryFrame] = []
    last: Optional[TelemetryFrame] = None
    n = int(round(duration_s / config.dt))
    for _ in range(n):
        if session.lifecycle != "running":
            break
        d, reverse = policy(last)
        last = session.tick(d, reverse)
        frames.append(last)
    log_meta = {
        "format": "execution-log",
        "version": 1,
        "bundle_digest": bundle.source_digest,
        "task": bundle.task,
        "input_mode": input_mode,
        "config": config.to_dict(),
        "final_lifecycle": session.lifecycle,
    }
    if meta:
        log_meta.update(meta)
    return ExecutionLog(log_meta, frames)


def save_log(log: ExecutionLog, path: Union[str, Path]) -> None:
    with open(path, "w") as fh:
        fh.write(json.dumps(log.meta) + "\n")
        for fr in log.frames:
            fh.write(json.dumps(fr.to_dict()) + "\n")


def load_log(path: Union[str, Path]) -> ExecutionLog:
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    if not lines:
        raise ExecutorError("empty execution log")
    meta = json.loads(lines[0])
    if meta.get("format") != "execution-log":
        raise ExecutorError("not an execution log")
    frames = [TelemetryFrame.from_dict(json.loads(ln)) for ln in lines[1:]]
    return ExecutionLog(meta, frames)


def replay(
    bundle: BehaviorBundle,
    env: Optional[PaintField],
    log: ExecutionLog,
) -> tuple[bool, int]:
    """Re-execute the logged inputs; (True, -1) when every commanded state
    matches bit-exactly, else (False, first mismatching tick)."""
    config = ExecutorConfig(
        **{
            **log.meta["config"],
            "override": OverrideConfig(**log.meta["config"]["override"]),
        }
    )
    session = Session(bundle, env, config, log.meta["input_mode"])
    session.start()
    for i, fr in enumerate(log.frames):
        if session.lifecycle != "running":
            return False, i
        got = session.tick(np.asarray(fr.d), fr.direction == "backward")
        if got.x != fr.x:
            return False, i
    return True, -1
