"""HTTP + WebSocket service exposing sessions to operator clients.

Message schema is versioned (MESSAGE_SCHEMA_VERSION); clients check it via
GET /api/version and the WebSocket hello. Device input is a latest-wins
latch: each tick consumes the most recent (d, reverse) pair and stale
packets (lower seq) are dropped. Telemetry frames go into a per-session ring
buffer so a reconnecting client can resume from the last tick it saw.

Two clocks: "realtime" advances sessions on an asyncio timer at the
configured dt; "manual" advances only on POST .../tick, which makes service
behavior deterministic under test.
"""

from __future__ import annotations

import asyncio
import itertools
import json
import time
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Optional

import numpy as np
from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect

from .bundle import BehaviorBundle, load_bundle
from .executor import ExecutorConfig, Session, TelemetryFrame
from .override import OverrideConfig
from .simenv import (
    PaintField,
    Scenario,
    load_scenario,
    make_field,
    shipped_scenario,
)

MESSAGE_SCHEMA_VERSION = 1
RING_CAPACITY = 4096
HEATMAP_EVERY = 10  # ticks between heatmap pushes on the stream
HEATMAP_SIDE = 48  # downsampled grid side sent to clients


@dataclass
class InputLatch:
    """Latest-wins device input shared between transport and ticker."""

    d: list = field(default_factory=lambda: [0.0])
    reverse: bool = False
    seq: int = -1

    def offer(self, d: list, reverse: bool, seq: Optional[int]) -> bool:
        if seq is not None and seq <= self.seq:
            return False
        self.d = [float(v) for v in d]
        self.reverse = bool(reverse)
        if seq is not None:
            self.seq = int(seq)
        return True


class SessionRunner:
    """One executor session plus its input latch, telemetry ring and clock."""

    def __init__(
        self,
        session_id: str,
        bundle_name: str,
        bundle: BehaviorBundle,
        scenario: Optional[Scenario],
        config: ExecutorConfig,
        input_mode: str,
    ):
        self.id = session_id
        self.bundle_name = bundle_name
        self.scenario = scenario
        self.env: Optional[PaintField] = make_field(scenario) if scenario else None
        self.session = Session(bundle, self.env, config, input_mode)
        self.latch = InputLatch(d=[0.0] * self.session.n_axes)
        self.ring: deque[TelemetryFrame] = deque(maxlen=RING_CAPACITY)
        self.subscribers: set[asyncio.Queue] = set()
        self._task: Optional[asyncio.Task] = None

    @property
    def lifecycle(self) -> str:
        return self.session.lifecycle

    def info(self) -> dict:
        b = self.session.bundle
        return {
            "id": self.id,
            "bundle": self.bundle_name,
            "task": b.task,
            "lifecycle": self.lifecycle,
            "tick": self.session.tick_count,
            "input_mode": self.session.input_mode,
            "n_axes": self.session.n_axes,
            "recommended_k": b.recommended_k,
            "scenario": self.scenario.name if self.scenario else None,
            "dt": self.session.config.dt,
            "wall_threshold": self.session.config.override.d_wall,
            "segments": [
                {
                    "kind": s.kind,
                    "start": s.start,
                    "end": s.end,
                    "k_retained": s.schedule.k_retained,
                    "channels": [c.name for c in s.schema],
                    "ranges": [c.normalization_range for c in s.schema],
                    "units": [c.unit for c in s.schema],
                }
                for s in b.segments
            ],
        }

    def tick_once(self) -> Optional[TelemetryFrame]:
        if self.lifecycle != "running":
            return None
        frame = self.session.tick(np.asarray(self.latch.d), self.latch.reverse)
        self.ring.append(frame)
        self._publish({"type": "telemetry", "frame": frame.to_dict()})
        if frame.tick % HEATMAP_EVERY == 0 and self.env is not None:
            self._publish(self._heatmap_message())
        if frame.lifecycle != "running" or self.lifecycle != "running":
            self._publish({"type": "state", "session": self.info()})
        return frame

    def _heatmap_message(self) -> dict:
        assert self.env is not None
        g = self.env.density
        side = HEATMAP_SIDE
        fu = max(g.shape[0] // side, 1)
        fv = max(g.shape[1] // side, 1)
        nu, nv = g.shape[0] // fu, g.shape[1] // fv
        small = g[: nu * fu, : nv * fv].reshape(nu, fu, nv, fv).mean(axis=(1, 3))
        obs = self.env.obstacle[: nu * fu, : nv * fv].reshape(nu, fu, nv, fv).any(
            axis=(1, 3)
        )
        return {
            "type": "heatmap",
            "tick": self.session.tick_count,
            "shape": [nu, nv],
            "density": [round(float(v), 4) for v in small.ravel()],
            "obstacle": [bool(v) for v in obs.ravel()],
        }

    def _publish(self, message: dict) -> None:
        for q in list(self.subscribers):
            if q.full():
                try:
                    q.get_nowait()
                except asyncio.QueueEmpty:
                    pass
            q.put_nowait(message)

    def frames_since(self, from_tick: int) -> list[TelemetryFrame]:
        return [f for f in self.ring if f.tick >= from_tick]

    async def _run_realtime(self) -> None:
        dt = self.session.config.dt
        next_at = time.monotonic()
        while self.lifecycle == "running":
            self.tick_once()
            next_at += dt
            delay = next_at - time.monotonic()
            if delay > 0:
                await asyncio.sleep(delay)
            else:
                next_at = time.monotonic()

    def start_clock(self) -> None:
        if self._task is None or self._task.done():
            self._task = asyncio.get_running_loop().create_task(self._run_realtime())

    def stop_clock(self) -> None:
        if self._task is not None:
            self._task.cancel()
            self._task = None


def create_app(
    bundle_dir: Optional[Path] = None,
    scenario_dir: Optional[Path] = None,
    clock: Literal["realtime", "manual"] = "realtime",
) -> FastAPI:
    app = FastAPI(title="correction service")
    bundle_dir = Path(bundle_dir) if bundle_dir else None
    scenario_dir = Path(scenario_dir) if scenario_dir else None
    runners: dict[str, SessionRunner] = {}
    counter = itertools.count(1)
    app.state.runners = runners

    def _bundles() -> dict[str, Path]:
        if bundle_dir is None or not bundle_dir.is_dir():
            return {}
        return {p.stem: p for p in sorted(bundle_dir.glob("*.json"))}

    def _scenarios() -> dict[str, Scenario]:
        found = {"shipped": shipped_scenario()}
        if scenario_dir is not None and scenario_dir.is_dir():
            for p in sorted(scenario_dir.glob("*.json")):
                try:
                    found[p.stem] = load_scenario(p)
                except Exception:
                    continue
        return found

    def _runner(session_id: str) -> SessionRunner:
        if session_id not in runners:
            raise HTTPException(status_code=404, detail="no such session")
        return runners[session_id]

    @app.get("/api/version")
    def version():
        return {
            "service": "correction-service",
            "message_schema_version": MESSAGE_SCHEMA_VERSION,
        }

    @app.get("/api/bundles")
    def bundles():
        out = []
        for name, path in _bundles().items():
            try:
                b = load_bundle(path)
                out.append(
                    {
                        "name": name,
                        "task": b.task,
                        "segments": len(b.segments),
                        "recommended_k": b.recommended_k,
                    }
                )
            except Exception:
                continue
        return {"bundles": out}

    @app.get("/api/scenarios")
    def scenarios():
        return {"scenarios": sorted(_scenarios().keys())}

    @app.post("/api/sessions", status_code=201)
    def create_session(body: dict):
        name = body.get("bundle")
        paths = _bundles()
        if name not in paths:
            raise HTTPException(status_code=404, detail=f"unknown bundle {name!r}")
        bundle = load_bundle(paths[name])
        scenario = None
        sc_name = body.get("scenario")
        if sc_name:
            all_sc = _scenarios()
            if sc_name not in all_sc:
                raise HTTPException(
                    status_code=404, detail=f"unknown scenario {sc_name!r}"
                )
            scenario = all_sc[sc_name]
        input_mode = body.get("input_mode", "1dof")
        if input_mode not in ("1dof", "3dof"):
            raise HTTPException(status_code=422, detail="input_mode must be 1dof|3dof")
        cfg_kwargs = {}
        for key in ("dt", "correction_filter_tc", "carry_corrections"):
            if key in body:
                cfg_kwargs[key] = body[key]
        if "override" in body:
            cfg_kwargs["override"] = OverrideConfig(**body["override"])
        config = ExecutorConfig(**cfg_kwargs)
        session_id = f"s{next(counter)}"
        runner = SessionRunner(session_id, name, bundle, scenario, config, input_mode)
        runners[session_id] = runner
        return runner.info()

    @app.get("/api/sessions")
    def list_sessions():
        return {"sessions": [r.info() for r in runners.values()]}

    @app.get("/api/sessions/{session_id}")
    def session_info(session_id: str):
        return _runner(session_id).info()

    @app.post("/api/sessions/{session_id}/start")
    async def start_session(session_id: str):
        r = _runner(session_id)
        try:
            r.session.start()
        except Exception as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        if clock == "realtime":
            r.start_clock()
        return r.info()

    @app.post("/api/sessions/{session_id}/pause")
    async def pause_session(session_id: str):
        r = _runner(session_id)
        try:
            r.session.pause()
        except Exception as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        r.stop_clock()
        return r.info()

    @app.post("/api/sessions/{session_id}/resume")
    async def resume_session(session_id: str):
        r = _runner(session_id)
        try:
            r.session.resume()
        except Exception as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        if clock == "realtime":
            r.start_clock()
        return r.info()

    @app.post("/api/sessions/{session_id}/abort")
    async def abort_session(session_id: str):
        r = _runner(session_id)
        r.session.abort()
        r.stop_clock()
        return r.info()

    @app.post("/api/sessions/{session_id}/input")
    def post_input(session_id: str, body: dict):
        r = _runner(session_id)
        d = body.get("d")
        if not isinstance(d, list) or len(d) != r.session.n_axes:
            raise HTTPException(
                status_code=422, detail=f"d must be a list of {r.session.n_axes}"
            )
        accepted = r.latch.offer(d, body.get("reverse", False), body.get("seq"))
        return {"accepted": accepted, "seq": r.latch.seq}

    @app.post("/api/sessions/{session_id}/tick")
    def tick_session(session_id: str, body: Optional[dict] = None):
        if clock != "manual":
            raise HTTPException(status_code=409, detail="manual clock only")
        r = _runner(session_id)
        n = int((body or {}).get("n", 1))
        frames = []
        for _ in range(n):
            f = r.tick_once()
            if f is None:
                break
            frames.append(f.to_dict())
        return {"frames": frames, "lifecycle": r.lifecycle}

    @app.get("/api/sessions/{session_id}/telemetry")
    def telemetry(session_id: str, from_tick: int = 0):
        r = _runner(session_id)
        return {"frames": [f.to_dict() for f in r.frames_since(from_tick)]}

    @app.get("/api/sessions/{session_id}/heatmap")
    def heatmap(session_id: str):
        r = _runner(session_id)
        if r.env is None:
            raise HTTPException(status_code=404, detail="session has no environment")
        return r._heatmap_message()

    @app.websocket("/api/sessions/{session_id}/stream")
    async def stream(ws: WebSocket, session_id: str):
        await ws.accept()
        if session_id not in runners:
            await ws.close(code=4404)
            return
        r = runners[session_id]
        queue: asyncio.Queue = asyncio.Queue(maxsize=RING_CAPACITY)
        r.subscribers.add(queue)
        await ws.send_text(
            json.dumps(
                {
                    "type": "hello",
                    "message_schema_version": MESSAGE_SCHEMA_VERSION,
                    "session": r.info(),
                }
            )
        )

        async def pump_out():
            while True:
                msg = await queue.get()
                await ws.send_text(json.dumps(msg))

        out_task = asyncio.get_running_loop().create_task(pump_out())
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    msg = json.loads(raw)
                except json.JSONDecodeError:
                    await ws.send_text(
                        json.dumps({"type": "error", "error": "bad json"})
                    )
                    continue
                kind = msg.get("type")
                if kind == "input":
                    d = msg.get("d", [])
                    if isinstance(d, list) and len(d) == r.session.n_axes:
                        r.latch.offer(d, msg.get("reverse", False), msg.get("seq"))
                elif kind == "resume":
                    for f in r.frames_since(int(msg.get("from_tick", 0))):
                        await ws.send_text(
                            json.dumps({"type": "telemetry", "frame": f.to_dict()})
                        )
                elif kind == "ping":
                    await ws.send_text(json.dumps({"type": "pong"}))
                else:
                    await ws.send_text(
                        json.dumps({"type": "error", "error": f"unknown {kind!r}"})
                    )
        except WebSocketDisconnect:
            pass
        finally:
            out_task.cancel()
            r.subscribers.discard(queue)

    return app
