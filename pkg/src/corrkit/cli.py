"""Command-line entry points.

Every command is deterministic for a fixed seed, exits non-zero on invalid
input, and prints machine-readable JSON when --json is given.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from .bundle import BundleError, load_bundle, save_bundle
from .demolog import DemoLogError, load_demo_set, save_demo_set
from .executor import (
    ExecutorConfig,
    load_log,
    replay as replay_run,
    run_headless,
    save_log,
)
from .learn import LearnConfig, LearnError, learn_bundle
from .policies import CorrectiveRepassPolicy, constant_policy, null_policy
from .simenv import load_scenario, make_field, removal_fraction, shipped_scenario
from .surface import SurfaceModel, cylinder_patch, flat_plane
from .synth import dual_structure_task, generate, single_coordination_task

TASKS = {
    "single-coordination": single_coordination_task,
    "dual-structure": dual_structure_task,
}

POLICIES = {
    "null": lambda axes: null_policy(axes),
    "corrective": lambda axes: CorrectiveRepassPolicy(axes),
    "push": lambda axes: constant_policy([1.0] + [0.0] * (axes - 1)),
}


def _emit(payload: dict, as_json: bool, lines: list[str]) -> None:
    if as_json:
        click.echo(json.dumps(payload))
    else:
        for ln in lines:
            click.echo(ln)


def _load_surface(path: str | None) -> SurfaceModel:
    if path is None:
        return cylinder_patch()
    if path == "flat":
        return flat_plane()
    if path == "cylinder":
        return cylinder_patch()
    with open(path) as fh:
        return SurfaceModel.from_dict(json.load(fh))


def _load_scenario_arg(name: str | None):
    if name is None:
        return None
    if name == "shipped":
        return shipped_scenario()
    return load_scenario(name)


@click.group()
def main():
    """Demonstration learning and corrective execution toolkit."""


@main.command()
@click.option("--task", type=click.Choice(sorted(TASKS)), default="single-coordination")
@click.option("--seed", type=int, default=0)
@click.option("--demos", "n_demos", type=int, default=8)
@click.option("--out-dir", type=click.Path(file_okay=False), required=True)
@click.option("--json", "as_json", is_flag=True)
def synth(task, seed, n_demos, out_dir, as_json):
    """Generate a synthetic demonstration set with known structure."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    spec = TASKS[task](seed=seed)
    spec = type(spec)(**{**spec.__dict__, "n_demos": n_demos})
    demos, truth = generate(spec)
    demo_path = out / "demos.txt"
    save_demo_set(demos, demo_path)
    surface_path = out / "surface.json"
    with open(surface_path, "w") as fh:
        json.dump(spec.surface.to_dict(), fh)
    truth_path = out / "truth.json"
    with open(truth_path, "w") as fh:
        json.dump(
            {
                "task": task,
                "seed": seed,
                "shares": [float(s) for s in truth.shares],
                "directions": truth.directions.tolist(),
                "contact_window": list(truth.contact_window),
            },
            fh,
        )
    payload = {
        "demos": str(demo_path),
        "surface": str(surface_path),
        "truth": str(truth_path),
        "n_demos": demos.n_demos,
        "digest": demos.digest(),
    }
    _emit(
        payload,
        as_json,
        [
            f"wrote {demos.n_demos} demos to {demo_path}",
            f"surface model: {surface_path}",
            f"digest: {demos.digest()}",
        ],
    )


@main.command()
@click.argument("demolog", type=click.Path(exists=True, dir_okay=False))
@click.option("--json", "as_json", is_flag=True)
def ingest(demolog, as_json):
    """Validate a demonstration log and summarize its contents."""
    try:
        demos = load_demo_set(demolog)
    except DemoLogError as exc:
        click.echo(f"invalid demo log: {exc}", err=True)
        sys.exit(1)
    lengths = [len(d) for d in demos.demos]
    payload = {
        "task": demos.task,
        "n_demos": demos.n_demos,
        "capture_rate_hz": demos.capture_rate_hz,
        "channels": [c.name for c in demos.schema],
        "lengths": lengths,
        "digest": demos.digest(),
    }
    _emit(
        payload,
        as_json,
        [
            f"task: {demos.task}",
            f"demos: {demos.n_demos} at {demos.capture_rate_hz} Hz, "
            f"lengths {min(lengths)}..{max(lengths)}",
            f"channels: {', '.join(payload['channels'])}",
            f"digest: {payload['digest']}",
        ],
    )


@main.command()
@click.argument("demolog", type=click.Path(exists=True, dir_okay=False))
@click.option("--surface", "surface_path", default=None,
              help="surface JSON, or 'flat'/'cylinder'")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
@click.option("--force-threshold", type=float, default=1.0)
@click.option("--smoothing", type=float, default=0.1,
              help="correction schedule smoothing time constant, s")
@click.option("--json", "as_json", is_flag=True)
def learn(demolog, surface_path, out_path, force_threshold, smoothing, as_json):
    """Learn a behavior bundle from a demonstration log."""
    try:
        demos = load_demo_set(demolog)
        surface = _load_surface(surface_path)
        config = LearnConfig(
            force_threshold_n=force_threshold, schedule_smoothing_s=smoothing
        )
        bundle = learn_bundle(demos, surface, config)
    except (DemoLogError, LearnError, BundleError) as exc:
        click.echo(f"learning failed: {exc}", err=True)
        sys.exit(1)
    save_bundle(bundle, out_path)
    payload = {
        "bundle": str(out_path),
        "segments": [
            {"kind": s.kind, "start": s.start, "end": s.end,
             "k": s.schedule.k_retained}
            for s in bundle.segments
        ],
        "recommended_k": bundle.recommended_k,
        "k_reports": bundle.k_reports,
    }
    _emit(
        payload,
        as_json,
        [f"wrote bundle {out_path}"]
        + [
            f"  segment {i}: {s.kind} [{s.start},{s.end}) k={s.schedule.k_retained}"
            for i, s in enumerate(bundle.segments)
        ]
        + [f"recommended input DOF: {bundle.recommended_k}"],
    )


@main.command("inspect-pcs")
@click.argument("bundle_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--segment", "segment_idx", type=int, default=None)
@click.option("--json", "as_json", is_flag=True)
def inspect_pcs(bundle_path, segment_idx, as_json):
    """Show per-segment coordination structure of a bundle."""
    try:
        bundle = load_bundle(bundle_path)
    except BundleError as exc:
        click.echo(f"invalid bundle: {exc}", err=True)
        sys.exit(1)
    indices = (
        [segment_idx] if segment_idx is not None else range(len(bundle.segments))
    )
    segments = []
    lines = [f"task: {bundle.task}  recommended DOF: {bundle.recommended_k}"]
    for i in indices:
        if not 0 <= i < len(bundle.segments):
            click.echo(f"no segment {i}", err=True)
            sys.exit(1)
        seg = bundle.segments[i]
        frames = seg.schedule.frames
        mid = frames[len(frames) // 2]
        explained = np.mean(
            [f.explained for f in frames if not f.zero_variance], axis=0
        )
        entry = {
            "segment": i,
            "kind": seg.kind,
            "k_retained": seg.schedule.k_retained,
            "mean_explained": [round(float(v), 4) for v in explained],
            "mid_frame_components": [
                {
                    "scale": round(float(np.linalg.norm(row)), 6),
                    "weights": {
                        c.name: round(float(w), 4)
                        for c, w in zip(seg.schema, mid.components[j])
                        if abs(w) > 0.05
                    },
                }
                for j, row in enumerate(mid.scaled)
            ],
        }
        segments.append(entry)
        lines.append(
            f"segment {i} ({seg.kind}): k={entry['k_retained']} "
            f"explained={entry['mean_explained'][:3]}"
        )
        for j, comp in enumerate(entry["mid_frame_components"]):
            lines.append(f"  pc{j + 1} scale={comp['scale']} weights={comp['weights']}")
    _emit({"task": bundle.task, "segments": segments}, as_json, lines)


@main.command()
@click.argument("bundle_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--scenario", "scenario_name", default="shipped",
              help="'shipped' or a scenario JSON path")
@click.option("--policy", "policy_name", type=click.Choice(sorted(POLICIES)),
              default="null")
@click.option("--duration", type=float, default=30.0)
@click.option("--input-mode", type=click.Choice(["1dof", "3dof"]), default="1dof")
@click.option("--log", "log_path", type=click.Path(dir_okay=False), default=None)
@click.option("--json", "as_json", is_flag=True)
def simulate(bundle_path, scenario_name, policy_name, duration, input_mode,
             log_path, as_json):
    """Run a bundle headless against the simulated surface."""
    try:
        bundle = load_bundle(bundle_path)
        scenario = _load_scenario_arg(scenario_name)
    except (BundleError, ValueError) as exc:
        click.echo(f"simulate failed: {exc}", err=True)
        sys.exit(1)
    env = make_field(scenario) if scenario else None
    axes = 1 if input_mode == "1dof" else 3
    policy = POLICIES[policy_name](axes)
    config = ExecutorConfig(dt=1.0 / bundle.capture_rate_hz)
    log = run_headless(
        bundle, env, policy, duration, config, input_mode,
        meta={"scenario": scenario_name if scenario else None,
              "policy": policy_name},
    )
    if log_path:
        save_log(log, log_path)
    payload = {
        "ticks": len(log.frames),
        "final_lifecycle": log.meta["final_lifecycle"],
        "removal_fraction": removal_fraction(env) if env else None,
        "events": sorted({e for f in log.frames for e in f.env_events}),
        "log": str(log_path) if log_path else None,
    }
    _emit(
        payload,
        as_json,
        [
            f"{payload['ticks']} ticks, lifecycle {payload['final_lifecycle']}",
            f"removal fraction: {payload['removal_fraction']}",
            f"events: {payload['events']}",
        ]
        + ([f"log: {log_path}"] if log_path else []),
    )


@main.command()
@click.argument("bundle_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("log_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--json", "as_json", is_flag=True)
def replay(bundle_path, log_path, as_json):
    """Re-execute a logged run and verify commanded states bit-exactly."""
    try:
        bundle = load_bundle(bundle_path)
        log = load_log(log_path)
    except (BundleError, ValueError) as exc:
        click.echo(f"replay failed: {exc}", err=True)
        sys.exit(1)
    scenario_name = log.meta.get("scenario")
    env = None
    if scenario_name == "shipped":
        env = make_field(shipped_scenario())
    elif scenario_name:
        env = make_field(load_scenario(scenario_name))
    ok, tick = replay_run(bundle, env, log)
    payload = {"match": ok, "first_mismatch_tick": tick, "ticks": len(log.frames)}
    _emit(
        payload,
        as_json,
        [
            f"replayed {payload['ticks']} ticks: "
            + ("bit-exact match" if ok else f"MISMATCH at tick {tick}")
        ],
    )
    if not ok:
        sys.exit(1)


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8787)
@click.option("--bundles", "bundle_dir", type=click.Path(file_okay=False),
              required=True)
@click.option("--scenarios", "scenario_dir", type=click.Path(file_okay=False),
              default=None)
def serve(host, port, bundle_dir, scenario_dir):
    """Serve sessions over HTTP/WebSocket for operator clients."""
    import uvicorn

    from .service import create_app

    app = create_app(Path(bundle_dir), Path(scenario_dir) if scenario_dir else None)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
