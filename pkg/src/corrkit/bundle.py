"""Behavior bundle: the learned artifact a session executes.

A bundle is a versioned JSON document holding, per segment, the channel
schema, the forward and backward movement primitives, and the correction
schedule, plus the surface model and provenance of the source
demonstrations. Floats are serialized with shortest round-trip
representation, so save/load reproduces every stored value bit-exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

from .channels import ChannelSchema
from .corrections import CorrectionFrame, CorrectionSchedule
from .dmp import DmpParams, LearnedDmp
from .segmentation import SegmentKind
from .surface import SurfaceModel

BUNDLE_VERSION = 1


class BundleError(ValueError):
    pass


@dataclass
class LearnedSegment:
    """One behavior segment ready to execute."""

    kind: SegmentKind
    start: int
    end: int
    schema: list[ChannelSchema]
    params: DmpParams
    forward: LearnedDmp
    backward: LearnedDmp
    schedule: CorrectionSchedule

    def __post_init__(self):
        if self.end <= self.start:
            raise BundleError("segment must span at least one sample")
        if not (
            np.array_equal(self.forward.x0, self.backward.g)
            and np.array_equal(self.forward.g, self.backward.x0)
        ):
            raise BundleError("forward start must equal backward goal and vice versa")
        if len(self.schedule.frames) != self.end - self.start:
            raise BundleError("schedule must cover every sample of the segment")

    @property
    def length(self) -> int:
        return self.end - self.start


@dataclass
class BehaviorBundle:
    segments: list[LearnedSegment]
    surface: SurfaceModel
    source_digest: str
    task: str
    capture_rate_hz: float
    recommended_k: int = 1
    k_reports: list[dict] = field(default_factory=list)
    config_snapshot: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.segments:
            raise BundleError("bundle needs at least one segment")
        cursor = self.segments[0].start
        if cursor != 0:
            raise BundleError("first segment must start at reference sample 0")
        for seg in self.segments:
            if seg.start != cursor:
                raise BundleError("segments must tile the timeline without gaps")
            cursor = seg.end


def _arr(a: np.ndarray) -> list:
    return np.asarray(a, dtype=float).tolist()


def _frame_to_dict(fr: CorrectionFrame) -> dict:
    return {
        "t": fr.t,
        "mean": _arr(fr.mean),
        "components": _arr(fr.components),
        "singulars": _arr(fr.singulars),
        "scaled": _arr(fr.scaled),
        "explained": _arr(fr.explained),
        "zero_variance": fr.zero_variance,
    }


def _frame_from_dict(d: dict, m: int) -> CorrectionFrame:
    comps = np.asarray(d["components"], dtype=float).reshape(-1, m)
    scaled = np.asarray(d["scaled"], dtype=float).reshape(-1, m)
    return CorrectionFrame(
        t=int(d["t"]),
        mean=np.asarray(d["mean"], dtype=float),
        components=comps,
        singulars=np.asarray(d["singulars"], dtype=float),
        scaled=scaled,
        explained=np.asarray(d["explained"], dtype=float),
        zero_variance=bool(d["zero_variance"]),
    )


def _dmp_to_dict(dmp: LearnedDmp) -> dict:
    return {
        "weights": _arr(dmp.weights),
        "x0": _arr(dmp.x0),
        "g": _arr(dmp.g),
        "z0": _arr(dmp.z0),
        "direction": dmp.direction,
    }


def _dmp_from_dict(d: dict) -> LearnedDmp:
    x0 = np.asarray(d["x0"], dtype=float)
    return LearnedDmp(
        weights=np.asarray(d["weights"], dtype=float).reshape(len(x0), -1),
        x0=x0,
        g=np.asarray(d["g"], dtype=float),
        z0=np.asarray(d["z0"], dtype=float),
        direction=d["direction"],
    )


def bundle_to_dict(b: BehaviorBundle) -> dict:
    return {
        "format": "behavior-bundle",
        "version": BUNDLE_VERSION,
        "task": b.task,
        "source_digest": b.source_digest,
        "capture_rate_hz": b.capture_rate_hz,
        "recommended_k": b.recommended_k,
        "k_reports": b.k_reports,
        "config_snapshot": b.config_snapshot,
        "surface": b.surface.to_dict(),
        "segments": [
            {
                "kind": s.kind,
                "start": s.start,
                "end": s.end,
                "schema": [c.to_dict() for c in s.schema],
                "params": {
                    "tau": s.params.tau,
                    "alpha": s.params.alpha,
                    "beta": s.params.beta,
                    "a_canonical": s.params.a_canonical,
                    "n_basis": s.params.n_basis,
                    "ridge": s.params.ridge,
                },
                "forward": _dmp_to_dict(s.forward),
                "backward": _dmp_to_dict(s.backward),
                "schedule": {
                    "frame_dt": s.schedule.frame_dt,
                    "k_retained": s.schedule.k_retained,
                    "smoothing_time_constant": s.schedule.smoothing_time_constant,
                    "frames": [_frame_to_dict(fr) for fr in s.schedule.frames],
                },
            }
            for s in b.segments
        ],
    }


def bundle_from_dict(doc: dict) -> BehaviorBundle:
    if doc.get("format") != "behavior-bundle":
        raise BundleError("not a behavior bundle document")
    if doc.get("version") != BUNDLE_VERSION:
        raise BundleError(f"unsupported bundle version {doc.get('version')!r}")
    segments = []
    for sd in doc["segments"]:
        schema = [ChannelSchema.from_dict(c) for c in sd["schema"]]
        m = len(schema)
        params = DmpParams(**sd["params"])
        sched = CorrectionSchedule(
            frames=[_frame_from_dict(fd, m) for fd in sd["schedule"]["frames"]],
            schema=schema,
            frame_dt=float(sd["schedule"]["frame_dt"]),
            k_retained=int(sd["schedule"]["k_retained"]),
            smoothing_time_constant=float(sd["schedule"]["smoothing_time_constant"]),
        )
        segments.append(
            LearnedSegment(
                kind=sd["kind"],
                start=int(sd["start"]),
                end=int(sd["end"]),
                schema=schema,
                params=params,
                forward=_dmp_from_dict(sd["forward"]),
                backward=_dmp_from_dict(sd["backward"]),
                schedule=sched,
            )
        )
    return BehaviorBundle(
        segments=segments,
        surface=SurfaceModel.from_dict(doc["surface"]),
        source_digest=doc["source_digest"],
        task=doc["task"],
        capture_rate_hz=float(doc["capture_rate_hz"]),
        recommended_k=int(doc["recommended_k"]),
        k_reports=doc.get("k_reports", []),
        config_snapshot=doc.get("config_snapshot", {}),
    )


def save_bundle(bundle: BehaviorBundle, path: Union[str, Path]) -> None:
    Path(path).write_text(json.dumps(bundle_to_dict(bundle), indent=1))


def load_bundle(path: Union[str, Path]) -> BehaviorBundle:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise BundleError(f"malformed bundle file: {e}") from e
    return bundle_from_dict(doc)
