"""End-to-end learning: demonstrations in, behavior bundle out.

Aligns the demonstrations to a common timeline, splits them into free-space
and in-contact segments, re-expresses contact motion in surface coordinates,
then learns per segment the nominal primitives (forward and backward) from
the cross-demo mean and the correction schedule from the cross-demo
variance.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .alignment import align, resample_to_reference
from .bundle import BehaviorBundle, LearnedSegment
from .corrections import choose_k, extract, smooth_schedule
from .demolog import DemoSet
from .dmp import DmpParams, learn as learn_dmp
from .segmentation import project_to_surface_schema, segment
from .surface import SurfaceModel


class LearnError(ValueError):
    pass


@dataclass(frozen=True)
class LearnConfig:
    force_threshold_n: float = 1.0
    filter_cutoff_hz: float = 5.0
    min_segment_len: int = 10
    snap_window: int = 5
    expect_contact: bool = False
    dmp_alpha: float = 60.0
    dmp_a_canonical: float = 4.0
    dmp_n_basis: int = 30
    schedule_smoothing_s: float = 0.1
    k_threshold: float = 0.85


def learn_bundle(
    demo_set: DemoSet, surface: SurfaceModel, config: LearnConfig = LearnConfig()
) -> BehaviorBundle:
    warp = align(demo_set)
    warped, wschema = resample_to_reference(warp)
    dt = 1.0 / demo_set.capture_rate_hz
    raw_segments = segment(
        warped,
        wschema,
        demo_set.capture_rate_hz,
        threshold=config.force_threshold_n,
        filter_cutoff_hz=config.filter_cutoff_hz,
        min_segment_len=config.min_segment_len,
        snap_window=config.snap_window,
        expect_contact=config.expect_contact,
    )

    learned = []
    reports = []
    for seg in raw_segments:
        if seg.kind == "in_contact":
            seg = project_to_surface_schema(seg, surface)
        if seg.length < 3:
            raise LearnError(
                f"segment [{seg.start},{seg.end}) too short to learn a primitive"
            )
        mean_traj = seg.data.mean(axis=0)
        params = DmpParams(
            tau=(seg.length - 1) * dt,
            alpha=config.dmp_alpha,
            a_canonical=config.dmp_a_canonical,
            n_basis=config.dmp_n_basis,
        )
        fwd, bwd = learn_dmp(mean_traj, dt, params)
        schedule = extract(seg.data, seg.schema, dt)
        schedule = smooth_schedule(schedule, config.schedule_smoothing_s)
        report = choose_k(schedule, config.k_threshold)
        schedule.k_retained = report.k
        reports.append(
            {
                "segment": len(learned),
                "kind": seg.kind,
                "k": report.k,
                "mean_explained": report.mean_explained.tolist(),
                "threshold": report.threshold,
                "warning": report.warning,
            }
        )
        learned.append(
            LearnedSegment(
                kind=seg.kind,
                start=seg.start,
                end=seg.end,
                schema=seg.schema,
                params=params,
                forward=fwd,
                backward=bwd,
                schedule=schedule,
            )
        )

    recommended = 3 if any(r["k"] == 3 for r in reports) else 1
    return BehaviorBundle(
        segments=learned,
        surface=surface,
        source_digest=demo_set.digest(),
        task=demo_set.task,
        capture_rate_hz=demo_set.capture_rate_hz,
        recommended_k=recommended,
        k_reports=reports,
        config_snapshot=asdict(config),
    )
