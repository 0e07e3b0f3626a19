"""Scripted operator policies for headless runs.

A policy maps the previous telemetry frame (None on the first tick) to the
pair (device displacement vector, reverse pressed). The corrective strategy
mirrors an operator who watches the work surface: ride the nominal behavior
through the contact pass, reverse back to its start when paint remains, then
re-run the pass while pushing the device to raise force and speed.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .executor import Policy, TelemetryFrame


def null_policy(n_axes: int = 1) -> Policy:
    """Hands off: zero displacement, never reverses."""
    zeros = np.zeros(n_axes)

    def policy(frame: Optional[TelemetryFrame]):
        return zeros, False

    return policy


def constant_policy(d, reverse: bool = False) -> Policy:
    """Pins the device at a fixed displacement."""
    vec = np.atleast_1d(np.asarray(d, dtype=float))

    def policy(frame: Optional[TelemetryFrame]):
        return vec, reverse

    return policy


class CorrectiveRepassPolicy:
    """Ride, inspect, reverse, boosted re-pass.

    Phases: "ride" until the contact pass finishes; if coverage is below
    `coverage_target`, "reverse" to the segment start; "boost" holds the
    device at `boost` through the repeated pass so force and speed rise along
    the dominant coordination direction; then "done" rides out the rest.
    """

    def __init__(
        self,
        n_axes: int = 1,
        coverage_target: float = 0.9,
        boost: float = 0.59,
        axis=None,
    ):
        self.n_axes = n_axes
        self.coverage_target = coverage_target
        self.boost = boost
        self.axis = np.asarray(
            axis if axis is not None else [1.0] + [0.0] * (n_axes - 1), dtype=float
        )
        self.phase = "ride"

    def __call__(self, frame: Optional[TelemetryFrame]):
        zeros = np.zeros(self.n_axes)
        if frame is None:
            return zeros, False
        if self.phase == "ride":
            if frame.segment_kind == "in_contact" and frame.progress >= 0.999:
                if frame.removal < self.coverage_target:
                    self.phase = "reverse"
                else:
                    self.phase = "done"
            return zeros, False
        if self.phase == "reverse":
            if frame.segment_kind == "in_contact" and frame.progress <= 0.005:
                self.phase = "boost"
                return self.boost * self.axis, False
            return zeros, True
        if self.phase == "boost":
            if frame.segment_kind == "in_contact" and frame.progress >= 0.999:
                self.phase = "done"
                return zeros, False
            return self.boost * self.axis, False
        return zeros, False
