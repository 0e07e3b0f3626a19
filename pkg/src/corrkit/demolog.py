"""Demonstration log files: a self-describing, line-oriented text format.

A log holds N time-stamped trajectories sharing one channel schema. The
header declares the schema so downstream stages never hard-code column
meanings. See ``docs/demolog_format.md`` for the byte-level grammar.
"""

from __future__ import annotations

import hashlib
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

from .channels import ChannelSchema, ChannelKind, SchemaError, validate_schema

FORMAT_NAME = "demolog"
FORMAT_VERSION = 1


class DemoLogError(ValueError):
    """Raised for malformed demonstration log files."""


@dataclass
class Demo:
    """One demonstration: strictly increasing timestamps and a value matrix."""

    timestamps: np.ndarray  # (T,) seconds
    values: np.ndarray  # (T, channels)

    def __post_init__(self):
        self.timestamps = np.asarray(self.timestamps, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.timestamps.ndim != 1 or self.values.ndim != 2:
            raise DemoLogError("demo must be a 1-D timestamp vector and 2-D values")
        if len(self.timestamps) != len(self.values):
            raise DemoLogError("timestamp count does not match row count")
        if len(self.timestamps) and np.any(np.diff(self.timestamps) <= 0):
            raise DemoLogError("timestamps must be strictly increasing")

    def __len__(self) -> int:
        return len(self.timestamps)


@dataclass
class DemoSet:
    """N demonstrations of one task sharing a raw channel schema."""

    demos: list[Demo]
    schema: list[ChannelSchema]
    task: str = "task"
    capture_rate_hz: float = 100.0

    def __post_init__(self):
        validate_schema(self.schema)
        if len(self.demos) < 2:
            raise DemoLogError(
                f"need at least 2 demonstrations for variance analysis, got {len(self.demos)}"
            )
        m = len(self.schema)
        for i, d in enumerate(self.demos):
            if d.values.shape[1] != m:
                raise DemoLogError(
                    f"demo {i} has {d.values.shape[1]} channels, schema has {m}"
                )
            if len(d) == 0:
                raise DemoLogError(f"demo {i} is empty")

    @property
    def n_demos(self) -> int:
        return len(self.demos)

    def channel_names(self) -> list[str]:
        return [c.name for c in self.schema]

    def digest(self) -> str:
        """Content hash of the canonical serialization, for bundle provenance."""
        return hashlib.sha256(dumps_demo_set(self).encode()).hexdigest()[:16]


def _format_float(x: float) -> str:
    return repr(float(x))


def dumps_demo_set(ds: DemoSet) -> str:
    out = io.StringIO()
    out.write(f"{FORMAT_NAME} {FORMAT_VERSION}\n")
    out.write(f"task {ds.task}\n")
    out.write(f"rate {_format_float(ds.capture_rate_hz)}\n")
    for c in ds.schema:
        axis = c.spatial_axis if c.spatial_axis is not None else "-"
        unit = c.unit if c.unit else "-"
        out.write(
            f"channel {c.name} {c.kind.value} {_format_float(c.normalization_range)} "
            f"{unit} {axis}\n"
        )
    for demo in ds.demos:
        out.write("demo\n")
        for t, row in zip(demo.timestamps, demo.values):
            cells = " ".join(_format_float(v) for v in row)
            out.write(f"{_format_float(t)} {cells}\n")
    return out.getvalue()


def save_demo_set(ds: DemoSet, path: Union[str, Path]) -> None:
    Path(path).write_text(dumps_demo_set(ds))


def loads_demo_set(text: str) -> DemoSet:
    lines = text.splitlines()
    if not lines:
        raise DemoLogError("empty demonstration log")
    head = lines[0].split()
    if len(head) != 2 or head[0] != FORMAT_NAME:
        raise DemoLogError(f"not a demonstration log: first line {lines[0]!r}")
    if int(head[1]) != FORMAT_VERSION:
        raise DemoLogError(f"unsupported demolog version {head[1]}")

    task = "task"
    rate = 100.0
    schema: list[ChannelSchema] = []
    demos: list[Demo] = []
    cur_t: list[float] = []
    cur_v: list[list[float]] = []

    def flush():
        if cur_t or in_demo[0]:
            if not cur_t:
                raise DemoLogError("demo block with no rows")
            try:
                demos.append(Demo(np.array(cur_t), np.array(cur_v)))
            except DemoLogError as e:
                raise DemoLogError(f"demo {len(demos)}: {e}") from e
            cur_t.clear()
            cur_v.clear()

    in_demo = [False]
    for lineno, line in enumerate(lines[1:], start=2):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        key = parts[0]
        if key == "task":
            task = line.split(None, 1)[1] if len(parts) > 1 else "task"
        elif key == "rate":
            rate = float(parts[1])
        elif key == "channel":
            if len(parts) != 6:
                raise DemoLogError(f"line {lineno}: malformed channel declaration")
            _, name, kind, rng, unit, axis = parts
            try:
                schema.append(
                    ChannelSchema(
                        name=name,
                        kind=ChannelKind(kind),
                        normalization_range=float(rng),
                        unit="" if unit == "-" else unit,
                        spatial_axis=None if axis == "-" else axis,
                    )
                )
            except (ValueError, SchemaError) as e:
                raise DemoLogError(f"line {lineno}: {e}") from e
        elif key == "demo":
            flush()
            in_demo[0] = True
        else:
            if not in_demo[0]:
                raise DemoLogError(f"line {lineno}: data row outside a demo block")
            try:
                nums = [float(p) for p in parts]
            except ValueError as e:
                raise DemoLogError(f"line {lineno}: {e}") from e
            if len(nums) != len(schema) + 1:
                raise DemoLogError(
                    f"line {lineno}: expected {len(schema) + 1} columns, got {len(nums)}"
                )
            cur_t.append(nums[0])
            cur_v.append(nums[1:])
    flush()

    try:
        return DemoSet(demos=demos, schema=schema, task=task, capture_rate_hz=rate)
    except (DemoLogError, SchemaError) as e:
        raise DemoLogError(str(e)) from e


def load_demo_set(path: Union[str, Path]) -> DemoSet:
    p = Path(path)
    if not p.exists():
        raise DemoLogError(f"no such demonstration log: {p}")
    return loads_demo_set(p.read_text())
