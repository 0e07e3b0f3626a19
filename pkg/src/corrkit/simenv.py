"""Simulated cleaning environment on the task surface.

A paint-density grid over the surface's (u, v) domain is eroded by the tool
according to a thresholded linear law: cells inside the tool footprint lose
density at rate * (normal force above threshold) * tool speed. An obstacle
mask raises collision events that pause the session. The scenario file
format pins the paint layout, obstacle and removal constants so runs are
reproducible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np


class SimEnvError(ValueError):
    pass


@dataclass
class Scenario:
    """Declarative paint layout: a base band plus circular patches, an
    optional rectangular obstacle, and the removal constants."""

    name: str
    grid: tuple[int, int] = (96, 96)
    band_u: tuple[float, float] = (0.22, 0.78)
    band_v: tuple[float, float] = (0.45, 0.55)
    band_density: float = 0.28
    patches: list[dict] = field(default_factory=list)  # {u, v, radius, density}
    obstacle: dict | None = None  # {u0, u1, v0, v1}
    removal_rate: float = 0.09  # density per (N * V * s)
    force_threshold_n: float = 2.0
    tool_radius: float = 0.08

    def to_dict(self) -> dict:
        return {
            "format": "paint-scenario",
            "version": 1,
            "name": self.name,
            "grid": list(self.grid),
            "band_u": list(self.band_u),
            "band_v": list(self.band_v),
            "band_density": self.band_density,
            "patches": self.patches,
            "obstacle": self.obstacle,
            "removal_rate": self.removal_rate,
            "force_threshold_n": self.force_threshold_n,
            "tool_radius": self.tool_radius,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        if d.get("format") != "paint-scenario" or d.get("version") != 1:
            raise SimEnvError("not a version-1 paint scenario document")
        return cls(
            name=d["name"],
            grid=tuple(d["grid"]),
            band_u=tuple(d["band_u"]),
            band_v=tuple(d["band_v"]),
            band_density=float(d["band_density"]),
            patches=list(d["patches"]),
            obstacle=d.get("obstacle"),
            removal_rate=float(d["removal_rate"]),
            force_threshold_n=float(d["force_threshold_n"]),
            tool_radius=float(d["tool_radius"]),
        )


def save_scenario(sc: Scenario, path: Union[str, Path]) -> None:
    Path(path).write_text(json.dumps(sc.to_dict(), indent=1))


def load_scenario(path: Union[str, Path]) -> Scenario:
    try:
        return Scenario.from_dict(json.loads(Path(path).read_text()))
    except json.JSONDecodeError as e:
        raise SimEnvError(f"malformed scenario file: {e}") from e


def seeded_patch_scenario(
    name: str = "seeded", n_patches: int = 3, seed: int = 0, **kwargs
) -> Scenario:
    """Patches at seeded random positions along the band, varying amount
    and location of the heavy paint between scenario instances."""
    rng = np.random.default_rng(seed)
    sc = Scenario(name=name, **kwargs)
    u0, u1 = sc.band_u
    v0, v1 = sc.band_v
    patches = []
    for _ in range(n_patches):
        patches.append(
            {
                "u": float(rng.uniform(u0 + 0.08, u1 - 0.08)),
                "v": float(rng.uniform((v0 + v1) / 2 - 0.02, (v0 + v1) / 2 + 0.02)),
                "radius": float(rng.uniform(0.045, 0.06)),
                "density": 1.0,
            }
        )
    sc.patches = patches
    return sc


@dataclass
class PaintField:
    """Mutable environment state for one session."""

    density: np.ndarray  # (nu, nv) in [0, 1]
    obstacle: np.ndarray  # (nu, nv) bool, immutable during a session
    removal_rate: float
    force_threshold_n: float
    tool_radius: float
    initial_total: float = 0.0

    def __post_init__(self):
        if self.density.shape != self.obstacle.shape:
            raise SimEnvError("density and obstacle grids must match")
        if self.initial_total == 0.0:
            self.initial_total = float(self.density.sum())
        self._uu, self._vv = np.meshgrid(
            _centers(self.density.shape[0]), _centers(self.density.shape[1]), indexing="ij"
        )

    def copy(self) -> "PaintField":
        return PaintField(
            self.density.copy(),
            self.obstacle,
            self.removal_rate,
            self.force_threshold_n,
            self.tool_radius,
            self.initial_total,
        )


def _centers(n: int) -> np.ndarray:
    return (np.arange(n) + 0.5) / n


def make_field(sc: Scenario) -> PaintField:
    nu, nv = sc.grid
    uu, vv = np.meshgrid(_centers(nu), _centers(nv), indexing="ij")
    density = np.zeros((nu, nv))
    band = (
        (uu >= sc.band_u[0]) & (uu <= sc.band_u[1])
        & (vv >= sc.band_v[0]) & (vv <= sc.band_v[1])
    )
    density[band] = sc.band_density
    for p in sc.patches:
        mask = (uu - p["u"]) ** 2 + (vv - p["v"]) ** 2 <= p["radius"] ** 2
        density[mask] = np.maximum(density[mask], p["density"])
    obstacle = np.zeros((nu, nv), dtype=bool)
    if sc.obstacle:
        o = sc.obstacle
        obstacle = (uu >= o["u0"]) & (uu <= o["u1"]) & (vv >= o["v0"]) & (vv <= o["v1"])
    return PaintField(
        density, obstacle, sc.removal_rate, sc.force_threshold_n, sc.tool_radius
    )


def step_env(
    field: PaintField, tool_state: tuple[float, float, float, float], dt: float
) -> list[str]:
    """Erode paint under the tool for one tick; returns event names."""
    u, v, f_n, v_tool = tool_state
    if not (0.0 <= u <= 1.0 and 0.0 <= v <= 1.0):
        raise SimEnvError(f"tool left the surface domain: ({u}, {v})")
    events: list[str] = []
    footprint = (field._uu - u) ** 2 + (field._vv - v) ** 2 <= field.tool_radius**2
    if not footprint.any():
        return events
    if (footprint & field.obstacle).any():
        events.append("collision")
    removal = (
        field.removal_rate
        * max(0.0, f_n - field.force_threshold_n)
        * max(0.0, v_tool)
        * dt
    )
    if removal > 0.0:
        field.density[footprint] = np.maximum(field.density[footprint] - removal, 0.0)
    return events


def removal_fraction(field: PaintField) -> float:
    if field.initial_total <= 0.0:
        return 1.0
    return 1.0 - float(field.density.sum()) / field.initial_total


def local_density(field: PaintField, u: float, v: float) -> float:
    """Mean residual density under the tool footprint (telemetry)."""
    footprint = (field._uu - u) ** 2 + (field._vv - v) ** 2 <= field.tool_radius**2
    if not footprint.any():
        return 0.0
    return float(field.density[footprint].mean())


def shipped_scenario() -> Scenario:
    """The default demo scenario: an easy marker band with three heavy
    paint spots that the nominal pass cannot fully clear."""
    return Scenario(
        name="stripe-and-spots",
        patches=[
            {"u": 0.32, "v": 0.5, "radius": 0.05, "density": 1.0},
            {"u": 0.5, "v": 0.5, "radius": 0.05, "density": 1.0},
            {"u": 0.68, "v": 0.5, "radius": 0.05, "density": 1.0},
        ],
        obstacle={"u0": 0.4, "u1": 0.6, "v0": 0.78, "v1": 0.88},
    )
