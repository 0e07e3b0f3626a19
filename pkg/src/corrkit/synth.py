"""Synthetic demonstration sets with planted, exactly known variance.

Demonstrations share one timeline and identical position channels; the
planted structure lives in force, tool speed and tilt, expressed as unit
directions in normalized contact-schema space. Per-demo coefficients are
studentized (exactly zero-mean, unit-variance, decorrelated across
components), so the cross-demo covariance at every frame equals the planted
amplitude structure to machine precision and the learning pipeline's
recovery can be checked against hard tolerances.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channels import ChannelSchema, contact_schema, raw_capture_schema, ranges
from .demolog import Demo, DemoSet
from .segmentation import quat_from_tilts
from .surface import SurfaceModel, cylinder_patch


class SynthError(ValueError):
    pass


@dataclass(frozen=True)
class PlantedComponent:
    """One correction direction the demonstrators 'varied', with its share
    of the planted schema-space variance."""

    name: str
    coeffs: dict[str, float]  # channel name -> normalized coefficient
    share: float

    def direction(self, schema: list[ChannelSchema]) -> np.ndarray:
        vec = np.zeros(len(schema))
        names = [c.name for c in schema]
        for ch, val in self.coeffs.items():
            if ch not in names:
                raise SynthError(f"planted channel {ch!r} not in schema")
            vec[names.index(ch)] = val
        norm = np.linalg.norm(vec)
        if norm < 1e-12:
            raise SynthError("planted direction is zero")
        return vec / norm


@dataclass(frozen=True)
class SynthSpec:
    name: str
    surface: SurfaceModel
    planted: tuple[PlantedComponent, ...]
    free_planted: tuple[PlantedComponent, ...] = ()
    n_demos: int = 8
    seed: int = 0
    capture_rate_hz: float = 50.0
    approach_s: float = 1.2
    contact_s: float = 3.0
    retract_s: float = 1.2
    amp_total: float = 0.12  # normalized-space rms of the planted offsets
    free_amp_total: float = 0.02
    noise_floor: float = 1e-5
    base_force_n: float = 7.0
    base_speed_v: float = 2.0
    hover_m: float = 0.12
    u_span: tuple[float, float] = (0.15, 0.85)
    v_center: float = 0.5

    def __post_init__(self):
        if self.n_demos < 2:
            raise SynthError("need at least 2 demonstrations")
        shares = [p.share for p in self.planted]
        if shares and (min(shares) <= 0 or abs(sum(shares) - 1.0) > 1e-9):
            raise SynthError("planted shares must be positive and sum to 1")
        dirs = [p.direction(contact_schema()) for p in self.planted]
        for i in range(len(dirs)):
            for j in range(i + 1, len(dirs)):
                if abs(dirs[i] @ dirs[j]) > 1e-9:
                    raise SynthError("planted directions must be orthogonal")


@dataclass
class SynthTruth:
    """Everything the generator knows that the pipeline must rediscover."""

    schema: list[ChannelSchema]
    directions: np.ndarray  # (K, m) normalized contact-schema space
    shares: np.ndarray
    coefficients: np.ndarray  # (N, K) studentized
    amplitude: np.ndarray  # (T_total, K) normalized std per frame
    contact_window: tuple[int, int]  # force-on sample range
    gate_window: tuple[int, int]  # samples where amplitude > 0
    free_directions: np.ndarray
    free_coefficients: np.ndarray
    free_amplitude: np.ndarray  # (T_total, K_free)


def _smoothstep(x: np.ndarray) -> np.ndarray:
    x = np.clip(x, 0.0, 1.0)
    return x * x * (3.0 - 2.0 * x)


def studentize(raw: np.ndarray) -> np.ndarray:
    """Zero the sample mean, decorrelate and unit-scale columns (ddof=0).

    Output columns are exact linear combinations of the mean-removed inputs,
    so they stay zero-mean; QR makes them exactly orthonormal, scaled so the
    population variance of each column is exactly 1.
    """
    n, k = raw.shape
    if n <= k:
        raise SynthError("need more demos than planted components")
    centered = raw - raw.mean(axis=0)
    q, r = np.linalg.qr(centered)
    q = q * np.where(np.diag(r) < 0, -1.0, 1.0)  # deterministic orientation
    return q * np.sqrt(n)


def _plant(
    rng: np.random.Generator, n: int, comps, schema, total_amp: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if not comps:
        m = len(schema)
        return np.zeros((0, m)), np.zeros((n, 0)), np.zeros(0)
    dirs = np.stack([p.direction(schema) for p in comps])
    shares = np.array([p.share for p in comps])
    raw = np.clip(rng.standard_normal((n, len(comps))), -3.0, 3.0)
    coeff = studentize(raw)
    amps = total_amp * np.sqrt(shares)
    return dirs, coeff, amps


def generate(spec: SynthSpec) -> tuple[DemoSet, SynthTruth]:
    """Produce the raw demonstration set and its ground-truth record."""
    rng = np.random.default_rng(spec.seed)
    rate = spec.capture_rate_hz
    n_app = int(round(spec.approach_s * rate))
    n_con = int(round(spec.contact_s * rate))
    n_ret = int(round(spec.retract_s * rate))
    t_total = n_app + n_con + n_ret
    c0, c1 = n_app, n_app + n_con

    cs = contact_schema()
    cs_names = [c.name for c in cs]
    cs_ranges = ranges(cs)
    dirs, coeff, amps = _plant(rng, spec.n_demos, list(spec.planted), cs, spec.amp_total)

    raw_schema = raw_capture_schema()
    fs_dirs, fs_coeff, fs_amps = _plant(
        rng, spec.n_demos, list(spec.free_planted), raw_schema, spec.free_amp_total
    )

    # shared base path over the surface
    prog = np.linspace(0.0, 1.0, n_con)
    u_base = spec.u_span[0] + (spec.u_span[1] - spec.u_span[0]) * prog
    v_base = spec.v_center + 0.02 * np.sin(2.0 * np.pi * prog)

    # planted-amplitude gate: open only in the contact interior so frames
    # near the force ramps carry no variance and boundaries stay shared
    ramp = max(int(round(0.25 * rate)), 2)
    gate = np.zeros(t_total)
    g0, g1 = c0 + 2 * ramp, c1 - 2 * ramp
    local = np.arange(n_con)
    gate[c0:c1] = _smoothstep((local - 2 * ramp) / ramp) * _smoothstep(
        ((n_con - 1 - local) - 2 * ramp) / ramp
    )
    shape = 0.65 + 0.35 * np.sin(np.pi * np.arange(t_total) / max(t_total - 1, 1))
    amp_t = gate * shape  # (T,)
    amplitude = amp_t[:, None] * amps[None, :]

    free_gate = np.zeros(t_total)
    mid_a = slice(ramp, max(n_app - ramp, ramp + 1))
    la = np.arange(t_total)[mid_a]
    free_gate[mid_a] = _smoothstep((la - ramp) / ramp) * _smoothstep(
        ((n_app - ramp - 1) - la) / ramp
    )
    mid_r = slice(c1 + ramp, max(t_total - ramp, c1 + ramp + 1))
    lr = np.arange(t_total)[mid_r]
    free_gate[mid_r] = _smoothstep((lr - (c1 + ramp)) / ramp) * _smoothstep(
        ((t_total - ramp - 1) - lr) / ramp
    )
    free_amplitude = free_gate[:, None] * fs_amps[None, :]

    # base force and tool-speed profiles
    force = np.zeros(t_total)
    lc = np.arange(n_con)
    force[c0:c1] = spec.base_force_n * _smoothstep(lc / ramp) * _smoothstep(
        (n_con - 1 - lc) / ramp
    )
    speed = np.zeros(t_total)
    speed[c0:c1] = spec.base_speed_v * _smoothstep(lc / (2 * ramp)) * _smoothstep(
        (n_con - 1 - lc) / (2 * ramp)
    )

    entry = spec.surface.evaluate(u_base[0], v_base[0])
    exit_p = spec.surface.evaluate(u_base[-1], v_base[-1])
    n_entry, au_entry, av_entry = spec.surface.frame(u_base[0], v_base[0])
    n_exit, au_exit, av_exit = spec.surface.frame(u_base[-1], v_base[-1])

    fi = cs_names.index("f_n")
    vi = cs_names.index("v_tool")
    tui = cs_names.index("theta_u")
    tvi = cs_names.index("theta_v")
    raw_names = [c.name for c in raw_schema]
    r_fi = raw_names.index("f_n")
    r_vi = raw_names.index("v_tool")

    timestamps = np.arange(t_total) / rate
    demos = []
    for i in range(spec.n_demos):
        values = np.zeros((t_total, len(raw_schema)))
        # planted contact-schema offsets, de-normalized where needed
        offsets = np.zeros((t_total, len(cs)))
        for k in range(dirs.shape[0]):
            offsets += coeff[i, k] * amplitude[:, k : k + 1] * dirs[k][None, :]
        if spec.noise_floor > 0:
            noise = rng.standard_normal((t_total, len(cs))) * spec.noise_floor
            noise[:, cs_names.index("u")] = 0.0
            noise[:, cs_names.index("v")] = 0.0
            noise[:, cs_names.index("rate")] = 0.0
            offsets += noise * gate[:, None]

        # free-space phases
        for t in range(n_app):
            h = spec.hover_m * (1.0 - _smoothstep(t / max(n_app - 1, 1)))
            values[t, 0:3] = entry + h * n_entry
            values[t, 3:7] = quat_from_tilts(0.0, 0.0, n_entry, au_entry, av_entry)
        for j, t in enumerate(range(c1, t_total)):
            h = spec.hover_m * _smoothstep(j / max(n_ret - 1, 1))
            values[t, 0:3] = exit_p + h * n_exit
            values[t, 3:7] = quat_from_tilts(0.0, 0.0, n_exit, au_exit, av_exit)

        # contact phase
        for j, t in enumerate(range(c0, c1)):
            u, v = u_base[j], v_base[j]
            values[t, 0:3] = spec.surface.evaluate(u, v)
            nrm, au, av = spec.surface.frame(u, v)
            th_u = offsets[t, tui] * cs_ranges[tui]
            th_v = offsets[t, tvi] * cs_ranges[tvi]
            values[t, 3:7] = quat_from_tilts(th_u, th_v, nrm, au, av)

        values[:, r_fi] = np.maximum(force + offsets[:, fi] * cs_ranges[fi], 0.0)
        values[:, r_vi] = speed + offsets[:, vi] * cs_ranges[vi]

        # free-space planted offsets act on raw channels directly
        raw_rng = ranges(raw_schema)
        for k in range(fs_dirs.shape[0]):
            values += (
                fs_coeff[i, k]
                * free_amplitude[:, k : k + 1]
                * (fs_dirs[k] * raw_rng)[None, :]
            )

        demos.append(Demo(timestamps.copy(), values))

    demo_set = DemoSet(demos, raw_schema, task=spec.name, capture_rate_hz=rate)
    truth = SynthTruth(
        schema=cs,
        directions=dirs,
        shares=np.array([p.share for p in spec.planted]),
        coefficients=coeff,
        amplitude=amplitude,
        contact_window=(c0, c1),
        gate_window=(g0, g1),
        free_directions=fs_dirs,
        free_coefficients=fs_coeff,
        free_amplitude=free_amplitude,
    )
    return demo_set, truth


def single_coordination_task(seed: int = 0, surface: SurfaceModel | None = None) -> SynthSpec:
    """One dominant force/tool-speed coordination (~87% of planted variance)
    plus small independent tilt wobbles; recommends 1-DOF input."""
    return SynthSpec(
        name="wipe-single",
        surface=surface if surface is not None else cylinder_patch(),
        planted=(
            PlantedComponent("force-speed", {"f_n": 0.8, "v_tool": 0.6}, 0.87),
            PlantedComponent("tilt-u", {"theta_u": 1.0}, 0.07),
            PlantedComponent("tilt-v", {"theta_v": 1.0}, 0.06),
        ),
        free_planted=(
            PlantedComponent("speed-prep", {"v_tool": 1.0}, 1.0),
        ),
        seed=seed,
    )


def dual_structure_task(seed: int = 0, surface: SurfaceModel | None = None) -> SynthSpec:
    """Force-dominant direction (80%) plus a distinct tilt direction (15%)
    and a minor one (5%); recommends 3-DOF input."""
    return SynthSpec(
        name="wipe-dual",
        surface=surface if surface is not None else cylinder_patch(),
        planted=(
            PlantedComponent("force-speed", {"f_n": 0.9, "v_tool": 0.43588989435406733}, 0.80),
            PlantedComponent("attack-angle", {"theta_u": 1.0}, 0.15),
            PlantedComponent("side-tilt", {"theta_v": 1.0}, 0.05),
        ),
        free_planted=(
            PlantedComponent("speed-prep", {"v_tool": 1.0}, 1.0),
        ),
        seed=seed,
    )
