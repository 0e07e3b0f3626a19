"""Tensor-product B-spline surfaces: evaluation, frames, nearest-point projection.

Conventions:
  - Clamped knot vectors, parameter domain (u, v) in [0, 1] x [0, 1].
  - ``frame`` returns (normal, axis_u, axis_v): the unit normal from the
    cross product of the partials, the normalized d/du tangent, and
    normal x axis_u, so the triple is right-handed with normal last in
    cross-product order (axis_u x axis_v = normal).
  - Projection runs a damped Newton iteration on the squared distance and
    falls back to a coarse grid search if it stalls.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class SurfaceError(ValueError):
    pass


def _basis_functions(knots: np.ndarray, degree: int, t: float) -> tuple[int, np.ndarray]:
    """Nonzero B-spline basis values at t (Cox-de Boor).

    Returns (span, values) where values[j] is N_{span-degree+j,degree}(t)
    for j in 0..degree.
    """
    n_basis = len(knots) - degree - 1
    # find span: last index i with knots[i] <= t < knots[i+1], clamped at the end
    if t >= knots[n_basis]:
        span = n_basis - 1
    else:
        span = int(np.searchsorted(knots, t, side="right")) - 1
        span = max(span, degree)
    values = np.zeros(degree + 1)
    values[0] = 1.0
    left = np.zeros(degree + 1)
    right = np.zeros(degree + 1)
    for j in range(1, degree + 1):
        left[j] = t - knots[span + 1 - j]
        right[j] = knots[span + j] - t
        saved = 0.0
        for r in range(j):
            denom = right[r + 1] + left[j - r]
            temp = values[r] / denom
            values[r] = saved + right[r + 1] * temp
            saved = left[j - r] * temp
        values[j] = saved
    return span, values


def _basis_with_derivative(knots, degree, t):
    """Basis values and first derivatives at t for the nonzero span."""
    span, values = _basis_functions(knots, degree, t)
    if degree == 0:
        return span, values, np.zeros(1)
    # derivative basis: difference of lower-degree basis scaled by knot spans
    span_l, low = _basis_functions(knots, degree - 1, t)
    # low covers basis indices span_l-degree+1 .. span_l of degree-1;
    # align to indices span-degree .. span of full degree
    ders = np.zeros(degree + 1)
    for j in range(degree + 1):
        i = span - degree + j  # basis index of values[j]
        left = 0.0
        right = 0.0
        li = i - (span_l - (degree - 1))
        if 0 <= li <= degree - 1:
            denom = knots[i + degree] - knots[i]
            if denom > 0:
                left = degree * low[li] / denom
        ri = i + 1 - (span_l - (degree - 1))
        if 0 <= ri <= degree - 1:
            denom = knots[i + 1 + degree] - knots[i + 1]
            if denom > 0:
                right = degree * low[ri] / denom
        ders[j] = left - right
    return span, values, ders


def clamped_uniform_knots(n_ctrl: int, degree: int) -> np.ndarray:
    """Clamped knot vector with uniformly spaced interior knots on [0, 1]."""
    n_interior = n_ctrl - degree - 1
    if n_interior < 0:
        raise SurfaceError(
            f"need at least {degree + 1} control points for degree {degree}"
        )
    interior = np.linspace(0.0, 1.0, n_interior + 2)[1:-1]
    return np.concatenate(
        [np.zeros(degree + 1), interior, np.ones(degree + 1)]
    )


@dataclass
class SurfaceModel:
    """Immutable tensor-product B-spline surface over [0,1]^2."""

    control_points: np.ndarray  # (nu, nv, 3)
    knots_u: np.ndarray
    knots_v: np.ndarray
    degree_u: int
    degree_v: int

    def __post_init__(self):
        self.control_points = np.asarray(self.control_points, dtype=float)
        self.knots_u = np.asarray(self.knots_u, dtype=float)
        self.knots_v = np.asarray(self.knots_v, dtype=float)
        if self.control_points.ndim != 3 or self.control_points.shape[2] != 3:
            raise SurfaceError("control_points must have shape (nu, nv, 3)")
        if self.degree_u < 1 or self.degree_v < 1:
            raise SurfaceError("degrees must be >= 1")
        nu, nv, _ = self.control_points.shape
        if len(self.knots_u) != nu + self.degree_u + 1:
            raise SurfaceError("knots_u length inconsistent with grid and degree")
        if len(self.knots_v) != nv + self.degree_v + 1:
            raise SurfaceError("knots_v length inconsistent with grid and degree")
        for knots, deg, name in (
            (self.knots_u, self.degree_u, "u"),
            (self.knots_v, self.degree_v, "v"),
        ):
            if np.any(np.diff(knots) < 0):
                raise SurfaceError(f"knots_{name} must be non-decreasing")
            if np.any(knots[: deg + 1] != knots[0]) or np.any(knots[-deg - 1 :] != knots[-1]):
                raise SurfaceError(f"knots_{name} must be clamped")

    def _check_domain(self, u: float, v: float) -> None:
        if not (0.0 <= u <= 1.0 and 0.0 <= v <= 1.0):
            raise SurfaceError(f"parameters ({u}, {v}) outside [0,1]^2")

    def evaluate(self, u: float, v: float) -> np.ndarray:
        """Point on the surface at (u, v), in meters."""
        self._check_domain(u, v)
        su, bu = _basis_functions(self.knots_u, self.degree_u, float(u))
        sv, bv = _basis_functions(self.knots_v, self.degree_v, float(v))
        block = self.control_points[
            su - self.degree_u : su + 1, sv - self.degree_v : sv + 1
        ]
        return np.einsum("i,j,ijk->k", bu, bv, block)

    def partials(self, u: float, v: float) -> tuple[np.ndarray, np.ndarray]:
        """(dr/du, dr/dv) at (u, v)."""
        self._check_domain(u, v)
        su, bu, du = _basis_with_derivative(self.knots_u, self.degree_u, float(u))
        sv, bv, dv = _basis_with_derivative(self.knots_v, self.degree_v, float(v))
        block = self.control_points[
            su - self.degree_u : su + 1, sv - self.degree_v : sv + 1
        ]
        r_u = np.einsum("i,j,ijk->k", du, bv, block)
        r_v = np.einsum("i,j,ijk->k", bu, dv, block)
        return r_u, r_v

    def frame(self, u: float, v: float):
        """(normal, axis_u, axis_v) unit vectors at (u, v).

        Raises SurfaceError when the partials are degenerate; a fabricated
        frame would silently mask bad geometry.
        """
        r_u, r_v = self.partials(u, v)
        cross = np.cross(r_u, r_v)
        norm = np.linalg.norm(cross)
        if norm < 1e-12 or np.linalg.norm(r_u) < 1e-12:
            raise SurfaceError(f"degenerate surface partials at ({u}, {v})")
        normal = cross / norm
        axis_u = r_u / np.linalg.norm(r_u)
        axis_v = np.cross(normal, axis_u)
        return normal, axis_u, axis_v

    def project(
        self,
        point: np.ndarray,
        seed: tuple[float, float] = (0.5, 0.5),
        max_iter: int = 50,
        tol: float = 1e-10,
    ) -> tuple[float, float]:
        """Parameters of the locally nearest surface point to ``point``.

        Damped Newton on the squared distance, seeded at ``seed``; if the
        iteration stalls it restarts from the best cell of a coarse grid
        search. Converged means the tangential residual is below 1e-8 m.
        """
        point = np.asarray(point, dtype=float)

        uv = np.clip(np.asarray(seed, dtype=float), 0.0, 1.0)
        uv = self._newton_project(point, uv, max_iter, tol)
        if uv is not None:
            return float(uv[0]), float(uv[1])

        # fall back: coarse grid search then refine
        grid = np.linspace(0.0, 1.0, 17)
        best, best_d = None, np.inf
        for gu in grid:
            for gv in grid:
                d = np.sum((self.evaluate(gu, gv) - point) ** 2)
                if d < best_d:
                    best, best_d = (gu, gv), d
        uv = self._newton_project(point, np.array(best), max_iter, tol)
        if uv is None:
            raise SurfaceError(
                f"projection of {point.tolist()} did not converge; "
                "point may be too far from the surface"
            )
        return float(uv[0]), float(uv[1])

    def _newton_project(self, point, uv, max_iter, tol):
        uv = uv.copy()
        for _ in range(max_iter):
            r = self.evaluate(uv[0], uv[1])
            diff = r - point
            r_u, r_v = self.partials(uv[0], uv[1])
            g = np.array([diff @ r_u, diff @ r_v])
            # Gauss-Newton Hessian; second-fundamental-form terms omitted
            h = np.array([[r_u @ r_u, r_u @ r_v], [r_u @ r_v, r_v @ r_v]])
            tangential = np.hypot(g[0] / max(np.linalg.norm(r_u), 1e-12),
                                  g[1] / max(np.linalg.norm(r_v), 1e-12))
            if tangential < 1e-8 or np.linalg.norm(g) < tol:
                return np.clip(uv, 0.0, 1.0)
            try:
                step = np.linalg.solve(h, g)
            except np.linalg.LinAlgError:
                return None
            # damped update with domain clamping
            scale = 1.0
            base = diff @ diff
            for _ in range(12):
                cand = np.clip(uv - scale * step, 0.0, 1.0)
                d = self.evaluate(cand[0], cand[1]) - point
                if d @ d <= base:
                    break
                scale *= 0.5
            else:
                return None
            if np.all(cand == uv):  # pinned at the boundary
                return cand
            uv = cand
        # accept if the final iterate meets the tangential tolerance
        r = self.evaluate(uv[0], uv[1])
        diff = r - point
        r_u, r_v = self.partials(uv[0], uv[1])
        tangential = np.hypot(
            (diff @ r_u) / max(np.linalg.norm(r_u), 1e-12),
            (diff @ r_v) / max(np.linalg.norm(r_v), 1e-12),
        )
        return np.clip(uv, 0.0, 1.0) if tangential < 1e-8 else None

    def to_dict(self) -> dict:
        return {
            "control_points": self.control_points.tolist(),
            "knots_u": self.knots_u.tolist(),
            "knots_v": self.knots_v.tolist(),
            "degree_u": self.degree_u,
            "degree_v": self.degree_v,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SurfaceModel":
        return cls(
            control_points=np.array(d["control_points"], dtype=float),
            knots_u=np.array(d["knots_u"], dtype=float),
            knots_v=np.array(d["knots_v"], dtype=float),
            degree_u=int(d["degree_u"]),
            degree_v=int(d["degree_v"]),
        )


def flat_plane(
    width: float = 1.0,
    height: float = 1.0,
    origin=(0.0, 0.0, 0.0),
    n_ctrl: int = 4,
    degree: int = 3,
) -> SurfaceModel:
    """Planar z=origin_z patch; u spans width along x, v spans height along y."""
    origin = np.asarray(origin, dtype=float)
    us = np.linspace(0.0, width, n_ctrl)
    vs = np.linspace(0.0, height, n_ctrl)
    cp = np.zeros((n_ctrl, n_ctrl, 3))
    for i, x in enumerate(us):
        for j, y in enumerate(vs):
            cp[i, j] = origin + np.array([x, y, 0.0])
    knots = clamped_uniform_knots(n_ctrl, degree)
    return SurfaceModel(cp, knots, knots.copy(), degree, degree)


def cylinder_patch(
    radius: float = 0.75,
    arc: float = 0.9,
    length: float = 1.2,
    n_u: int = 8,
    n_v: int = 8,
    degree: int = 3,
) -> SurfaceModel:
    """Outward-bulging cylindrical patch resembling a fuselage barrel section.

    The cylinder axis runs along y; u sweeps the arc (angle), v sweeps the
    axis. Control points are fitted by interpolation at Greville-like
    parameters so the patch approximates the analytic cylinder closely but
    not exactly (B-splines cannot represent a circle).
    """
    ku = clamped_uniform_knots(n_u, degree)
    kv = clamped_uniform_knots(n_v, degree)

    # least-squares fit on a dense sample grid
    n_samp = 4 * max(n_u, n_v)
    us = np.linspace(0.0, 1.0, n_samp)
    vs = np.linspace(0.0, 1.0, n_samp)
    bu = np.zeros((n_samp, n_u))
    bv = np.zeros((n_samp, n_v))
    for i, t in enumerate(us):
        span, vals = _basis_functions(ku, degree, t)
        bu[i, span - degree : span + 1] = vals
    for i, t in enumerate(vs):
        span, vals = _basis_functions(kv, degree, t)
        bv[i, span - degree : span + 1] = vals

    theta = (us - 0.5) * arc
    targets = np.zeros((n_samp, n_samp, 3))
    for i, th in enumerate(theta):
        for j, t in enumerate(vs):
            targets[i, j] = [
                radius * np.sin(th),
                (t - 0.5) * length,
                radius * np.cos(th) - radius,
            ]

    inv_u = np.linalg.pinv(bu)  # (n_u, n_samp)
    inv_v = np.linalg.pinv(bv)  # (n_v, n_samp)
    cp = np.einsum("iu,uvk,jv->ijk", inv_u, targets, inv_v)
    return SurfaceModel(cp, ku, kv, degree, degree)
