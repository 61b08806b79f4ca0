"""Singular cross-sections near a Lorenz-like equilibrium and first returns.

A section is a rectangle in the plane through ``sigma + d * v3`` (``v3`` the
weak-stable eigenvector, sign chosen by the side) whose normal is the left
eigenvector of the weak-stable eigenvalue.  Chart coordinates:

* ``s``: along the unstable direction, scaled so ``|s| <= 1`` is ``S(delta)``;
* ``y``: along the strong-stable direction, scaled by ``height``.

The singular curve ``l`` is ``s = 0``: the trace of the local stable plane.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import GeometryError, InvalidInputError
from .integrate import dopri_step, initial_step
from .singularities import SingularityInfo
from .system import FlowSystem

TRANSVERSAL_MIN = 1e-6
CROSSING_TOL = 1e-10
ON_CURVE_EPS = 1e-12
NEAR_SING = 1e-9


@dataclass(frozen=True)
class SingularCrossSection:
    sigma: np.ndarray
    side: str
    d: float
    delta: float
    height: float
    center: np.ndarray
    normal: np.ndarray  # oriented along the flow
    a_axis: np.ndarray  # vertical (strong-stable) direction
    b_axis: np.ndarray  # horizontal (unstable) direction

    def to_world(self, s, y) -> np.ndarray:
        s = np.asarray(s, dtype=float)[..., None]
        y = np.asarray(y, dtype=float)[..., None]
        return self.center + s * self.delta * self.b_axis + y * self.height * self.a_axis

    def to_chart(self, p) -> tuple[float, float, float]:
        """``(s, y, n)``: chart coordinates and signed normal offset."""
        q = np.asarray(p, dtype=float) - self.center
        return (float(q @ self.b_axis) / self.delta, float(q @ self.a_axis) / self.height,
                float(q @ self.normal))

    def contains(self, p, tol: float = 1e-9) -> bool:
        s, y, n = self.to_chart(p)
        return abs(n) <= tol and abs(s) <= 1 + tol and abs(y) <= 1 + tol

    def singular_curve(self, n: int = 3) -> np.ndarray:
        return self.to_world(np.zeros(n), np.linspace(-1, 1, n))

    def vertical_boundary(self) -> tuple[np.ndarray, np.ndarray]:
        ys = np.linspace(-1, 1, 3)
        return self.to_world(-np.ones(3), ys), self.to_world(np.ones(3), ys)

    def refine(self, delta: float) -> "SingularCrossSection":
        if not 0 < delta <= self.delta:
            raise InvalidInputError("refinement must shrink the section")
        return SingularCrossSection(self.sigma, self.side, self.d, delta, self.height, self.center,
                                    self.normal, self.a_axis, self.b_axis)

    def to_json(self):
        return {
            "sigma": self.sigma.tolist(), "side": self.side, "d": self.d, "delta": self.delta,
            "height": self.height, "center": self.center.tolist(), "normal": self.normal.tolist(),
            "vertical_axis": self.a_axis.tolist(), "horizontal_axis": self.b_axis.tolist(),
        }


def build_section(sys: FlowSystem, sing: SingularityInfo, side: str = "top", d: float = 0.2,
                  delta: float = 0.1, height: Optional[float] = None) -> SingularCrossSection:
    if sing.classification != "lorenz_like":
        raise InvalidInputError("sections are built at Lorenz-like singularities")
    if side not in ("top", "bottom"):
        raise InvalidInputError("side must be 'top' or 'bottom'")
    if not (d > 0 and delta > 0):
        raise InvalidInputError("d and delta must be positive")
    if len(sing.eigenvectors) < 3:
        raise GeometryError("eigenvectors unavailable (defective Jacobian)")
    height = d if height is None else height
    # sorted eigenvalues: index 0 strong stable, 1 weak stable, 2 unstable
    v_ss, v_ws, v_u = sing.eigenvectors[0], sing.eigenvectors[1], sing.eigenvectors[2]
    if v_ws[np.argmax(np.abs(v_ws))] < 0:
        v_ws = -v_ws
    sign = 1.0 if side == "top" else -1.0
    center = sing.location + sign * d * v_ws
    n = sing.left_eigenvectors[1] / np.linalg.norm(sing.left_eigenvectors[1])
    if float(n @ sys(center)) < 0:
        n = -n
    a = v_ss - (v_ss @ n) * n
    a /= np.linalg.norm(a)
    b = v_u - (v_u @ n) * n - (v_u @ a) * a
    if np.linalg.norm(b) < 1e-12:
        raise GeometryError("unstable direction is tangent to the section normal")
    b /= np.linalg.norm(b)
    sec = SingularCrossSection(np.asarray(sing.location, dtype=float), side, d, delta, height,
                               center, n, a, b)
    check_transversal(sys, sec)
    return sec


def check_transversal(sys: FlowSystem, sec: SingularCrossSection, grid: int = 3) -> float:
    """Minimal ``|n . X|`` on a ``grid x grid`` chart sample; raises when tangent."""
    g = np.linspace(-1, 1, grid)
    S, Y = np.meshgrid(g, g)
    P = sec.to_world(S.ravel(), Y.ravel())
    vals = np.abs(sys(P) @ sec.normal)
    worst = float(np.min(vals))
    if worst < TRANSVERSAL_MIN:
        raise GeometryError(f"flow tangent to section (|n.X|={worst:.3g}); try a smaller d")
    return worst


# ---------------------------------------------------------------------------
# first return

@dataclass
class ReturnSample:
    status: str  # 'return' | 'escape' | 'directed'
    section: int = -1
    s: float = math.nan
    y: float = math.nan
    time: float = math.nan
    point: Optional[np.ndarray] = None

    @property
    def returned(self) -> bool:
        return self.status == "return"


def _refine_crossing(f, t0, y0, k0, h, g, tol=CROSSING_TOL):
    """Bisect in time on ``g(state)``, re-stepping from the step start."""
    a, b = 0.0, h
    yb = dopri_step(f, t0, y0, b, k0)[0]
    while b - a > tol:
        m = 0.5 * (a + b)
        ym = dopri_step(f, t0, y0, m, k0)[0]
        if g(ym) >= 0:
            b, yb = m, ym
        else:
            a = m
    return t0 + b, yb


def return_map_sample(sys: FlowSystem, sections, p, t_max: float = 50.0,
                      source: Optional[int] = None) -> ReturnSample:
    """First positive-direction crossing of any section in the family."""
    p = np.asarray(p, dtype=float)
    if source is None:
        for i, sec in enumerate(sections):
            if sec.contains(p):
                source = i
                break
    if source is not None:
        s0, _, _ = sections[source].to_chart(p)
        if abs(s0) * sections[source].delta <= ON_CURVE_EPS:
            return ReturnSample("directed", source, point=p)
    cfg = sys.config
    f = sys.field
    rj = sys.reinjection
    y = p.copy()
    k = f(y)
    h = initial_step(f, y, k, 1.0, cfg)
    t = 0.0
    prev = [sec.to_chart(y)[2] for sec in sections]
    prev_rj = rj.surface(y) if rj else None
    while t < t_max:
        h = min(h, t_max - t, cfg.max_step)
        y_new, err, _, k_new = dopri_step(f, t, y, h, k)
        scale = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(y), np.abs(y_new))
        en = float(np.max(np.abs(err) / scale))
        if not np.isfinite(en) or en > 1.0:
            h *= 0.2 if not np.isfinite(en) else max(0.2, 0.9 * en ** -0.2)
            if h < cfg.min_step * max(1.0, t):
                return ReturnSample("directed", time=t, point=y)
            continue
        fac = 10.0 if en == 0 else min(10.0, 0.9 * en ** -0.2)
        if rj is not None:
            g_new = rj.surface(y_new)
            if prev_rj < 0 <= g_new:
                tc, yc = _refine_crossing(f, t, y, k, h, rj.surface)
                y = np.asarray(rj.apply(yc), dtype=float)
                t = tc + rj.transit
                k = f(y)
                prev = [sec.to_chart(y)[2] for sec in sections]
                prev_rj = rj.surface(y)
                h = initial_step(f, y, k, 1.0, cfg)
                continue
            prev_rj = g_new
        hit = None
        for i, sec in enumerate(sections):
            n_new = sec.to_chart(y_new)[2]
            if prev[i] < 0 <= n_new:
                tc, yc = _refine_crossing(f, t, y, k, h, lambda z, sec=sec: sec.to_chart(z)[2])
                s, yy, _ = sec.to_chart(yc)
                inside = abs(s) <= 1 and abs(yy) <= 1
                graze = abs(float(sec.normal @ f(yc))) < TRANSVERSAL_MIN
                if inside and not graze and (hit is None or tc < hit[0]):
                    hit = (tc, i, s, yy, yc)
            prev[i] = n_new
        if hit is not None:
            tc, i, s, yy, yc = hit
            return ReturnSample("return", i, s, yy, tc, yc)
        for sec in sections:
            if np.linalg.norm(y_new - sec.sigma) < NEAR_SING:
                return ReturnSample("directed", time=t + h, point=y_new)
        y, k, t = y_new, k_new, t + h
        h *= fac
    return ReturnSample("escape", time=t, point=y)
