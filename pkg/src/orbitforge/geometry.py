"""Sectioned phase space: squares, straightened vertical leaves, bands, cones
and sampled curves.

All coordinates are straightened: inside component ``i`` a point is
``(x, y)`` in ``[-1, 1]^2`` and the leaf through it is ``{x = const}``, so the
leaf space of a component is just the ``x`` interval.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidInputError

EPS_GEOM = 1e-12
DEFAULT_CURVE_SAMPLES = 512


@dataclass(frozen=True)
class Chart:
    label: str
    section: Optional[int] = None  # index of a flow section, if any


@dataclass(frozen=True)
class SquareComplex:
    k: int
    charts: tuple = ()

    def __post_init__(self):
        if self.k < 1:
            raise InvalidInputError("a square complex needs at least one component")
        if not self.charts:
            object.__setattr__(self, "charts", tuple(Chart(str(i)) for i in range(self.k)))
        if len(self.charts) != self.k:
            raise InvalidInputError("one chart per component")

    @staticmethod
    def domain():
        return (-1.0, 1.0), (-1.0, 1.0)

    def check_component(self, component: int) -> None:
        if not 0 <= component < self.k:
            raise InvalidInputError(f"component {component} not in [0, {self.k})")


@dataclass(frozen=True, order=True)
class Leaf:
    component: int
    s: float

    discontinuous = False

    def __post_init__(self):
        if not -1.0 - EPS_GEOM <= self.s <= 1.0 + EPS_GEOM:
            raise InvalidInputError(f"leaf coordinate {self.s} outside [-1, 1]")

    @property
    def kind(self) -> str:
        """``'-'``, ``'0'``, ``'+'`` for the distinguished leaves, else ``''``."""
        for name, v in (("-", -1.0), ("0", 0.0), ("+", 1.0)):
            if abs(self.s - v) <= EPS_GEOM:
                return name
        return ""

    @property
    def is_boundary(self) -> bool:
        return self.kind in ("-", "+")


@dataclass(frozen=True, order=True)
class Band:
    component: int
    lo: float
    hi: float
    open: bool = True

    def __post_init__(self):
        if not (-1.0 - EPS_GEOM <= self.lo < self.hi <= 1.0 + EPS_GEOM):
            raise InvalidInputError(f"bad band [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains_leaf(self, s: float) -> bool:
        if self.open:
            return self.lo < s < self.hi
        return self.lo <= s <= self.hi

    def contains_band(self, other: "Band") -> bool:
        return (
            other.component == self.component
            and other.lo >= self.lo - EPS_GEOM
            and other.hi <= self.hi + EPS_GEOM
        )

    def to_json(self) -> dict:
        return {"component": self.component, "lo": self.lo, "hi": self.hi, "open": self.open}

    @classmethod
    def from_json(cls, d: dict) -> "Band":
        return cls(int(d["component"]), float(d["lo"]), float(d["hi"]), bool(d.get("open", True)))


@dataclass(frozen=True)
class ConeField:
    """Constant cone of half-angle ``alpha`` around the horizontal axis."""

    alpha: float

    def __post_init__(self):
        if not 0.0 < self.alpha < math.pi / 2:
            raise InvalidInputError("cone angle must lie in (0, pi/2)")

    @property
    def transversal(self) -> bool:
        return self.alpha < math.pi / 2

    def contains(self, v, alpha: float | None = None, strict: bool = False) -> bool:
        a = self.alpha if alpha is None else alpha
        ang = inclination(v)
        return ang < a if strict else ang <= a + EPS_GEOM


def inclination(v) -> float:
    """Angle in ``[0, pi/2]`` between vector ``v`` and the horizontal line."""
    vx, vy = float(v[0]), float(v[1])
    if vx == 0.0 and vy == 0.0:
        raise InvalidInputError("zero vector has no direction")
    return math.atan2(abs(vy), abs(vx))


@dataclass(frozen=True)
class Curve:
    """A sampled C^1 curve inside one component.

    ``points`` is ``(N, 2)``, ``tangents`` ``(N, 2)`` unit vectors.  The endpoint
    flags say whether the first/last samples belong to the curve.
    """

    component: int
    points: np.ndarray
    tangents: np.ndarray
    closed_start: bool = True
    closed_end: bool = True

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        tan = np.asarray(self.tangents, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or tan.shape != pts.shape:
            raise InvalidInputError("points/tangents must both be (N, 2)")
        norms = np.linalg.norm(tan, axis=1)
        if np.any(norms == 0):
            raise InvalidInputError("zero tangent")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "tangents", tan / norms[:, None])

    def __len__(self):
        return len(self.points)

    @classmethod
    def from_points(cls, component: int, points, closed_start=True, closed_end=True) -> "Curve":
        pts = np.asarray(points, dtype=float)
        if len(pts) < 2:
            raise InvalidInputError("curve needs at least two samples")
        if np.allclose(pts, pts[0], atol=EPS_GEOM, rtol=0):
            raise InvalidInputError("degenerate curve: all samples coincide")
        tan = np.gradient(pts, axis=0)
        return cls(component, pts, tan, closed_start, closed_end)

    @classmethod
    def segment(cls, component: int, p0, p1, n: int = DEFAULT_CURVE_SAMPLES,
                closed_start=True, closed_end=True) -> "Curve":
        p0 = np.asarray(p0, dtype=float)
        p1 = np.asarray(p1, dtype=float)
        t = np.linspace(0.0, 1.0, n)[:, None]
        pts = p0 + t * (p1 - p0)
        if np.allclose(p0, p1, atol=EPS_GEOM, rtol=0):
            raise InvalidInputError("degenerate curve: all samples coincide")
        tan = np.repeat((p1 - p0)[None, :], n, axis=0)
        return cls(component, pts, tan, closed_start, closed_end)

    @classmethod
    def horizontal(cls, component: int, x0: float, x1: float, y: float = 0.0,
                   n: int = DEFAULT_CURVE_SAMPLES, **kw) -> "Curve":
        return cls.segment(component, (x0, y), (x1, y), n, **kw)

    @classmethod
    def graph(cls, component: int, g, dg, x0: float, x1: float,
              n: int = DEFAULT_CURVE_SAMPLES) -> "Curve":
        """Graph ``y = g(x)`` over ``[x0, x1]`` with derivative ``dg``."""
        xs = np.linspace(x0, x1, n)
        pts = np.column_stack([xs, g(xs)])
        tan = np.column_stack([np.ones_like(xs), dg(xs)])
        return cls(component, pts, tan)

    def resample(self, n: int = DEFAULT_CURVE_SAMPLES) -> "Curve":
        """Uniform resampling in arc length (linear interpolation)."""
        seg = np.linalg.norm(np.diff(self.points, axis=0), axis=1)
        arc = np.concatenate([[0.0], np.cumsum(seg)])
        if arc[-1] == 0:
            raise InvalidInputError("degenerate curve: all samples coincide")
        u = np.linspace(0.0, arc[-1], n)
        pts = np.column_stack([np.interp(u, arc, self.points[:, j]) for j in range(2)])
        tan = np.column_stack([np.interp(u, arc, self.tangents[:, j]) for j in range(2)])
        return Curve(self.component, pts, tan, self.closed_start, self.closed_end)

    def leaf_cover(self) -> tuple[float, bool, float, bool]:
        """Leaf interval met by the curve: ``(lo, lo_included, hi, hi_included)``.

        The image of a connected curve under the leaf projection is an
        interval, so min/max of the samples describe it completely.
        """
        xs = self.points[:, 0]
        i_lo, i_hi = int(np.argmin(xs)), int(np.argmax(xs))
        n = len(xs) - 1

        def included(i):
            if i == 0:
                return self.closed_start
            if i == n:
                return self.closed_end
            return True

        return float(xs[i_lo]), included(i_lo), float(xs[i_hi]), included(i_hi)


def curve_tangent_in_cone(curve: Curve, cone: ConeField) -> bool:
    if len(curve) < 2:
        raise InvalidInputError("curve needs at least two samples")
    if np.allclose(curve.points, curve.points[0], atol=EPS_GEOM, rtol=0):
        raise InvalidInputError("degenerate curve: all samples coincide")
    ang = np.arctan2(np.abs(curve.tangents[:, 1]), np.abs(curve.tangents[:, 0]))
    return bool(np.all(ang <= cone.alpha + EPS_GEOM))


def interval_covers(lo: float, lo_in: bool, hi: float, hi_in: bool, band: Band,
                    tol: float = EPS_GEOM) -> bool:
    """Does the leaf interval ``<lo, hi>`` contain the band's leaf interval?

    ``lo_in``/``hi_in`` flag whether the interval's endpoints are included.
    For an open band endpoint inclusion of the cover is irrelevant.
    """
    if band.open:
        return lo <= band.lo + tol and hi >= band.hi - tol
    ok_lo = lo < band.lo - tol or (lo_in and lo <= band.lo + tol)
    ok_hi = hi > band.hi + tol or (hi_in and hi >= band.hi - tol)
    return ok_lo and ok_hi


def curve_covers_band(curve: Curve, band: Band) -> bool:
    if curve.component != band.component:
        return False
    lo, lo_in, hi, hi_in = curve.leaf_cover()
    return interval_covers(lo, lo_in, hi, hi_in, band)
