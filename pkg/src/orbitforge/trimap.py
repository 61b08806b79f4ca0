"""Triangular maps: partially defined self-maps of a square complex that send
vertical leaves into vertical leaves.

A map is stored as a table of :class:`Branch` objects.  Each branch covers a
leaf interval of one component, on which the induced leaf map is continuous
and monotone, and carries the formula for the vertical coordinate.  Branch
formulas are required to extend continuously to the closed interval so that
one-sided limits at the branch ends are available exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, InvalidInputError, NoLimitError
from .geometry import EPS_GEOM, ConeField, Leaf, SquareComplex

H_FD = 1e-6
DISCONTINUITY_MARGIN = 1e-4
LIMIT_STEPS = tuple(10.0 ** -e for e in range(3, 9))


@dataclass(frozen=True)
class Branch:
    component: int
    lo: float
    hi: float
    leaf: Callable
    vertical: Callable
    target: Optional[int] = None
    closed_lo: bool = True
    closed_hi: bool = True
    dleaf: Optional[Callable] = None
    dvertical: Optional[Callable] = None  # (s, y) -> (dy'/ds, dy'/dy)
    inverse: Optional[Callable] = None
    label: str = ""

    def __post_init__(self):
        if not self.lo < self.hi:
            raise InvalidInputError("branch interval must be non-degenerate")
        if self.target is None:
            object.__setattr__(self, "target", self.component)

    def contains(self, s) -> np.ndarray | bool:
        s = np.asarray(s)
        left = (s >= self.lo) if self.closed_lo else (s > self.lo)
        right = (s <= self.hi) if self.closed_hi else (s < self.hi)
        return left & right

    @property
    def increasing(self) -> bool:
        return float(self.leaf(self.hi)) >= float(self.leaf(self.lo))

    def image(self) -> tuple[float, float]:
        a, b = float(self.leaf(self.lo)), float(self.leaf(self.hi))
        return (a, b) if a <= b else (b, a)

    def derivative(self, s: float) -> float:
        if self.dleaf is not None:
            return float(self.dleaf(s))
        h = min(H_FD, 0.5 * (self.hi - self.lo))
        a, b = max(self.lo, s - h), min(self.hi, s + h)
        return float((self.leaf(b) - self.leaf(a)) / (b - a))

    def invert(self, t: float) -> float:
        """Leaf in ``[lo, hi]`` mapped to ``t`` (bisection on the monotone branch)."""
        if self.inverse is not None:
            return float(np.clip(self.inverse(t), self.lo, self.hi))
        a, b = self.lo, self.hi
        fa = float(self.leaf(a)) - t
        if fa == 0.0:
            return a
        for _ in range(200):
            m = 0.5 * (a + b)
            if m == a or m == b:
                break
            fm = float(self.leaf(m)) - t
            if fm == 0.0:
                return m
            if (fm > 0) == (fa > 0):
                a, fa = m, fm
            else:
                b = m
        return 0.5 * (a + b)


class FlaggedLeaf(Leaf):
    """Image of a leaf lying on a discontinuity; carries both one-sided limits."""

    def __init__(self, component, s, left, right):
        super().__init__(component, s)
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)

    discontinuous = True


def _leaf(component: int, s: float) -> Leaf:
    if abs(s) > 1.0 and abs(s) <= 1.0 + 1e-9:
        s = math.copysign(1.0, s)
    return Leaf(component, float(s))


@dataclass(frozen=True)
class TriangularMap:
    complex: SquareComplex
    branches: tuple
    cone: ConeField
    declared_lambda: float
    contraction: Optional[float] = None
    name: str = ""
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "branches", tuple(self.branches))
        for b in self.branches:
            self.complex.check_component(b.component)
            self.complex.check_component(b.target)
        if self.declared_lambda <= 0:
            raise InvalidInputError("declared lambda must be positive")

    @property
    def k(self) -> int:
        return self.complex.k

    # -- branch bookkeeping -------------------------------------------------
    def branches_of(self, component: int) -> list:
        return [b for b in self.branches if b.component == component]

    def branch_at(self, component: int, s: float) -> Optional[Branch]:
        for b in self.branches:
            if b.component == component and b.contains(s):
                return b
        return None

    def branch_index(self, component: int, s: float) -> int:
        for i, b in enumerate(self.branches):
            if b.component == component and b.contains(s):
                return i
        return -1

    def in_domain(self, component: int, s: float) -> bool:
        return self.branch_at(component, s) is not None

    def breakpoints(self, component: int) -> list[float]:
        """Branch ends strictly inside ``(-1, 1)``: where continuity pieces stop."""
        pts = set()
        for b in self.branches_of(component):
            for v in (b.lo, b.hi):
                if -1.0 + EPS_GEOM < v < 1.0 - EPS_GEOM:
                    pts.add(v)
        return sorted(pts)

    def discontinuities(self, component: int) -> list[float]:
        """Breakpoints where F jumps: the adjacent branches disagree there, or
        the domain stops on one side only while the other side is open."""
        out = []
        for v in self.breakpoints(component):
            left = [b for b in self.branches_of(component) if abs(b.hi - v) <= EPS_GEOM]
            right = [b for b in self.branches_of(component) if abs(b.lo - v) <= EPS_GEOM]
            if left and right and _jumps(left[0], right[0], v):
                out.append(v)
        return out

    def is_regular(self, component: int, s: float) -> bool:
        """``s`` in Dom(F) and F continuous on the domain near ``s``."""
        b = self.branch_at(component, s)
        if b is None:
            return False
        for v in self.discontinuities(component):
            if abs(s - v) <= EPS_GEOM:
                return False
        return True

    @property
    def large_domain(self) -> bool:
        """Dom(F) equals the complement of the middle leaves."""
        grid = np.linspace(-1.0, 1.0, 2001)
        for c in range(self.k):
            for s in grid:
                inside = self.in_domain(c, s)
                if abs(s) <= EPS_GEOM:
                    if inside:
                        return False
                elif not inside:
                    return False
        return True

    # -- evaluation ---------------------------------------------------------
    def leaf_value(self, component: int, s: float) -> tuple[int, float]:
        b = self.branch_at(component, s)
        if b is None:
            raise DomainError(f"leaf ({component}, {s}) outside Dom(F)")
        return b.target, float(b.leaf(s))

    def eval(self, point) -> tuple[int, float, float]:
        component, x, y = point
        b = self.branch_at(component, x)
        if b is None:
            raise DomainError(f"point {tuple(point)} outside Dom(F)")
        yy = float(b.vertical(x, y))
        return b.target, float(b.leaf(x)), yy

    def eval_array(self, component: int, s, y=None):
        """Vectorised evaluation for points of one component.

        Returns ``(target, s_out, y_out, branch_idx)``; entries outside the
        domain have ``branch_idx == -1`` and NaN images.
        """
        s = np.asarray(s, dtype=float)
        y = np.zeros_like(s) if y is None else np.asarray(y, dtype=float)
        target = np.full(s.shape, -1, dtype=int)
        s_out = np.full(s.shape, np.nan)
        y_out = np.full(s.shape, np.nan)
        idx = np.full(s.shape, -1, dtype=int)
        for i, b in enumerate(self.branches):
            if b.component != component:
                continue
            m = b.contains(s) & (idx < 0)
            if not np.any(m):
                continue
            idx[m] = i
            target[m] = b.target
            s_out[m] = b.leaf(s[m])
            y_out[m] = b.vertical(s[m], y[m])
        return target, s_out, y_out, idx

    def jacobian(self, point, analytic: bool = True, h: float = H_FD) -> np.ndarray:
        """2x2 derivative of F at a regular point (analytic if available)."""
        component, x, y = point
        b = self.branch_at(component, x)
        if b is None:
            raise DomainError(f"point {tuple(point)} outside Dom(F)")
        if analytic and b.dleaf is not None and b.dvertical is not None:
            dys, dyy = b.dvertical(x, y)
            return np.array([[float(b.dleaf(x)), 0.0], [float(dys), float(dyy)]])
        J = np.empty((2, 2))
        for j, (dx, dy) in enumerate(((h, 0.0), (0.0, h))):
            _, sp, yp = self.eval((component, x + dx, y + dy))
            _, sm, ym = self.eval((component, x - dx, y - dy))
            J[0, j] = (sp - sm) / (2 * h)
            J[1, j] = (yp - ym) / (2 * h)
        return J

    def restrict(self, components) -> "TriangularMap":
        """Sub-map on the given components, renumbered in the order given.

        Branches whose image leaves the kept components are dropped.
        """
        components = list(components)
        renum = {c: i for i, c in enumerate(components)}
        kept = []
        for b in self.branches:
            if b.component in renum and b.target in renum:
                kept.append(_renumber(b, renum[b.component], renum[b.target]))
        cx = SquareComplex(len(components), tuple(self.complex.charts[c] for c in components))
        meta = dict(self.metadata)
        meta["restricted_from"] = components
        return TriangularMap(cx, tuple(kept), self.cone, self.declared_lambda,
                             self.contraction, self.name + "|" + ",".join(map(str, components)), meta)


def _jumps(left: Branch, right: Branch, v: float, tol: float = 1e-9) -> bool:
    if left.target != right.target:
        return True
    if abs(float(left.leaf(v)) - float(right.leaf(v))) > tol:
        return True
    for y in (-1.0, 0.0, 1.0):
        if abs(float(left.vertical(v, y)) - float(right.vertical(v, y))) > tol:
            return True
    return False


def _renumber(b: Branch, comp: int, target: int) -> Branch:
    return Branch(comp, b.lo, b.hi, b.leaf, b.vertical, target, b.closed_lo, b.closed_hi,
                  b.dleaf, b.dvertical, b.inverse, b.label)


# ---------------------------------------------------------------------------
# operations

def eval_leaf(fmap: TriangularMap, leaf: Leaf) -> Leaf:
    """Image leaf ``f(L)``.

    At a discontinuity leaf lying in the domain the returned leaf is a
    :class:`FlaggedLeaf` carrying both one-sided limits.
    """
    target, s = fmap.leaf_value(leaf.component, leaf.s)
    for v in fmap.discontinuities(leaf.component):
        if abs(leaf.s - v) <= EPS_GEOM:
            left = _limit_or_none(fmap, Leaf(leaf.component, v), -1)
            right = _limit_or_none(fmap, Leaf(leaf.component, v), +1)
            return FlaggedLeaf(target, _leaf(target, s).s, left, right)
    return _leaf(target, s)


def _limit_or_none(fmap, at, side):
    try:
        return one_sided_limit(fmap, at, side)
    except NoLimitError:
        return None


def one_sided_limit(fmap: TriangularMap, at: Leaf, side: int,
                    steps=LIMIT_STEPS, tol: float = 1e-6) -> Optional[Leaf]:
    """Numerical ``lim f(s)`` as ``s -> at.s`` from the left (-1) or right (+1).

    Returns ``None`` when that side is outside the domain; raises
    :class:`NoLimitError` if the sampled values do not settle.
    """
    vals = []
    targets = set()
    for h in steps:
        s = at.s + side * h
        if not -1.0 <= s <= 1.0:
            return None
        b = fmap.branch_at(at.component, s)
        if b is None:
            if vals:
                raise NoLimitError(f"domain hole while approaching {at}")
            return None
        targets.add(b.target)
        vals.append(float(b.leaf(s)))
    if len(targets) != 1:
        raise NoLimitError(f"image component oscillates approaching {at}")
    v = np.array(vals)
    d = np.abs(np.diff(v))
    scale = max(1.0, abs(v[-1]))
    if d[-1] > 1e-3 * scale or d[-1] > d[-2] + 1e-15:
        raise NoLimitError(f"one-sided values near {at} do not converge")
    ratio = steps[0] / steps[1]
    rich = (ratio * v[1:] - v[:-1]) / (ratio - 1.0)
    limit = rich[-1] if abs(rich[-1] - rich[-2]) <= tol * scale else v[-1]
    return _leaf(targets.pop(), float(limit))


def one_sided_limits(fmap: TriangularMap, at: Leaf):
    """``(f(at-), f(at+))``; an absent side is ``None``."""
    return one_sided_limit(fmap, at, -1), one_sided_limit(fmap, at, +1)


@dataclass
class LeafItinerary:
    leaf: Leaf
    n: Optional[int]
    visited: list
    exceeded: bool = False

    def to_json(self):
        return {
            "leaf": {"component": self.leaf.component, "s": self.leaf.s},
            "n": self.n if not self.exceeded else "exceeds-cap",
            "visited": [{"component": l.component, "s": l.s} for l in self.visited],
        }


def compute_n_of_L(fmap: TriangularMap, leaf: Leaf, cap: Optional[int] = None) -> LeafItinerary:
    """The count n(L): how many consecutive images of L stay on L_- or L_+.

    Returns ``n = 0`` when f(L) is interior.  If the boundary run reaches
    ``cap`` (default ``2k + 1``) the result is flagged ``exceeded``, which is
    evidence of a periodic boundary leaf.
    """
    cap = 2 * fmap.k + 1 if cap is None else cap
    if cap < 2 * fmap.k:
        raise InvalidInputError("cap must be at least 2k")
    visited = [leaf]
    cur = leaf
    n = 0
    while True:
        if not fmap.in_domain(cur.component, cur.s):
            raise DomainError(f"iterate {cur} left Dom(F) before n(L) was resolved", visited)
        nxt = eval_leaf(fmap, cur)
        nxt = _leaf(nxt.component, nxt.s)
        visited.append(nxt)
        if not nxt.is_boundary:
            return LeafItinerary(leaf, n, visited[: n + 1])
        n += 1
        if n >= cap:
            return LeafItinerary(leaf, None, visited, exceeded=True)
        cur = nxt


@dataclass
class HyperbolicityReport:
    transversal: bool
    cone_invariance_fraction: float
    min_expansion: float
    declared_lambda: float
    verdict: str
    samples: int = 0
    derivative: str = "analytic"

    def to_json(self):
        return {
            "transversal": self.transversal,
            "cone_invariance_fraction": self.cone_invariance_fraction,
            "min_expansion": self.min_expansion,
            "declared_lambda": self.declared_lambda,
            "verdict": self.verdict,
            "samples": self.samples,
            "derivative": self.derivative,
        }


def sample_regular_points(fmap: TriangularMap, samples: int, components=None,
                          margin: float = DISCONTINUITY_MARGIN, ny: int = 9):
    """Deterministic grid of domain points away from branch ends."""
    comps = range(fmap.k) if components is None else components
    ny = max(1, min(ny, samples))
    ns = max(2, samples // (ny * max(1, len(list(comps)))))
    ys = np.linspace(-0.9, 0.9, ny)
    out = []
    for c in comps:
        cuts = np.array(fmap.breakpoints(c) + [-1.0, 1.0])
        for s in np.linspace(-1.0 + margin, 1.0 - margin, ns):
            if np.min(np.abs(cuts - s)) < margin or not fmap.in_domain(c, s):
                continue
            out.extend((c, float(s), float(y)) for y in ys)
    return out


def verify_lambda_hyperbolic(fmap: TriangularMap, samples: int = 2000, lam: float | None = None,
                             alpha: float | None = None, components=None, analytic: bool = True,
                             h_fd: float = H_FD, n_directions: int = 33) -> HyperbolicityReport:
    """Sampled check of the invariant expanding cone condition.

    For every sample x: DF(x) must send the cone of half-angle alpha strictly
    inside the cone of half-angle alpha/2, and stretch every cone vector by at
    least ``lam``.
    """
    lam = fmap.declared_lambda if lam is None else lam
    alpha = fmap.cone.alpha if alpha is None else alpha
    transversal = alpha < math.pi / 2
    pts = sample_regular_points(fmap, samples, components)
    theta = np.linspace(-alpha, alpha, n_directions)
    V = np.vstack([np.cos(theta), np.sin(theta)])
    used_analytic = analytic and all(b.dleaf is not None and b.dvertical is not None
                                     for b in fmap.branches)
    if not pts:
        return HyperbolicityReport(transversal, 0.0, float("nan"), lam, "inconclusive", 0,
                                   "analytic" if used_analytic else "finite-difference")
    good = 0
    min_exp = math.inf
    for p in pts:
        J = fmap.jacobian(p, analytic=analytic, h=h_fd)
        W = J @ V
        norms = np.linalg.norm(W, axis=0)
        min_exp = min(min_exp, float(np.min(norms)))
        ang = np.arctan2(np.abs(W[1]), np.abs(W[0]))
        if np.all(ang < alpha / 2 - EPS_GEOM):
            good += 1
    frac = good / len(pts)
    ok = transversal and frac == 1.0 and min_exp >= lam
    return HyperbolicityReport(transversal, frac, min_exp, lam, "pass" if ok else "fail", len(pts),
                               "analytic" if used_analytic else "finite-difference")


def regularity_probe(fmap: TriangularMap, samples: int = 200, cap: int | None = None) -> dict:
    """Sampled surrogates for the regularity hypotheses near special leaves.

    * leaves with n(L) = 0: f must be continuous on a small saturated
      neighbourhood (no breakpoint within the probe radius, image jump small);
    * boundary leaves and discontinuities with n(L) >= 1: each existing
      one-sided limit should agree with some iterate F^j(L), 1 <= j <= n(L)+1.
    """
    radius = 1e-5
    h1_bad = []
    for c in range(fmap.k):
        for s in np.linspace(-1.0, 1.0, samples):
            if not fmap.is_regular(c, s):
                continue
            try:
                it = compute_n_of_L(fmap, Leaf(c, float(s)), cap)
            except DomainError:
                continue
            if it.n != 0:
                continue
            lo, hi = max(-1.0, s - radius), min(1.0, s + radius)
            b = fmap.branch_at(c, s)
            if not (b.contains(lo) and b.contains(hi)):
                if any(lo < v < hi for v in fmap.breakpoints(c)):
                    h1_bad.append({"component": c, "s": float(s)})
    h2 = []
    for c in range(fmap.k):
        specials = [-1.0, 1.0] + fmap.discontinuities(c)
        for s in specials:
            if not fmap.in_domain(c, s):
                continue
            leaf = Leaf(c, s)
            try:
                it = compute_n_of_L(fmap, leaf, cap)
            except DomainError:
                continue
            if it.n is None or it.n < 1:
                continue
            iterates = it.visited[1:]
            entry = {"component": c, "s": s, "n": it.n, "sides": {}}
            for side, name in ((-1, "left"), (1, "right")):
                try:
                    lim = one_sided_limit(fmap, leaf, side)
                except NoLimitError:
                    entry["sides"][name] = "no-limit"
                    continue
                if lim is None:
                    continue
                nj = None
                for j, L in enumerate(iterates, start=1):
                    if L.component == lim.component and abs(L.s - lim.s) <= 1e-6:
                        nj = j
                        break
                entry["sides"][name] = nj
            h2.append(entry)
    return {"h1_violations": h1_bad, "h2_probes": h2}
