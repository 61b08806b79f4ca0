"""Band alphabet, covering graph and periodic-leaf location.

Leaf intervals are pushed forward exactly through the branch table of a
:class:`~orbitforge.trimap.TriangularMap`.  Every interval endpoint carries a
``reach`` flag: ``True`` when open sub-curves may approach it so closely that
their images cover a band sharing that endpoint, ``False`` when it is only
approached from a curve whose closure must stay regular (so covering needs
strict inequality).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (BranchRefinementError, DomainError, GrowthFailure, IncompleteGraphError,
                     InvalidInputError, NoLimitError, NonHyperbolicOrbit)
from .geometry import EPS_GEOM, Band, Curve, Leaf, curve_tangent_in_cone
from .trimap import TriangularMap, one_sided_limit

log = logging.getLogger(__name__)

MIN_BAND_WIDTH = 1e-9
DEFAULT_SEED_HEIGHTS = (-0.5, 0.0, 0.5)
TAU_LEAF = 1e-10
TAU_ORBIT = 1e-8
TOL_LAMBDA = 0.05
GROWTH_FLOOR = 1.0 + 1e-6
REPLAY_TOL = 1e-8
MAX_FRONTIER = 50000


@dataclass(frozen=True)
class Piece:
    """Open leaf interval ``(lo, hi)`` in one component with reach flags."""

    component: int
    lo: float
    hi: float
    reach_lo: bool = True
    reach_hi: bool = True

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def covers(self, band: Band, tol: float = EPS_GEOM) -> bool:
        if band.component != self.component:
            return False
        lo_ok = self.lo < band.lo - tol or (self.reach_lo and self.lo <= band.lo + tol)
        hi_ok = self.hi > band.hi + tol or (self.reach_hi and self.hi >= band.hi - tol)
        return lo_ok and hi_ok

    def key(self):
        return (self.component, round(self.lo, 12), round(self.hi, 12), self.reach_lo, self.reach_hi)


# ---------------------------------------------------------------------------
# alphabet

@dataclass(frozen=True)
class BandAlphabet:
    endpoints: dict  # component -> tuple of leaf coordinates
    bands: tuple
    provenance: dict = field(default_factory=dict)  # (component, s) -> tags
    dropped: tuple = ()

    def bands_in(self, component: int) -> list:
        return [b for b in self.bands if b.component == component]

    def index(self, band: Band) -> int:
        return self.bands.index(band)

    def to_json(self):
        return {
            "endpoints": {str(c): list(v) for c, v in sorted(self.endpoints.items())},
            "bands": [b.to_json() for b in self.bands],
            "dropped": [b.to_json() for b in self.dropped],
        }


def _add_endpoint(store, prov, component, s, tag):
    s = float(np.clip(s, -1.0, 1.0))
    for v in store.setdefault(component, []):
        if abs(v - s) <= EPS_GEOM:
            prov[(component, v)].add(tag)
            return
    store[component].append(s)
    prov[(component, s)] = {tag}


def build_band_alphabet(fmap: TriangularMap, min_width: float = MIN_BAND_WIDTH) -> BandAlphabet:
    """Endpoints L_-, L_+, images of boundary leaves and one-sided limits at
    the middle leaves; bands are all open pairs of endpoints per component."""
    store: dict = {}
    prov: dict = {}
    for c in range(fmap.k):
        _add_endpoint(store, prov, c, -1.0, "L-")
        _add_endpoint(store, prov, c, 1.0, "L+")
    for c in range(fmap.k):
        for s in (-1.0, 1.0):
            if fmap.in_domain(c, s):
                t, v = fmap.leaf_value(c, s)
                _add_endpoint(store, prov, t, v, "V")
            else:
                log.info("boundary leaf (%d, %g) outside Dom(F); no V endpoint", c, s)
        for side, tag in ((-1, "L0-"), (1, "L0+")):
            try:
                lim = one_sided_limit(fmap, Leaf(c, 0.0), side)
            except NoLimitError:
                log.warning("one-sided limit at middle leaf of component %d (side %+d) "
                            "does not exist; omitted", c, side)
                continue
            if lim is not None:
                _add_endpoint(store, prov, lim.component, lim.s, tag)
    bands, dropped = [], []
    endpoints = {}
    for c in sorted(store):
        pts = sorted(store[c])
        endpoints[c] = tuple(pts)
        for i, a in enumerate(pts):
            for b in pts[i + 1:]:
                if b - a < min_width:
                    dropped.append(Band(c, a, b))
                    log.warning("band (%g, %g) in component %d narrower than %g dropped", a, b, c, min_width)
                    continue
                bands.append(Band(c, a, b))
    bands.sort()
    return BandAlphabet(endpoints, tuple(bands), {k: tuple(sorted(v)) for k, v in prov.items()},
                        tuple(dropped))


# ---------------------------------------------------------------------------
# interval push-forward

def continuity_pieces(fmap: TriangularMap, piece: Piece):
    """Split ``piece`` along the branch table: ``[(sub_piece, branch_index)]``.

    New ends created at branch boundaries are reachable (an open sub-curve can
    run right up to them without touching them).
    """
    out = []
    for i, b in enumerate(fmap.branches):
        if b.component != piece.component:
            continue
        a = max(piece.lo, b.lo)
        z = min(piece.hi, b.hi)
        if z - a <= EPS_GEOM:
            continue
        ra = piece.reach_lo if a == piece.lo else True
        rz = piece.reach_hi if z == piece.hi else True
        out.append((Piece(piece.component, a, z, ra, rz), i))
    out.sort(key=lambda t: t[0].lo)
    return out


def push_piece(fmap: TriangularMap, piece: Piece, branch_index: int) -> Piece:
    b = fmap.branches[branch_index]
    fa, fz = float(b.leaf(piece.lo)), float(b.leaf(piece.hi))
    fa, fz = float(np.clip(fa, -1.0, 1.0)), float(np.clip(fz, -1.0, 1.0))
    if fa <= fz:
        return Piece(b.target, fa, fz, piece.reach_lo, piece.reach_hi)
    return Piece(b.target, fz, fa, piece.reach_hi, piece.reach_lo)


def pull_back(fmap: TriangularMap, itinerary, lo: float, hi: float) -> tuple[float, float]:
    """Preimage of the leaf interval ``(lo, hi)`` under the branch sequence."""
    for idx in reversed(itinerary):
        b = fmap.branches[idx]
        u, v = b.invert(lo), b.invert(hi)
        lo, hi = (u, v) if u <= v else (v, u)
    return lo, hi


def along(fmap: TriangularMap, itinerary, s: float, y: float | None = None):
    """Apply the branch formulas in order (continuous extension at ends)."""
    for idx in itinerary:
        b = fmap.branches[idx]
        if y is not None:
            y = float(b.vertical(s, y))
        s = float(b.leaf(s))
    return s if y is None else (s, y)


def along_derivative(fmap: TriangularMap, itinerary, s: float) -> float:
    d = 1.0
    for idx in itinerary:
        b = fmap.branches[idx]
        d *= b.derivative(s)
        s = float(b.leaf(s))
    return d


# ---------------------------------------------------------------------------
# covering graph

@dataclass(frozen=True)
class CoveringEdge:
    source: Band
    target: Band
    n: int
    witness: tuple  # (component, lo, hi) leaf interval of c*
    y: float
    itinerary: tuple
    image: Piece
    stretch: float

    def witness_curve(self, samples: int = 64) -> Curve:
        c, lo, hi = self.witness
        return Curve.horizontal(c, lo, hi, self.y, n=samples, closed_start=False, closed_end=False)

    def to_json(self, alphabet_index=None):
        d = {
            "source": self.source.to_json(),
            "target": self.target.to_json(),
            "n": self.n,
            "witness": {"component": self.witness[0], "lo": self.witness[1],
                        "hi": self.witness[2], "y": self.y},
            "itinerary": list(self.itinerary),
            "stretch": self.stretch,
        }
        if alphabet_index is not None:
            d["source_index"] = alphabet_index(self.source)
            d["target_index"] = alphabet_index(self.target)
        return d


@dataclass
class CoveringGraph:
    alphabet: BandAlphabet
    edges: list
    dead_ends: list = field(default_factory=list)
    max_iters: int = 0
    strategy: str = "exhaustive"

    @property
    def nodes(self):
        return self.alphabet.bands

    def out_edges(self, band: Band) -> list:
        es = [e for e in self.edges if e.source == band]
        es.sort(key=lambda e: (e.target.component, e.target.lo, e.target.hi, e.n))
        return es

    def edge(self, source: Band, target: Band) -> Optional[CoveringEdge]:
        for e in self.edges:
            if e.source == source and e.target == target:
                return e
        return None

    def pairs(self) -> dict:
        return {(e.source, e.target): e.n for e in self.edges}

    def to_json(self):
        idx = self.alphabet.index
        return {
            "nodes": [dict(b.to_json(), index=i) for i, b in enumerate(self.nodes)],
            "edges": [e.to_json(idx) for e in self.edges],
            "adjacency": {str(i): sorted({idx(e.target) for e in self.edges if e.source == b})
                          for i, b in enumerate(self.nodes)},
            "dead_ends": [b.to_json() for b in self.dead_ends],
            "max_iters": self.max_iters,
            "strategy": self.strategy,
        }

    def to_dot(self) -> str:
        lines = ["digraph covering {"]
        for i, b in enumerate(self.nodes):
            lines.append(f'  b{i} [label="{b.component}:({b.lo:.6g},{b.hi:.6g})"];')
        idx = self.alphabet.index
        for e in self.edges:
            lines.append(f'  b{idx(e.source)} -> b{idx(e.target)} [label="{e.n}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def seed_pieces(fmap: TriangularMap, band: Band) -> list[Piece]:
    """Continuity pieces of a band usable as seed curves.

    A seed's closure must consist of regular leaves, so an end sitting on a
    breakpoint or outside the domain is marked unreachable.
    """
    whole = Piece(band.component, band.lo, band.hi, True, True)
    out = []
    for p, _ in continuity_pieces(fmap, whole):
        out.append(Piece(p.component, p.lo, p.hi,
                         fmap.is_regular(p.component, p.lo),
                         fmap.is_regular(p.component, p.hi)))
    return out


@dataclass
class _Node:
    piece: Piece
    itinerary: tuple
    stretch: float


def _explore(fmap, alphabet, seed: Piece, max_iters: int, floor: float):
    """All bands covered by cylinders of ``seed`` within ``max_iters`` steps.

    Returns ``{band: (n, node)}`` with the smallest n per band; ties resolved
    by left-to-right cylinder order.
    """
    found = {}
    frontier = [_Node(seed, (), 1.0)]
    for n in range(1, max_iters + 1):
        children = {}
        for node in frontier:
            for sub, bi in continuity_pieces(fmap, node.piece):
                img = push_piece(fmap, sub, bi)
                if img.length <= 0:
                    continue
                stretch = node.stretch * img.length / sub.length
                child = _Node(img, node.itinerary + (bi,), stretch)
                k = img.key()
                if k in children and children[k].stretch >= stretch:
                    continue
                children[k] = child
        for child in children.values():
            if child.stretch <= floor:
                continue
            for band in alphabet.bands_in(child.piece.component):
                if band not in found and child.piece.covers(band):
                    found[band] = (n, child)
        frontier = list(children.values())
        if len(frontier) > MAX_FRONTIER:
            log.warning("frontier truncated to %d pieces at depth %d", MAX_FRONTIER, n)
            frontier = frontier[:MAX_FRONTIER]
        if not frontier:
            break
    return found


def _greedy(fmap, alphabet, start: Piece, max_iters: int, floor: float):
    """Longest-piece greedy walk; returns ``(n, node, covered_bands)``."""
    node = _Node(start, (), 1.0)
    cur = start
    for n in range(1, max_iters + 1):
        split = continuity_pieces(fmap, cur)
        if not split:
            raise GrowthFailure(f"image left the domain after {n - 1} iterates")
        # longest piece, leftmost on ties
        longest = max(p.length for p, _ in split)
        piece, bi = next((p, i) for p, i in split if p.length >= longest - 1e-9)
        img = push_piece(fmap, piece, bi)
        stretch = node.stretch * (img.length / piece.length)
        node = _Node(img, node.itinerary + (bi,), stretch)
        if stretch > floor:
            covered = [b for b in alphabet.bands_in(img.component) if img.covers(b)]
            if covered:
                return n, node, covered
        cur = img
    raise GrowthFailure(f"no alphabet band covered within {max_iters} iterates "
                        "(expansion too weak or alphabet too coarse)")


def _edge(fmap, source, target, seed, y, n, node):
    lo, hi = pull_back(fmap, node.itinerary, node.piece.lo, node.piece.hi)
    lo, hi = max(lo, seed.lo), min(hi, seed.hi)
    return CoveringEdge(source, target, n, (seed.component, lo, hi), y, node.itinerary,
                        node.piece, node.stretch)


def iterate_until_covers(fmap: TriangularMap, curve: Curve, alphabet: BandAlphabet,
                         max_iters: int = 50, floor: float = GROWTH_FLOOR):
    """Push a cone-tangent curve forward until its image covers an alphabet band.

    Splits the image at breakpoints and keeps the longest piece.  Returns
    ``(subcurve, n, band)`` where ``F^n(subcurve)`` covers ``band``.
    """
    if not curve_tangent_in_cone(curve, fmap.cone):
        raise InvalidInputError("curve is not tangent to the cone field")
    xs = curve.points[:, 0]
    lo, hi = float(xs.min()), float(xs.max())
    for s in xs:
        if not fmap.in_domain(curve.component, s):
            raise InvalidInputError("curve leaves Dom(F)")
    if any(lo < v < hi for v in fmap.discontinuities(curve.component)):
        raise InvalidInputError("curve meets the discontinuity set")
    n, node, covered = _greedy(fmap, alphabet, Piece(curve.component, lo, hi), max_iters, floor)
    wlo, whi = pull_back(fmap, node.itinerary, node.piece.lo, node.piece.hi)
    wlo, whi = max(wlo, lo), min(whi, hi)
    order = np.argsort(xs)
    m = max(2, len(xs))
    sx = np.linspace(wlo, whi, m)
    sy = np.interp(sx, xs[order], curve.points[order, 1])
    sub = Curve.from_points(curve.component, np.column_stack([sx, sy]),
                            closed_start=False, closed_end=False)
    return sub, n, covered[0]


def build_covering_graph(fmap: TriangularMap, alphabet: BandAlphabet | None = None,
                         seeds_per_band: int = 3, max_iters: int = 12,
                         strategy: str = "exhaustive", require_complete: bool = True,
                         floor: float = GROWTH_FLOOR) -> CoveringGraph:
    """Covering relation between alphabet bands.

    ``strategy='exhaustive'`` follows every continuity cylinder of every seed
    up to ``max_iters`` and records, per target band, the smallest iterate
    count; ``'greedy'`` runs the longest-piece walk of
    :func:`iterate_until_covers` once per seed.  Seed heights only move the
    witness curve vertically; the leaf dynamics do not depend on them.
    """
    if alphabet is None:
        alphabet = build_band_alphabet(fmap)
    if strategy not in ("exhaustive", "greedy"):
        raise InvalidInputError(f"unknown strategy {strategy!r}")
    heights = _seed_heights(seeds_per_band)
    edges = {}
    dead = []
    for band in alphabet.bands:
        results = {}
        for seed in seed_pieces(fmap, band):
            if strategy == "exhaustive":
                found = _explore(fmap, alphabet, seed, max_iters, floor)
                items = [(t, n, node) for t, (n, node) in found.items()]
            else:
                try:
                    n, node, covered = _greedy(fmap, alphabet, seed, max_iters, floor)
                except (GrowthFailure, InvalidInputError):
                    continue
                items = [(t, n, node) for t in covered]
            for t, n, node in items:
                if t not in results or n < results[t][0]:
                    results[t] = (n, node, seed)
        if not results:
            dead.append(band)
        for t, (n, node, seed) in results.items():
            edges[(band, t)] = _edge(fmap, band, t, seed, heights[0], n, node)
    ordered = sorted(edges.values(), key=lambda e: (e.source, e.target))
    graph = CoveringGraph(alphabet, ordered, dead, max_iters, strategy)
    if dead and require_complete:
        raise IncompleteGraphError(
            f"{len(dead)} band(s) without outgoing covering edge", graph, dead)
    return graph


def _seed_heights(count: int) -> tuple:
    if count == len(DEFAULT_SEED_HEIGHTS):
        return DEFAULT_SEED_HEIGHTS
    if count <= 1:
        return (0.0,)
    return tuple(np.linspace(-0.5, 0.5, count))


def chain_walk(graph: CoveringGraph, start: Band | None = None) -> tuple[list, int]:
    """Deterministic walk ``B_1 <= B_2 <= ...`` until a band repeats.

    At each band the first outgoing edge in lexicographic order of target
    endpoints is taken.  Returns ``(edges walked, index where the cycle
    starts)``; by pigeonhole at most ``|bands|`` edges are walked.
    """
    if start is None:
        live = [b for b in graph.nodes if graph.out_edges(b)]
        if not live:
            raise IncompleteGraphError("graph has no edges", graph, graph.dead_ends)
        start = live[0]
    seen = {start: 0}
    path = []
    cur = start
    for _ in range(len(graph.nodes) + 1):
        out = graph.out_edges(cur)
        if not out:
            raise IncompleteGraphError(f"dead end at band {cur}", graph, [cur])
        e = out[0]
        path.append(e)
        cur = e.target
        if cur in seen:
            return path, seen[cur]
        seen[cur] = len(path)
    raise AssertionError("chain walk exceeded the pigeonhole bound")


def find_closed_subchain(graph: CoveringGraph, start: Band | None = None) -> list:
    """Edges of the first closed sub-chain met by :func:`chain_walk`."""
    path, i = chain_walk(graph, start)
    return path[i:]


# ---------------------------------------------------------------------------
# replay

@dataclass
class ReplayResult:
    ok: bool
    message: str = ""
    image: tuple = ()


def replay_edge(fmap: TriangularMap, edge: CoveringEdge, samples: int = 257,
                tol: float = REPLAY_TOL) -> ReplayResult:
    """Re-run an edge's witness with pointwise evaluations of F."""
    c, lo, hi = edge.witness
    if not hi > lo:
        return ReplayResult(False, "empty witness")
    u = np.linspace(1e-10, 1.0 - 1e-10, samples)
    s = lo + (hi - lo) * u
    y = np.full_like(s, edge.y)
    comp = c
    for step, bi in enumerate(edge.itinerary):
        tgt, s2, y2, idx = fmap.eval_array(comp, s, y)
        if np.any(idx < 0):
            return ReplayResult(False, f"witness left Dom(F) at iterate {step}")
        if np.any(idx != bi):
            return ReplayResult(False, f"witness crossed a breakpoint at iterate {step}")
        if step < len(edge.itinerary) - 1:
            for v in fmap.discontinuities(comp):
                if s.min() < v < s.max():
                    return ReplayResult(False, f"iterate {step} meets D(F)")
        comp, s, y = int(tgt[0]), s2, y2
        if np.any(np.abs(y) > 1.0 + 1e-9):
            return ReplayResult(False, "vertical coordinate left the square")
    img = (comp, float(s.min()), float(s.max()))
    t = edge.target
    ok = comp == t.component and img[1] <= t.lo + tol and img[2] >= t.hi - tol
    return ReplayResult(ok, "" if ok else "final image does not cover target", img)


def replay_cycle(fmap: TriangularMap, cycle) -> ReplayResult:
    for e in cycle:
        r = replay_edge(fmap, e)
        if not r.ok:
            return r
    for a, b in zip(cycle, cycle[1:] + cycle[:1]):
        if a.target != b.source:
            return ReplayResult(False, "cycle edges do not chain")
    return ReplayResult(True)


# ---------------------------------------------------------------------------
# periodic orbit

@dataclass
class PeriodicOrbit:
    period: int
    points: list  # [(component, s, y)]
    lambda_h: float
    lambda_v: float
    residual: float
    minimal_period: int
    itinerary: tuple = ()
    cycle: list = field(default_factory=list)
    meets_declared_rate: bool = True

    @property
    def leaves(self) -> list:
        return [p[1] for p in self.points]

    def to_json(self):
        return {
            "period": self.period,
            "minimal_period": self.minimal_period,
            "points": [{"component": c, "s": s, "y": y} for c, s, y in self.points],
            "lambda_h": self.lambda_h,
            "lambda_v": self.lambda_v,
            "residual": self.residual,
            "meets_declared_rate": self.meets_declared_rate,
            "itinerary": list(self.itinerary),
            "cycle": [{"source": e.source.to_json(), "target": e.target.to_json(), "n": e.n}
                      for e in self.cycle],
        }


def _iterate_points(fmap, p, n):
    for _ in range(n):
        p = fmap.eval(p)
    return p


def _dist(p, q):
    if p[0] != q[0]:
        return math.inf
    return math.hypot(p[1] - q[1], p[2] - q[2])


def locate_periodic_orbit(fmap: TriangularMap, cycle, tau_leaf: float = TAU_LEAF,
                          tau_orbit: float = TAU_ORBIT, tol_lambda: float = TOL_LAMBDA,
                          max_rounds: int = 500) -> PeriodicOrbit:
    """Periodic point determined by a closed sub-chain of covering edges.

    The nested interval ``K`` of the first witness whose image under the
    concatenated itinerary is the first witness is found by pulling back
    through the cycle; the fixed leaf is bisected on ``g(s) - s`` there and the
    point on it is obtained by iterating the vertical contraction.
    """
    if not cycle:
        raise InvalidInputError("empty cycle")
    c0, wlo, whi = cycle[0].witness
    lo, hi = wlo, whi
    for e in reversed(cycle):
        lo, hi = pull_back(fmap, e.itinerary, lo, hi)
        lo, hi = max(lo, e.witness[1]), min(hi, e.witness[2])
        if hi < lo:
            raise BranchRefinementError("cycle witnesses do not nest; refine the sub-curves")
    itinerary = tuple(i for e in cycle for i in e.itinerary)
    n = len(itinerary)

    def h(s):
        return along(fmap, itinerary, s) - s

    ha, hb = h(lo), h(hi)
    if ha == 0.0:
        s_star = lo
    elif hb == 0.0:
        s_star = hi
    elif (ha > 0) == (hb > 0):
        raise BranchRefinementError("no sign change of f^n(s) - s on the witness branch")
    else:
        a, b = lo, hi
        while b - a > 0.0:
            m = 0.5 * (a + b)
            if m <= a or m >= b:
                break
            hm = h(m)
            if hm == 0.0:
                a = b = m
                break
            if (hm > 0) == (ha > 0):
                a, ha = m, hm
            else:
                b = m
        s_star = 0.5 * (a + b)
        if b - a > tau_leaf:
            raise BranchRefinementError("fixed-leaf bisection did not reach tolerance")

    y = 0.0
    for _ in range(max_rounds):
        _, y_new = along(fmap, itinerary, s_star, y)
        done = abs(y_new - y) <= 1e-3 * tau_orbit
        y = y_new
        if done:
            break
    # one more sweep to record the orbit points
    pts = []
    s, yy, comp = s_star, y, c0
    for idx in itinerary:
        pts.append((comp, s, yy))
        b = fmap.branches[idx]
        s, yy, comp = float(b.leaf(s)), float(b.vertical(s, yy)), b.target

    p0 = pts[0]
    try:
        pn = _iterate_points(fmap, p0, n)
    except DomainError as exc:
        raise BranchRefinementError(f"periodic candidate meets the discontinuity set: {exc}")
    residual = _dist(p0, pn)
    lam_h = abs(along_derivative(fmap, itinerary, s_star))
    eps = 1e-6
    q = (p0[0], p0[1], p0[2] + eps if p0[2] + eps <= 1.0 else p0[2] - eps)
    qn = _iterate_points(fmap, q, n)
    lam_v = (qn[2] - pn[2]) / (q[2] - p0[2])

    minimal = n
    for d in range(1, n):
        if n % d == 0 and _dist(p0, _iterate_points(fmap, p0, d)) <= tau_orbit:
            minimal = d
            break
    meets = abs(lam_h) >= fmap.declared_lambda ** n * (1 - tol_lambda)
    if fmap.contraction is not None:
        meets = meets and abs(lam_v) <= fmap.contraction ** n * (1 + tol_lambda)
    orbit = PeriodicOrbit(n, pts, float(lam_h), float(lam_v), float(residual), minimal,
                          itinerary, list(cycle), bool(meets))
    if residual > tau_orbit:
        raise NonHyperbolicOrbit(f"closure residual {residual:.3g} exceeds {tau_orbit}", orbit)
    if not (abs(lam_h) > 1.0 and abs(lam_v) < 1.0):
        raise NonHyperbolicOrbit(
            f"orbit is not hyperbolic (lambda_h={lam_h:.6g}, lambda_v={lam_v:.6g})", orbit)
    return orbit


def find_orbit(fmap: TriangularMap, seeds_per_band: int = 3, max_iters: int = 12,
               start: Band | None = None, strategy: str = "exhaustive"):
    """Alphabet -> covering graph -> chain walk -> periodic orbit."""
    alphabet = build_band_alphabet(fmap)
    graph = build_covering_graph(fmap, alphabet, seeds_per_band, max_iters, strategy,
                                 require_complete=False)
    cycle = find_closed_subchain(graph, start)
    orbit = locate_periodic_orbit(fmap, cycle)
    return alphabet, graph, cycle, orbit
