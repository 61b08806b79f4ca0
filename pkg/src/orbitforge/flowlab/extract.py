"""Return-map sampling on a chart grid and fitting of a triangular map."""
from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import RegularGridInterpolator, interp1d

from ..errors import NotTriangularError
from ..geometry import Chart, ConeField, SquareComplex
from ..trimap import Branch, TriangularMap
from .sections import ReturnSample, return_map_sample

log = logging.getLogger(__name__)

TAU_FOL = 1e-3
JUMP_THRESHOLD = 0.5


def worker_count(default: int | None = None) -> int:
    cap = os.environ.get("ORBITFORGE_THREADS")
    n = default or (os.cpu_count() or 1)
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            log.warning("ignoring non-integer ORBITFORGE_THREADS=%r", cap)
    return n


@dataclass
class ReturnGrid:
    s: np.ndarray  # (ns,)
    y: np.ndarray  # (ny,)
    samples: list  # per component: (ns, ny) nested lists of ReturnSample

    def rows(self):
        """Flat ``(component, s_in, y_in, s_out, y_out, T, status, target)`` records."""
        out = []
        for c, grid in enumerate(self.samples):
            for i, s in enumerate(self.s):
                for j, y in enumerate(self.y):
                    r = grid[i][j]
                    out.append((c, float(s), float(y), r.s, r.y, r.time, r.status, r.section))
        return out

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("component,s_in,y_in,s_out,y_out,T,status,target\n")
            for row in self.rows():
                fh.write(",".join(str(v) for v in row) + "\n")


def sample_return_grid(sampler, k: int, grid=(16, 5), threads: int | None = None) -> ReturnGrid:
    """Evaluate ``sampler(component, s, y) -> ReturnSample`` on a chart grid.

    The ``s`` nodes avoid ``s = 0`` (the singular curve) by using an even
    number of points.
    """
    ns, ny = grid
    if ns % 2:
        ns += 1
    s_nodes = np.linspace(-1.0, 1.0, ns + 2)[1:-1]
    y_nodes = np.linspace(-1.0, 1.0, ny + 2)[1:-1]
    jobs = [(c, i, j) for c in range(k) for i in range(len(s_nodes)) for j in range(len(y_nodes))]
    with ThreadPoolExecutor(max_workers=worker_count(threads)) as ex:
        res = list(ex.map(lambda job: sampler(job[0], s_nodes[job[1]], y_nodes[job[2]]), jobs))
    out = [[[None] * len(y_nodes) for _ in s_nodes] for _ in range(k)]
    for (c, i, j), r in zip(jobs, res):
        out[c][i][j] = r
    return ReturnGrid(s_nodes, y_nodes, out)


def fit_triangular_map(rg: ReturnGrid, tau_fol: float = TAU_FOL, jump: float = JUMP_THRESHOLD,
                       alpha: float = 0.35, declared_lambda: float = 1.0,
                       name: str = "extracted") -> TriangularMap:
    """Triangular map interpolating a return grid.

    Each grid column (fixed ``s``) must either fully return to one target
    with leaf coordinates agreeing within ``tau_fol``, or fully miss.
    """
    k = len(rg.samples)
    branches = []
    worst = 0.0
    for c in range(k):
        cols = []
        for i, s in enumerate(rg.s):
            col: list[ReturnSample] = rg.samples[c][i]
            ok = [r.returned for r in col]
            if not any(ok):
                cols.append(None)
                continue
            if not all(ok):
                raise NotTriangularError(
                    f"component {c}, leaf s={s:.4g}: part of the leaf leaves the domain",
                    deviation=float("inf"), grid=rg)
            targets = {r.section for r in col}
            if len(targets) != 1:
                raise NotTriangularError(
                    f"component {c}, leaf s={s:.4g}: leaf split across sections",
                    deviation=float("inf"), grid=rg)
            so = np.array([r.s for r in col])
            spread = float(so.max() - so.min())
            worst = max(worst, spread)
            if spread > tau_fol:
                raise NotTriangularError(
                    f"component {c}, leaf s={s:.4g}: image leaf varies by {spread:.3g} > {tau_fol}",
                    deviation=spread, grid=rg)
            cols.append((targets.pop(), float(so.mean()), np.array([r.y for r in col])))
        branches += _branches_for(c, rg, cols, jump)
    cx = SquareComplex(k, tuple(Chart(f"section-{c}", section=c) for c in range(k)))
    meta = {"tau_fol_deviation": worst, "grid": [len(rg.s), len(rg.y)]}
    return TriangularMap(cx, branches, ConeField(alpha), declared_lambda, None, name, meta)


def _runs(c, cols, jump):
    runs, cur = [], []
    for i, col in enumerate(cols):
        if col is None:
            if cur:
                runs.append(cur)
            cur = []
            continue
        if cur:
            j = cur[-1]
            prev = cols[j]
            d = col[1] - prev[1]
            dprev = prev[1] - cols[cur[-2]][1] if len(cur) > 1 else d
            if col[0] != prev[0] or abs(d) > jump or d * dprev < 0:
                runs.append(cur)
                cur = []
        cur.append(i)
    if cur:
        runs.append(cur)
    return runs


def _branches_for(c, rg, cols, jump):
    s = rg.s
    runs = [r for r in _runs(c, cols, jump) if len(r) >= 2]
    out = []
    for n, run in enumerate(runs):
        i0, i1 = run[0], run[-1]
        lo = -1.0 if i0 == 0 else 0.5 * (s[i0 - 1] + s[i0])
        hi = 1.0 if i1 == len(s) - 1 else 0.5 * (s[i1] + s[i1 + 1])
        xs = s[run]
        fs = np.array([cols[i][1] for i in run])
        Y = np.array([cols[i][2] for i in run])
        leaf = interp1d(xs, fs, kind="linear", fill_value="extrapolate", assume_sorted=True)
        vert = RegularGridInterpolator((xs, rg.y), Y, bounds_error=False, fill_value=None)

        def leaf_fn(v, f=leaf):
            r = np.clip(f(v), -1.0, 1.0)
            return float(r) if np.ndim(v) == 0 else r

        def vert_fn(v, y, g=vert):
            v, y = np.broadcast_arrays(np.asarray(v, float), np.asarray(y, float))
            r = np.clip(g(np.column_stack([v.ravel(), y.ravel()])), -1.0, 1.0).reshape(v.shape)
            return float(r) if r.ndim == 0 else r

        closed_lo = i0 == 0
        closed_hi = i1 == len(s) - 1
        out.append(Branch(c, float(lo), float(hi), leaf_fn, vert_fn, cols[i0][0],
                          closed_lo, closed_hi, label=f"fit-{c}-{n}"))
    return out


def extract_triangular_map(sys, sections, grid=(16, 5), t_max: float = 50.0,
                           tau_fol: float = TAU_FOL, threads: int | None = None, **kw):
    """Sample first returns on every section and fit a triangular map.

    Returns ``(map, grid)``.
    """
    for i, a in enumerate(sections):
        for b in sections[i + 1:]:
            if np.allclose(a.center, b.center) and np.allclose(a.normal, b.normal):
                raise ValueError("sections must be pairwise disjoint")

    def sampler(c, s, y):
        return return_map_sample(sys, sections, sections[c].to_world(s, y), t_max, source=c)

    rg = sample_return_grid(sampler, len(sections), grid, threads)
    return fit_triangular_map(rg, tau_fol, **kw), rg
