"""Independent oracles used by the tests.

They only touch the public pointwise evaluation of a map (or, for the
symbolic oracle, nothing but the slope), never the covering machinery.
"""
from __future__ import annotations

from itertools import product

import numpy as np


def symbolic_lorenz_orbits(mu: float, max_period: int = 6) -> dict:
    """Periodic orbits of ``f(s) = sign(s) (mu |s| - 1)`` by branch word.

    For a word ``w`` of branch signs the composite is ``s -> mu^p s + c`` so the
    candidate is ``s* = c / (1 - mu^p)``; it is kept when its orbit really
    follows ``w``.
    """
    out = {}
    for p in range(1, max_period + 1):
        for word in product((-1, 1), repeat=p):
            c = 0.0
            for e in word:
                c = mu * c - e  # s<0: mu s + 1, s>0: mu s - 1
            s = c / (1.0 - mu ** p)
            orbit = []
            x = s
            ok = True
            for e in word:
                if not (-1.0 <= x < 0.0 if e < 0 else 0.0 < x <= 1.0):
                    ok = False
                    break
                orbit.append(x)
                x = mu * x - e
            if ok and abs(x - s) < 1e-12:
                out[word] = orbit
    return out


def brute_force_covers(fmap, bands, max_iters: int, n_grid: int = 10_000,
                       resolution: float = 1e-3):
    """Cover relation read off pointwise iterates of a leaf grid.

    Each band is sampled at ``n_grid`` interior leaves.  After ``n`` steps the
    grid splits into runs of consecutive leaves sharing a branch itinerary;
    the sampled image of a run spans its first and last iterate.  A run end
    is *hard* when it sits on a first-step branch change or on an irregular
    band end: a seed curve may not reach it, so the image must overshoot the
    target there.  Other ends are reachable up to the sampling slack
    ``|slope| * spacing``.

    Returns ``(strict, loose)``:

    * ``strict[(B, B')]``: smallest ``n`` with a run covering ``B'`` where hard
      ends overshoot by more than the slack and the slack is below
      ``resolution`` (a certain edge);
    * ``loose[(B, B')]``: every ``n`` with a run covering ``B'`` where hard
      ends get within the slack (a possible edge).
    """
    strict: dict = {}
    loose: dict = {}
    nb = len(fmap.branches) + 1
    for B in bands:
        h = (B.hi - B.lo) / n_grid
        s = B.lo + h * (np.arange(n_grid) + 0.5)
        comp = np.full(n_grid, B.component)
        key = np.zeros(n_grid, dtype=np.int64)
        alive = np.ones(n_grid, dtype=bool)
        hard_lo = hard_hi = None
        for n in range(1, max_iters + 1):
            new_s = np.full(n_grid, np.nan)
            new_c = np.full(n_grid, -1)
            idx_all = np.full(n_grid, -1)
            for c in np.unique(comp[alive]):
                m = alive & (comp == c)
                tgt, s2, _, idx = fmap.eval_array(int(c), s[m])
                new_s[m], new_c[m], idx_all[m] = s2, tgt, idx
            alive &= idx_all >= 0
            key = np.where(alive, key * nb + idx_all + 1, -1)
            s, comp = new_s, new_c
            if n == 1:
                split = np.diff(key) != 0
                hard_lo = np.concatenate([[not fmap.is_regular(B.component, B.lo)], split])
                hard_hi = np.concatenate([split, [not fmap.is_regular(B.component, B.hi)]])
            change = np.flatnonzero(np.diff(key) != 0) + 1
            starts = np.concatenate([[0], change])
            ends = np.concatenate([change, [n_grid]])
            for a, b in zip(starts, ends):
                if key[a] < 0 or b - a < 2:
                    continue
                first, last = float(s[a]), float(s[b - 1])
                slope = abs(last - first) / ((b - a - 1) * h)
                if slope <= 1.0 + 1e-6:
                    continue
                slack = slope * h * 1.001 + 1e-12
                if first <= last:
                    lo, hi, hlo, hhi = first, last, hard_lo[a], hard_hi[b - 1]
                else:
                    lo, hi, hlo, hhi = last, first, hard_hi[b - 1], hard_lo[a]
                c = int(comp[a])
                for T in bands:
                    if T.component != c:
                        continue
                    lo_sure = lo < T.lo - slack if hlo else lo <= T.lo + slack
                    hi_sure = hi > T.hi + slack if hhi else hi >= T.hi - slack
                    if lo_sure and hi_sure and slack < resolution:
                        strict.setdefault((B, T), n)
                    if lo <= T.lo + slack and hi >= T.hi - slack:
                        loose.setdefault((B, T), set()).add(n)
    return strict, loose
