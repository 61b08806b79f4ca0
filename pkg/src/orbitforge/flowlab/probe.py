"""Sampled escape test for Lyapunov stability of an invariant set."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from ..errors import IntegrationStall, InvalidInputError
from .integrate import integrate
from .system import FlowSystem


@dataclass
class EscapeReport:
    samples: int
    escaped: int
    inconclusive: int
    U: float
    V: float
    horizon: float
    seed: int

    @property
    def escape_fraction(self) -> float:
        done = self.samples - self.inconclusive
        return self.escaped / done if done else float("nan")

    def to_json(self):
        return {"samples": self.samples, "escaped": self.escaped,
                "inconclusive": self.inconclusive, "escape_fraction": self.escape_fraction,
                "U": self.U, "V": self.V, "horizon": self.horizon, "seed": self.seed}


def attractor_cloud(sys: FlowSystem, p0, transient: float = 50.0, span: float = 500.0,
                    dt: float = 0.002) -> np.ndarray:
    """Points along an orbit after a transient, as a sample of its limit set."""
    start = integrate(sys, p0, transient, record=False).end
    traj = integrate(sys, start, span)
    return traj.sample(np.arange(0.0, span, dt))


def _ball(rng, n, radius):
    v = rng.normal(size=(n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    r = radius * rng.random(n) ** (1 / 3)
    return v * r[:, None]


def lyapunov_stability_probe(sys: FlowSystem, invariant_set, U: float, V: float,
                             samples: int = 200, T: float = 100.0, seed: int = 0,
                             chunk: float = 1.0) -> EscapeReport:
    """Fraction of points within ``V`` of the set whose orbit leaves the
    ``U``-neighbourhood before time ``T``.

    ``invariant_set`` is a point cloud ``(m, 3)`` or a callable
    ``(rng, n) -> (n, 3)`` drawing points of the set.
    """
    if not 0 < V <= U:
        raise InvalidInputError("need 0 < V <= U")
    rng = np.random.default_rng(seed)
    if callable(invariant_set):
        cloud = np.asarray(invariant_set(rng, max(samples, 1000)), dtype=float)
    else:
        cloud = np.atleast_2d(np.asarray(invariant_set, dtype=float))
    tree = cKDTree(cloud)
    base = cloud[rng.integers(0, len(cloud), samples)]
    pts = base + _ball(rng, samples, V)
    alive = np.ones(samples, dtype=bool)
    escaped = np.zeros(samples, dtype=bool)
    stalled = np.zeros(samples, dtype=bool)
    t = 0.0
    while t < T and alive.any():
        dt = min(chunk, T - t)
        idx = np.flatnonzero(alive)
        try:
            traj = integrate(sys, pts[idx], dt)
        except IntegrationStall:
            # fall back to one-by-one so a single bad orbit does not poison the batch
            for i in idx:
                try:
                    tr = integrate(sys, pts[i], dt)
                except IntegrationStall:
                    stalled[i] = True
                    alive[i] = False
                    continue
                if np.any(tree.query(tr.y)[0] > U):
                    escaped[i] = True
                    alive[i] = False
                pts[i] = tr.end
            t += dt
            continue
        dist = tree.query(traj.y.reshape(-1, 3))[0].reshape(len(traj.t), len(idx))
        out = np.any(dist > U, axis=0)
        escaped[idx[out]] = True
        alive[idx[out]] = False
        pts[idx] = traj.end
        t += dt
    return EscapeReport(samples, int(escaped.sum()), int(stalled.sum()), U, V, T, seed)
