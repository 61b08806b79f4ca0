"""Dormand-Prince 5(4) integrator with cubic Hermite dense output.

States may carry a leading batch axis, shape ``(..., 3)`` or any shape the
right-hand side accepts; the step size is shared and controlled by the worst
component of the batch.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..errors import IntegrationStall
from .system import FlowSystem, IntegratorConfig

# Butcher tableau
C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
E = B5 - B4

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0
MAX_STEPS = 2_000_000


def dopri_step(f: Callable, t: float, y: np.ndarray, h: float, k1: np.ndarray | None = None):
    """One step; returns ``(y_new, err, k_first, k_last)`` (FSAL)."""
    k = [f(y) if k1 is None else k1]
    for i in range(1, 7):
        acc = y.copy()
        for j, a in enumerate(A[i]):
            if a:
                acc = acc + h * a * k[j]
        k.append(f(acc))
    y_new = y + h * sum(b * kk for b, kk in zip(B5[:6], k[:6]))
    err = h * sum(e * kk for e, kk in zip(E, k) if e)
    return y_new, err, k[0], k[6]


def hermite(t0, y0, f0, t1, y1, f1, t):
    """Cubic Hermite interpolant between two accepted steps."""
    h = t1 - t0
    u = (t - t0) / h
    h00 = (1 + 2 * u) * (1 - u) ** 2
    h10 = u * (1 - u) ** 2
    h01 = u * u * (3 - 2 * u)
    h11 = u * u * (u - 1)
    return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1


@dataclass
class Trajectory:
    t: np.ndarray
    y: np.ndarray  # (N, ...) states at accepted steps
    f: np.ndarray  # derivatives at those states

    @property
    def end(self) -> np.ndarray:
        return self.y[-1]

    def __call__(self, t):
        """Dense output at scalar time ``t``."""
        ts = self.t
        forward = ts[-1] >= ts[0]
        key = ts if forward else -ts
        q = t if forward else -t
        i = int(np.clip(np.searchsorted(key, q) - 1, 0, len(ts) - 2))
        if len(ts) == 1:
            return self.y[0]
        return hermite(ts[i], self.y[i], self.f[i], ts[i + 1], self.y[i + 1], self.f[i + 1], t)

    def sample(self, times) -> np.ndarray:
        """Dense output at many times (vectorised)."""
        times = np.asarray(times, dtype=float)
        ts = self.t
        if len(ts) == 1:
            return np.repeat(self.y[:1], len(times), axis=0)
        sgn = 1.0 if ts[-1] >= ts[0] else -1.0
        i = np.clip(np.searchsorted(sgn * ts, sgn * times) - 1, 0, len(ts) - 2)
        shape = (-1,) + (1,) * (self.y.ndim - 1)
        t0, t1 = ts[i].reshape(shape), ts[i + 1].reshape(shape)
        return hermite(t0, self.y[i], self.f[i], t1, self.y[i + 1], self.f[i + 1],
                       times.reshape(shape))

    def to_csv(self, path) -> None:
        data = np.column_stack([self.t, self.y.reshape(len(self.t), -1)])
        np.savetxt(path, data, delimiter=",", header="t,x,y,z", comments="", fmt="%.17g")


def _norm(err, y0, y1, cfg: IntegratorConfig):
    scale = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(y0), np.abs(y1))
    return float(np.max(np.abs(err) / scale))


def initial_step(f, y0, f0, direction, cfg: IntegratorConfig) -> float:
    if cfg.first_step is not None:
        return cfg.first_step
    scale = cfg.abs_tol + cfg.rel_tol * np.abs(y0)
    d0 = float(np.max(np.abs(y0) / scale))
    d1 = float(np.max(np.abs(f0) / scale))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y0 + direction * h0 * f0
    d2 = float(np.max(np.abs(f(y1) - f0) / scale)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1, cfg.max_step)


def integrate(sys: FlowSystem, p0, t: float, config: IntegratorConfig | None = None,
              fixed_step: float | None = None, rhs: Callable | None = None,
              record: bool = True, on_step: Optional[Callable] = None) -> Trajectory:
    """Integrate ``p0`` over ``[0, t]`` (``t`` may be negative).

    ``fixed_step`` switches off error control.  ``rhs`` replaces the field
    (used for variational equations).  ``on_step(t, y)`` may return ``True``
    to stop early.
    """
    cfg = sys.config if config is None else config
    f = sys.field if rhs is None else rhs
    y = np.array(p0, dtype=float)
    if not np.all(np.isfinite(y)) or not np.isfinite(t):
        raise ValueError("initial state and duration must be finite")
    direction = 1.0 if t >= 0 else -1.0
    T = abs(t)
    f0 = f(y)
    ts, ys, fs = [0.0], [y.copy()], [f0]
    if T == 0:
        return Trajectory(np.array(ts), np.array(ys), np.array(fs))
    s = 0.0
    if fixed_step is not None:
        h = abs(fixed_step)
    else:
        h = initial_step(f, y, f0, direction, cfg)
    k1 = f0
    for _ in range(MAX_STEPS):
        if s >= T:
            break
        h = min(h, T - s, cfg.max_step)
        y_new, err, _, k_last = dopri_step(f, s, y, direction * h, k1)
        if fixed_step is None:
            en = _norm(err, y, y_new, cfg)
            if not np.isfinite(en) or en > 1.0:
                fac = MIN_FACTOR if not np.isfinite(en) else max(MIN_FACTOR, SAFETY * en ** -0.2)
                h *= fac
                if h < cfg.min_step * max(1.0, s):
                    traj = Trajectory(direction * np.array(ts), np.array(ys), np.array(fs))
                    raise IntegrationStall(f"step size underflow at t={direction * s:.6g}", traj)
                continue
            fac = MAX_FACTOR if en == 0 else min(MAX_FACTOR, SAFETY * en ** -0.2)
        s_new = s + h
        if T - s_new < 1e-14 * max(1.0, T):
            s_new = T
        y, s, k1 = y_new, s_new, k_last
        if record:
            ts.append(s)
            ys.append(y.copy())
            fs.append(k_last)
        if on_step is not None and on_step(direction * s, y):
            break
        if fixed_step is None:
            h *= fac
    else:
        raise IntegrationStall("maximum number of steps exceeded",
                               Trajectory(direction * np.array(ts), np.array(ys), np.array(fs)))
    if not record:
        ts, ys, fs = [s], [y], [k1]
    return Trajectory(direction * np.array(ts), np.array(ys), np.array(fs))


def flow_to(sys: FlowSystem, p0, t: float, **kw) -> np.ndarray:
    return integrate(sys, p0, t, record=False, **kw).end


def flow_jacobian(sys: FlowSystem, p0, t: float, config: IntegratorConfig | None = None):
    """``(X_t(p0), DX_t(p0))`` by integrating the variational equation."""
    state = np.concatenate([np.asarray(p0, dtype=float), np.eye(3).ravel()])

    def rhs(z):
        x = z[:3]
        M = z[3:].reshape(3, 3)
        return np.concatenate([sys.field(x), (sys.jac(x) @ M).ravel()])

    end = integrate(sys, state, t, config=config, rhs=rhs, record=False).end
    return end[:3], end[3:].reshape(3, 3)
