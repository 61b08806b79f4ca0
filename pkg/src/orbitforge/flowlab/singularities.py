"""Equilibria by damped Newton iteration and their eigenvalue classification."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .system import FlowSystem

log = logging.getLogger(__name__)

DEDUP_DIST = 1e-6
HYPERBOLIC_TOL = 1e-9
REAL_TOL = 1e-10


@dataclass
class SingularityInfo:
    location: np.ndarray
    eigenvalues: np.ndarray  # complex, sorted by real part
    classification: str
    eigenvectors: dict = field(default_factory=dict)  # index -> real unit vector
    left_eigenvectors: dict = field(default_factory=dict)

    @property
    def hyperbolic(self) -> bool:
        return self.classification != "nonhyperbolic"

    def ordered(self):
        """``(l2, l3, l1)`` for a Lorenz-like point: strong stable, weak stable, unstable."""
        ev = np.real(self.eigenvalues)
        return tuple(float(v) for v in np.sort(ev))

    def to_json(self):
        return {
            "location": [float(v) for v in self.location],
            "eigenvalues": [{"re": float(v.real), "im": float(v.imag)} for v in self.eigenvalues],
            "classification": self.classification,
            "eigenvectors": {str(i): [float(x) for x in v] for i, v in self.eigenvectors.items()},
        }


def classify(eigenvalues, tol: float = HYPERBOLIC_TOL) -> str:
    ev = np.asarray(eigenvalues, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(ev))))
    re = ev.real
    if np.any(np.abs(re) < tol * scale):
        return "nonhyperbolic"
    if np.sum(re > 0) == 2:
        return "two_positive"
    if np.all(np.abs(ev.imag) <= REAL_TOL * scale):
        l2, l3, l1 = np.sort(re)
        if l2 < l3 < 0 < -l3 < l1:
            return "lorenz_like"
    return "other_hyperbolic"


def newton(sys: FlowSystem, seed, max_iter: int = 100, tol: float = 1e-12):
    """Damped Newton on X(p) = 0; ``None`` when it fails to converge."""
    p = np.asarray(seed, dtype=float).copy()
    r = sys(p)
    for _ in range(max_iter):
        nr = float(np.linalg.norm(r))
        if nr <= tol * max(1.0, float(np.linalg.norm(p))):
            return p
        try:
            step = np.linalg.solve(sys.jac(p), -r)
        except np.linalg.LinAlgError:
            return None
        lam = 1.0
        while lam > 1e-6:
            q = p + lam * step
            rq = sys(q)
            if np.linalg.norm(rq) < (1 - 1e-4 * lam) * nr or lam * np.linalg.norm(step) < 1e-14:
                break
            lam *= 0.5
        p, r = q, rq
        if not np.all(np.isfinite(p)) or np.linalg.norm(p) > 1e8:
            return None
    if np.linalg.norm(r) <= 1e-9 * max(1.0, float(np.linalg.norm(p))):
        return p
    return None


def _real_unit(v):
    v = np.real(v)
    n = np.linalg.norm(v)
    return v / n if n > 0 else v


def analyse(sys: FlowSystem, p) -> SingularityInfo:
    J = sys.jac(p)
    w, V = np.linalg.eig(J)
    order = np.lexsort((w.imag, w.real))
    w, V = w[order], V[:, order]
    vecs, lvecs = {}, {}
    if np.linalg.cond(V) < 1e12:
        Vinv = np.linalg.inv(V)
        for i in range(3):
            if abs(w[i].imag) <= REAL_TOL * max(1.0, abs(w[i])):
                vecs[i] = _real_unit(V[:, i])
                lvecs[i] = _real_unit(Vinv[i, :])
    else:
        log.info("defective Jacobian at %s; eigenvectors omitted", p)
    return SingularityInfo(np.asarray(p, dtype=float), w, classify(w), vecs, lvecs)


def find_and_classify_singularities(sys: FlowSystem, seeds=None) -> list[SingularityInfo]:
    seeds = sys.seeds if seeds is None else seeds
    found: list[np.ndarray] = []
    for s in seeds:
        p = newton(sys, s)
        if p is None:
            log.info("Newton diverged from seed %s; skipped", s)
            continue
        p = np.where(np.abs(p) < 1e-12, 0.0, p)
        if any(np.linalg.norm(p - q) < DEDUP_DIST for q in found):
            continue
        found.append(p)
    return [analyse(sys, p) for p in found]
