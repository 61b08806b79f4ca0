"""Concrete systems: the Lorenz field, a piecewise-affine geometric-Lorenz
triangular map, the two-square composite with an identity branch, and small
fixtures used by tests and the command line.

The one-dimensional maps are representatives chosen to satisfy the stated
constraints (slope bounds, identity branch, bounded one-sided limits).  Their
formulas are recorded in ``metadata`` so callers can check constraints rather
than hard-code formulas.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .flowlab.system import FlowSystem, Reinjection, linear_field
from .geometry import Chart, ConeField, SquareComplex
from .trimap import Branch, TriangularMap

DEFAULT_ALPHA = 0.35


# ---------------------------------------------------------------------------
# Lorenz field

@dataclass(frozen=True)
class LorenzParams:
    sigma: float = 10.0
    rho: float = 28.0
    beta: float = 8.0 / 3.0

    def __post_init__(self):
        if min(self.sigma, self.rho, self.beta) <= 0:
            raise InvalidInputError("Lorenz parameters must be positive")


def lorenz_field(params: LorenzParams | None = None) -> FlowSystem:
    p = LorenzParams() if params is None else params
    s, r, b = p.sigma, p.rho, p.beta

    def field(q):
        x, y, z = q[..., 0], q[..., 1], q[..., 2]
        return np.stack([s * (y - x), r * x - y - x * z, x * y - b * z], axis=-1)

    def jac(q):
        x, y, z = q
        return np.array([[-s, s, 0.0], [r - z, -1.0, -x], [y, x, -b]])

    seeds = [(0.1, 0.1, 0.1)]
    if r > 1:
        c = math.sqrt(b * (r - 1))
        seeds += [(c + 0.5, c + 0.5, r - 1.5), (-c - 0.5, -c - 0.5, r - 1.5)]
    else:
        seeds += [(8.0, 8.0, 27.0), (-8.0, -8.0, 27.0)]
    return FlowSystem(field, jac, name="lorenz", seeds=tuple(seeds),
                      metadata={"sigma": s, "rho": r, "beta": b})


def lorenz_origin_eigenvalues(params: LorenzParams | None = None) -> tuple[float, float, float]:
    """Closed form: ``-beta`` and the roots of the upper 2x2 block."""
    p = LorenzParams() if params is None else params
    tr = -(p.sigma + 1)
    det = p.sigma * (1 - p.rho)
    disc = math.sqrt(tr * tr - 4 * det)
    return (-p.beta, (tr - disc) / 2, (tr + disc) / 2)


# ---------------------------------------------------------------------------
# linear fixtures

def linear_sink() -> FlowSystem:
    return linear_field(np.diag([-1.0, -1.0, -1.0]), "sink")


def linear_saddle() -> FlowSystem:
    return linear_field(np.diag([1.0, -1.0, -1.0]), "saddle")


def rotation_flow() -> FlowSystem:
    """x' = -y, y' = x, z' = -z: a neutral rotation plane with no volume growth."""
    A = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, -1.0]])
    return linear_field(A, "rotation")


def linear_normal_form(l1: float | None = None, l2: float | None = None, l3: float | None = None,
                       d: float = 0.2, exit_radius: float = 1.0, offset: float = 1e-9,
                       transit: float = 0.0) -> FlowSystem:
    """Linearised Lorenz-like singularity at the origin with a re-injection.

    ``x' = l1 x, y' = l2 y, z' = l3 z``.  Orbits leaving through ``|x| = exit_radius``
    are sent back to ``(sign(x) * offset, 0, 2 d)`` and then descend to the
    section ``z = d``.  Defaults use the eigenvalues of the Lorenz origin.
    """
    e = lorenz_origin_eigenvalues()
    l1 = e[2] if l1 is None else l1
    l2 = e[1] if l2 is None else l2
    l3 = e[0] if l3 is None else l3
    if not (l2 < l3 < 0 < -l3 < l1):
        raise InvalidInputError("eigenvalues must be Lorenz-like")
    A = np.diag([l1, l2, l3])
    base = linear_field(A, "normal-form")

    def surface(p):
        return abs(p[0]) - exit_radius

    def apply(p):
        return np.array([math.copysign(offset, p[0]), 0.0, 2.0 * d])

    return FlowSystem(base.field, base.jacobian, name="normal-form", seeds=((0.0, 0.0, 0.0),),
                      reinjection=Reinjection(surface, apply, transit),
                      metadata={"eigenvalues": [l1, l2, l3], "d": d, "exit_radius": exit_radius})


def normal_form_inf_return_time(delta: float, fs: FlowSystem) -> float:
    """Closed-form infimum of the return time over S(delta) of the normal form."""
    l1, _, l3 = fs.metadata["eigenvalues"]
    R = fs.metadata["exit_radius"]
    return math.log(R / delta) / l1 + fs.reinjection.transit + math.log(2.0) / abs(l3)


# ---------------------------------------------------------------------------
# triangular maps

def _affine_branch(component, lo, hi, slope, shift, contraction, offset, target=None,
                   closed_lo=True, closed_hi=True, label=""):
    return Branch(
        component, lo, hi,
        leaf=lambda s, a=slope, c=shift: a * s + c,
        vertical=lambda s, y, r=contraction, o=offset: r * y + o,
        target=target, closed_lo=closed_lo, closed_hi=closed_hi,
        dleaf=lambda s, a=slope: a,
        dvertical=lambda s, y, r=contraction: (0.0, r),
        inverse=lambda t, a=slope, c=shift: (t - c) / a,
        label=label,
    )


def _lorenz_branches(component, mu, rho, offset):
    # f(s) = sign(s) (mu |s| - 1)
    return [
        _affine_branch(component, -1.0, 0.0, mu, 1.0, rho, offset, closed_hi=False, label="-"),
        _affine_branch(component, 0.0, 1.0, mu, -1.0, rho, -offset, closed_lo=False, label="+"),
    ]


def declared_rate(mu: float, rho: float, alpha: float) -> float:
    """Lower bound for the cone expansion of ``diag(mu, rho)`` on C_alpha."""
    return mu * math.cos(alpha) - rho * math.sin(alpha)


def geo_lorenz(mu: float = 1.9, rho: float = 0.3, alpha: float = DEFAULT_ALPHA) -> TriangularMap:
    """One-square geometric-Lorenz map with large domain ``Sigma \\ L_0``."""
    if not math.sqrt(2) < mu <= 2:
        raise InvalidInputError(f"slope mu={mu} outside (sqrt 2, 2]")
    if not 0 < rho <= 0.5:
        raise InvalidInputError(f"contraction rho={rho} outside (0, 1/2]")
    cx = SquareComplex(1, (Chart("geo-lorenz"),))
    meta = {"model": "geo-lorenz", "mu": mu, "rho": rho, "alpha": alpha,
            "leaf_map": "f(s) = sign(s) (mu |s| - 1)",
            "vertical_map": "y -> rho y - 0.5 sign(s)"}
    return TriangularMap(cx, _lorenz_branches(0, mu, rho, 0.5), ConeField(alpha),
                         declared_rate(mu, rho, alpha), rho, "geo-lorenz", meta)


TOP, BOTTOM = 0, 1


def appendix_composite(mu_t: float = 1.8, rho: float = 0.3,
                       alpha: float = DEFAULT_ALPHA) -> TriangularMap:
    """Two squares: a Lorenz-type expanding map on the top square and the
    identity on the left half of the bottom square (right half undefined)."""
    if not mu_t > math.sqrt(2):
        raise InvalidInputError(f"slope mu_t={mu_t} must exceed sqrt 2")
    if mu_t > 2:
        raise InvalidInputError("slope above 2 sends leaves outside the square")
    cx = SquareComplex(2, (Chart("top"), Chart("bottom")))
    top = _lorenz_branches(TOP, mu_t, rho, 1.0 / 3.0)
    ident = Branch(BOTTOM, -1.0, 0.0, leaf=lambda s: s, vertical=lambda s, y: y,
                   dleaf=lambda s: 1.0, dvertical=lambda s, y: (0.0, 1.0),
                   inverse=lambda t: t, label="id")
    meta = {
        "model": "appendix", "mu_t": mu_t, "rho": rho, "alpha": alpha,
        "leaf_map_top": "f_t(s) = sign(s) (mu_t |s| - 1)",
        "vertical_map_top": "y -> rho y - sign(s) / 3",
        "leaf_map_bottom": "identity on [-1, 0]; undefined on (0, 1]",
        "wiring": {
            "unstable_branch_entry": {"component": "top", "point": [-1.0, -1.0 / 3.0]},
            "top_return": {"component": "top", "point": [1.0, 1.0 / 3.0]},
            "bottom_return": {"component": "bottom", "point": [0.0, 0.0]},
        },
    }
    return TriangularMap(cx, top + [ident], ConeField(alpha), declared_rate(mu_t, rho, alpha),
                         rho, "appendix", meta)


def identity_map(alpha: float = DEFAULT_ALPHA) -> TriangularMap:
    cx = SquareComplex(1, (Chart("identity"),))
    b = Branch(0, -1.0, 1.0, leaf=lambda s: s, vertical=lambda s, y: y,
               dleaf=lambda s: 1.0, dvertical=lambda s, y: (0.0, 1.0), inverse=lambda t: t,
               label="id")
    return TriangularMap(cx, (b,), ConeField(alpha), 1.0, None, "identity",
                         {"model": "identity"})


def tent_map(rho: float = 0.3, alpha: float = DEFAULT_ALPHA) -> TriangularMap:
    """f(s) = 1 - 2|s| with vertical contraction ``rho``."""
    cx = SquareComplex(1, (Chart("tent"),))
    br = [_affine_branch(0, -1.0, 0.0, 2.0, 1.0, rho, 0.0, label="up"),
          _affine_branch(0, 0.0, 1.0, -2.0, 1.0, rho, 0.0, label="down")]
    return TriangularMap(cx, br, ConeField(alpha), declared_rate(2.0, rho, alpha), rho, "tent",
                         {"model": "tent", "leaf_map": "f(s) = 1 - 2|s|"})


def preimage_levels(fmap: TriangularMap, component: int, s: float, depth: int) -> list[list[float]]:
    """Levels of the backward tree of leaf ``s``: level j lists f^{-j}(s)."""
    levels = [[float(s)]]
    for _ in range(depth):
        nxt = []
        for t in levels[-1]:
            for b in fmap.branches:
                if b.target != component or b.component != component:
                    continue
                lo, hi = b.image()
                if not lo <= t <= hi:
                    continue
                u = b.invert(t)
                if b.contains(u):
                    nxt.append(float(u))
        levels.append(sorted(nxt))
    return levels


MAP_MODELS = {
    "geo-lorenz": geo_lorenz,
    "appendix": appendix_composite,
    "identity": identity_map,
}
FLOW_MODELS = {"lorenz": lorenz_field}
