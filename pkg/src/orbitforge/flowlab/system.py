"""Vector fields with Jacobians and integrator settings."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "dopri5"
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_step: float = np.inf
    first_step: Optional[float] = None
    min_step: float = 1e-13


@dataclass(frozen=True)
class Reinjection:
    """Hybrid re-injection for normal-form fixtures.

    When ``surface(p)`` changes sign from negative to non-negative the state
    jumps to ``apply(p)`` (a point) after ``transit`` time units.
    """

    surface: Callable
    apply: Callable
    transit: float = 0.0


@dataclass(frozen=True)
class FlowSystem:
    """Autonomous 3-D vector field; ``field`` broadcasts over leading axes."""

    field: Callable
    jacobian: Optional[Callable] = None
    config: IntegratorConfig = IntegratorConfig()
    name: str = ""
    seeds: tuple = ()
    reinjection: Optional[Reinjection] = None
    metadata: dict = field(default_factory=dict, compare=False)

    def __call__(self, p):
        return self.field(np.asarray(p, dtype=float))

    def jac(self, p, h: float = 1e-6) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if self.jacobian is not None:
            return np.asarray(self.jacobian(p), dtype=float)
        return fd_jacobian(self.field, p, h)

    def with_config(self, **kw) -> "FlowSystem":
        return replace(self, config=replace(self.config, **kw))


def fd_jacobian(f, p, h: float = 1e-6) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    J = np.empty((3, 3))
    for j in range(3):
        e = np.zeros(3)
        e[j] = h * max(1.0, abs(p[j]))
        J[:, j] = (f(p + e) - f(p - e)) / (2 * e[j])
    return J


def linear_field(A, name: str = "linear") -> FlowSystem:
    A = np.asarray(A, dtype=float)
    return FlowSystem(lambda p: p @ A.T, lambda p: A.copy(), name=name,
                      seeds=((0.1, 0.1, 0.1),), metadata={"matrix": A.tolist()})
