"""Exception hierarchy shared by the map, covering and flow layers."""


class OrbitForgeError(Exception):
    """Base class for all library errors."""


class InvalidInputError(OrbitForgeError, ValueError):
    pass


class DomainError(OrbitForgeError):
    """A leaf or point lies outside the domain of a partially defined map.

    ``itinerary`` holds whatever partial orbit was computed before the
    failure (possibly empty).
    """

    def __init__(self, message, itinerary=None):
        super().__init__(message)
        self.itinerary = list(itinerary or [])


class NoLimitError(OrbitForgeError):
    """One-sided limit probe did not converge."""


class GrowthFailure(OrbitForgeError):
    """Iterating a curve never produced a cover of an alphabet band."""


class IncompleteGraphError(OrbitForgeError):
    def __init__(self, message, graph=None, dead_ends=()):
        super().__init__(message)
        self.graph = graph
        self.dead_ends = list(dead_ends)


class BranchRefinementError(OrbitForgeError):
    """Fixed-leaf bisection had no valid bracket on the witness branch."""


class NonHyperbolicOrbit(OrbitForgeError):
    def __init__(self, message, orbit=None):
        super().__init__(message)
        self.orbit = orbit


class IntegrationStall(OrbitForgeError):
    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class GeometryError(OrbitForgeError):
    pass


class NotTriangularError(OrbitForgeError):
    def __init__(self, message, deviation=None, grid=None):
        super().__init__(message)
        self.deviation = deviation
        self.grid = grid
