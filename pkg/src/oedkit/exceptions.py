"""Exception types shared across the package."""


class NotPositiveDefinite(ValueError):
    """A matrix required to be symmetric positive definite is not."""


class NonBinaryDesign(ValueError):
    """An operation requiring a binary (0/1) design received relaxed weights."""


class NotLinear(TypeError):
    """The simulation model or observation operator has no dense linear representation."""


class MissingComponent(ValueError):
    """An inverse problem is missing a required component.

    The missing piece's name is available as ``component``.
    """

    def __init__(self, component: str, message: str | None = None):
        self.component = component
        super().__init__(message or f"inverse problem has no registered {component!r}")


class NonConvergence(RuntimeError):
    """An iterative solver hit its iteration budget without meeting its tolerance.

    The best iterate found so far is attached as ``result``.
    """

    def __init__(self, message: str, result=None):
        self.result = result
        super().__init__(message)


class TooManyDesigns(ValueError):
    """Brute force enumeration was requested for more sensors than the guard allows."""


class NonDifferentiablePenalty(ValueError):
    """A gradient-based solver was paired with a non-differentiable penalty."""


class NotDifferentiable(ValueError):
    """A gradient was requested for a function with no derivative there."""


class InvalidGrid(ValueError):
    """Grid or physical parameters of a PDE model are unusable."""


class InvalidBounds(ValueError):
    """Projection bounds for the stochastic solver are outside (0, 0.5)."""


class TimeOffLattice(ValueError):
    """An observation time does not sit on the integration time lattice."""
