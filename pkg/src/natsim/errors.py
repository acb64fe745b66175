"""Exception types shared across the package."""


class NatsimError(Exception):
    """Base class for all natsim errors."""


class InvalidInput(NatsimError):
    """An argument is non-finite, zero where forbidden, or otherwise out of contract."""


class EpDegenerate(NatsimError):
    """The requested point is too close to an exceptional point.

    Both eigenvalues and eigenvectors coalesce there, so the biorthogonal
    normalization is undefined and band-resolved quantities cannot be
    computed.
    """


class OutOfRange(NatsimError):
    """A path parameter lies outside its valid interval."""


class PoleEncountered(NatsimError):
    """The closed-form coefficient-ratio evolution hit a pole (vanishing denominator)."""


class NoDamping(NatsimError):
    """The loss contrast vanishes, so there is no damping asymmetry to drive a transition."""


class NoTransition(NatsimError):
    """No nonadiabatic transition is predicted for these parameters."""
