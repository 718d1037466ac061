"""Exception types shared across the package."""


class BeachLabError(Exception):
    """Base class for all package-specific errors."""


class BadInterval(BeachLabError):
    """An interval [x0, x1] is empty, inverted, or outside the tank."""


class NonzeroMean(BeachLabError):
    """Input to the spectral primitive carries content that admits no
    Neumann-compatible antiderivative (nonzero wall values, e.g. a constant
    component or a nonzero net flux)."""


class DegenerateDepth(BeachLabError):
    """The water column h + eta dropped at or below h/4 somewhere."""


class NonFiniteField(BeachLabError):
    """A grid function contains NaN or Inf entries."""


class BadBeach(BeachLabError):
    """Beach length delta is out of the admissible range (0, L/2)."""


class SolverFailure(BeachLabError):
    """The elliptic solve did not converge / the system was singular."""


class ZeroEnergy(BeachLabError):
    """Decay constants were requested for a run with H(0) = 0."""


class BlowUp(BeachLabError):
    """max|eta| exceeded h/2 during time stepping."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class InsufficientSampling(BeachLabError):
    """A time-integrated audit needs every step stored (sample_stride == 1)."""


class InadmissibleRho(BeachLabError):
    """The damped run violates the smallness hypothesis required to certify
    the decay estimate."""


class NegativeCutoff(BeachLabError):
    """A damping cutoff sample is negative."""


class ConfigError(BeachLabError):
    """A run configuration is missing a key or holds an invalid value."""


class SchemaMismatch(BeachLabError):
    """An input file does not match the documented column/key schema."""
