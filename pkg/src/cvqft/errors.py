"""Exception types raised across the package."""


class CVQFTError(Exception):
    """Base class for all errors raised by cvqft."""


class SpecError(CVQFTError, ValueError):
    """Invalid lattice or run parameters."""


class DimensionUnsupported(SpecError):
    pass


class PoleProximity(CVQFTError, ArithmeticError):
    """Green function requested too close to a normal-mode pole."""


class NotOrthogonal(CVQFTError, ValueError):
    pass


class SynthesisMismatch(CVQFTError, RuntimeError):
    """Synthesized circuit does not reproduce the target transformation."""


class MemoryGuard(CVQFTError, MemoryError):
    """Requested Fock space or dense matrix is larger than the configured limit."""


class PhaseGuard(CVQFTError, ValueError):
    """Quartic phase too large to be resolved at the current cutoff."""


class CutoffSaturated(CVQFTError, ValueError):
    pass


class ParameterOrder(CVQFTError, ValueError):
    pass


class ShapeMismatch(CVQFTError, ValueError):
    pass


class QuadratureNotConverged(CVQFTError, RuntimeError):
    pass


class BadInterval(CVQFTError, ValueError):
    pass


class ConfigError(CVQFTError, ValueError):
    """Run configuration failed validation; message carries the field path."""
