"""Exception types shared across the library."""


class MdcError(Exception):
    """Base class for all library errors."""


class DegenerateParams(MdcError):
    """A lattice-parameter denominator vanished (p_i + p_j, p_i - p_j, ...)."""


class OutOfRegime(MdcError):
    """Operation requires the elliptic regime (real rotation angle, |b| < 1)."""


class NearCaustic(MdcError):
    """A Gaussian pivot sits in the ambiguous band between zero and nonzero."""


class CausticError(MdcError):
    """Propagator prefactor diverges: the sine of the total angle is ~0."""


class VariableMismatch(MdcError):
    """Kernel variable sets are incompatible for the requested operation."""


class DeltaConstraintError(MdcError):
    """A delta constraint ties variables that must remain independent."""


class DegenerateCoeffs(MdcError):
    """A Gaussian pivot vanished inside a coefficient scan."""


class MissingVertex(MdcError):
    """A field assignment does not cover every vertex used by the surface."""


class ConfigError(MdcError):
    """Malformed harness configuration."""
