"""Exception types shared across the package."""


class HolosphereError(Exception):
    """Base class for all package-specific errors."""


class ParseError(HolosphereError):
    """Malformed expression text.  `offset` is the character position at
    which parsing failed."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class EvaluationError(HolosphereError):
    """Expression evaluation failed (division by zero, non-finite value).
    Carries the evaluation point `z`."""

    def __init__(self, message, z):
        super().__init__(f"{message} at z={z}")
        self.z = z


class QuadratureError(HolosphereError):
    """Adaptive quadrature did not converge.  Carries the endpoint `z` of
    the offending path integral."""

    def __init__(self, message, z):
        super().__init__(f"{message} (integrating to z={z})")
        self.z = z


class DomainError(HolosphereError):
    """Invalid domain geometry, or a point/stencil left the domain."""


class SingularPointError(HolosphereError):
    """The chain (or its surface normalization) degenerates at the point."""

    def __init__(self, message, z):
        super().__init__(f"{message} at z={z}")
        self.z = z


class DegenerateSurfaceError(HolosphereError):
    """The surface differential (or a derived metric) vanishes, so the
    requested quantity is undefined."""


class NotPseudoholomorphicError(HolosphereError):
    """Reconstruction refused: the input surface fails the chain-termination
    test, so it is not (numerically) pseudoholomorphic."""

    def __init__(self, message, residual):
        super().__init__(f"{message} (termination residual {residual:.3e})")
        self.residual = residual


class ConfigError(HolosphereError):
    """Invalid job configuration.  `path` is a JSON-path into the config
    document locating the offending entry."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path
