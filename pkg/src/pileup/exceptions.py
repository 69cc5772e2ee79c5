"""Exception types shared across the package."""


class Unclassifiable(ValueError):
    """The parameter sequences do not fall into a single regime."""


class IndeterminateLimit(Unclassifiable):
    """A limit constant could not be determined numerically."""


class ParticularCaseError(ValueError):
    """Regime (5, 2) with infinite beta: the L_n-scaled limit is degenerate."""


class SingularConfiguration(ValueError):
    """Two walls coincide, so the energy gradient does not exist."""


class ConfigError(ValueError):
    """Invalid experiment or model configuration."""
