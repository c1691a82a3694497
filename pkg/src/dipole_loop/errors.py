"""Exception types shared across the package.

Each maps onto one CLI exit code: ConfigError -> 2, numeric/domain
errors -> 3, failed internal cross-checks -> 4.
"""


class DipoleLoopError(Exception):
    """Base class for all package errors."""


class ConfigError(DipoleLoopError):
    """Invalid configuration input (unknown key, bad value, constraint violation)."""

    def __init__(self, problems):
        # problems: list of strings, each "line N: message" or "key: message"
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class KinematicDomainError(DipoleLoopError):
    """A Feynman-parameter scale (a^2, b^2, M^2(x)) left the positive domain."""


class PoleError(DipoleLoopError):
    """Evaluation requested exactly on a propagator pole (q^2 = 0 kernel)."""


class QuadratureError(DipoleLoopError):
    """Adaptive quadrature failed to converge to the requested tolerance."""


class OracleError(DipoleLoopError):
    """An internal closed-form vs quadrature cross-check failed."""


class TruncationError(DipoleLoopError):
    """Fock-space truncation leakage exceeded the configured threshold."""
