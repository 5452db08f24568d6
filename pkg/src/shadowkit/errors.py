"""Exception hierarchy for shadowkit.

Every failure mode that a caller can act on gets its own class; errors
carry the offending data (index, constant, history) so certificates and
CLI reports can show where a hypothesis broke.
"""


class ShadowkitError(Exception):
    """Base class for all shadowkit errors."""


class WindowBoundsError(ShadowkitError):
    """An index or time falls outside the computation window."""


class DomainMismatchError(ShadowkitError):
    """A sequence or grid function does not match the system's window."""


class SingularLinearPartError(ShadowkitError):
    """A one-step coefficient matrix is numerically singular."""


class IntegrationError(ShadowkitError):
    """The ODE integrator failed; carries the interval where it happened."""

    def __init__(self, message, t_span=None):
        super().__init__(message)
        self.t_span = t_span


class NoDichotomyError(ShadowkitError):
    """No exponential decay detected in the sampled kernel.

    ``worst_pair`` is the sampled (t, s) pair with the largest kernel norm
    relative to the attempted bound.
    """

    def __init__(self, message, worst_pair=None, fitted_rate=None):
        super().__init__(message)
        self.worst_pair = worst_pair
        self.fitted_rate = fitted_rate


class NotAContractionError(ShadowkitError):
    """The contraction constant came out >= 1."""

    def __init__(self, message, q=None, attained_at=None):
        super().__init__(message)
        self.q = q
        self.attained_at = attained_at


class NonConvergenceError(ShadowkitError):
    """Fixed-point iteration exhausted max_iter; carries the step history."""

    def __init__(self, message, step_history=()):
        super().__init__(message)
        self.step_history = list(step_history)


class JetUnavailableError(ShadowkitError):
    """Parameter derivatives requested but the orbit has no derivative oracles."""


class ConfigError(ShadowkitError):
    """Malformed run configuration, unknown gallery name, or invalid parameter."""
