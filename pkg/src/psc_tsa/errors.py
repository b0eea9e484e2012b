"""Exception hierarchy shared by the library and the CLI."""


class PscTsaError(Exception):
    """Base class for all errors raised by psc_tsa."""


class ScenarioError(PscTsaError, ValueError):
    """Invalid scenario or configuration input.

    ``diagnostics`` holds one human-readable line per problem found.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = list(diagnostics or [message])


class DomainError(PscTsaError, ValueError):
    """A quantity is outside the mathematical domain of an operation."""


class ValidityDomainError(DomainError):
    """Closed-form time solution requested where equilibria exist (|a| <= |b|).

    Use numeric integration in that regime instead.
    """


class NoEquilibriumError(DomainError):
    """A network state required to have equilibria has none."""


class BracketError(DomainError):
    """Bisection could not bracket the sought boundary."""


class IntegrationError(PscTsaError, RuntimeError):
    """The ODE integrator failed; carries the last valid (t, state)."""

    def __init__(self, message, t=None, state=None):
        super().__init__(message)
        self.t = t
        self.state = state


class InconclusiveError(PscTsaError, RuntimeError):
    """A trajectory ended neither settled nor clearly diverging."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})
