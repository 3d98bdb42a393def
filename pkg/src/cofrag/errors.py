"""Exception types raised by the solver."""


class CofragError(Exception):
    """Base class for all package errors."""


class ConfigurationError(CofragError, ValueError):
    """Invalid parameters, tables, meshes or configuration files."""


class InfeasibleError(CofragError, ValueError):
    """No equilibrium exponent reproduces the requested volume."""


class ContractError(CofragError, RuntimeError):
    """An operation was called outside its documented domain."""


class PositivityError(CofragError, RuntimeError):
    """A time step produced negative densities."""


class ConservationError(CofragError, RuntimeError):
    """Discrete volume drifted on a run that must conserve it."""


class DomainError(CofragError, ValueError):
    """A functional was evaluated where it is undefined."""


class UnsupportedOperation(CofragError, TypeError):
    """The operation needs mesh structure this mesh does not have."""
