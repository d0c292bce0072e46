"""Exception hierarchy shared by the solver modules."""

from __future__ import annotations


class WillmoreError(Exception):
    """Base class for all errors raised by this package."""


class ContractError(WillmoreError, ValueError):
    """An argument violates a documented precondition."""


class StencilError(WillmoreError, IndexError):
    """A stencil would read a node outside the grid closure."""

    def __init__(self, message: str, node: tuple[int, int]):
        super().__init__(message)
        self.node = node


class DivergenceError(WillmoreError, FloatingPointError):
    """A non-finite value appeared during evaluation or time stepping.

    ``node`` is the first offending grid node (if known), ``t`` the model time,
    and ``state`` the last good state when raised from the integrator.
    """

    def __init__(self, message: str, node=None, t=None, state=None):
        super().__init__(message)
        self.node = node
        self.t = t
        self.state = state
        self.snapshots = []


class StepFailure(WillmoreError, RuntimeError):
    """The adaptive step controller could not satisfy the tolerance."""

    def __init__(self, message: str, t: float, state=None):
        super().__init__(message)
        self.t = t
        self.state = state
        self.snapshots = []


class ConfigError(WillmoreError, ValueError):
    """Invalid run configuration; ``key`` names the offending entry."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key
