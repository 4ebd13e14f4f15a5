"""Exception vocabulary shared across the package.

Every contract failure raises a subclass of :class:`ReebError`. Input and
schema problems (anything a caller could fix by handing us different bytes)
derive from :class:`InputError` so the CLI can map them to exit code 2,
while domain-level contract failures map to exit code 1.
"""

from __future__ import annotations


class ReebError(Exception):
    """Base class for every error raised by reebkit."""


class InputError(ReebError):
    """Malformed input: bad JSON, bad schema, bad expression text."""


# -- structural validation ---------------------------------------------------

class Disconnected(ReebError):
    """The underlying undirected graph has more than one component."""


class NotGoodOrientation(ReebError):
    """Graph fails the good-orientation test (loops, cycles, or a vertex
    of degree >= 2 missing an incoming or outgoing edge)."""


class UnsupportedDegree(ReebError):
    """A vertex has total degree outside the supported range."""


class NotAFork(ReebError):
    """An operation expected an UpFork or DownFork at a given vertex."""


class NotSmoothed(ReebError):
    """An operation requires a graph without degree-2 vertices."""


# -- moves -------------------------------------------------------------------

class SiteStale(ReebError):
    """A move instance does not match the current graph."""

    def __init__(self, message: str, step_index: int | None = None):
        super().__init__(message)
        self.step_index = step_index


class IllegalDirection(ReebError):
    """A one-sided move was applied in its reverse direction."""


class NotInvertible(ReebError):
    """A trace contains a step whose inverse is not a legal move."""

    def __init__(self, message: str, step_index: int | None = None):
        super().__init__(message)
        self.step_index = step_index


# -- reduction ---------------------------------------------------------------

class TargetTooLarge(ReebError):
    """drop_cycles was asked for more cycles than the graph has."""


# -- planner -----------------------------------------------------------------

class BadVertex(ReebError):
    """A vertex violates the shape needed for gadget expansion."""


class GadgetBroken(ReebError):
    """A recorded expansion gadget is no longer intact."""


class WrongCase(ReebError):
    """A case-specific operation was invoked on the wrong configuration."""


class PreconditionNotEstablished(ReebError):
    """A splice was attempted before its path preconditions hold."""


class NoConfiguration(ReebError):
    """The marked configuration expected by an elimination is absent."""


class PathExists(ReebError):
    """Relevelling is impossible because of a directed path obstruction."""


class NeighborDegreeOne(ReebError):
    """A leaf's unique neighbor is itself a leaf (two-vertex component)."""


class BudgetExceeded(ReebError):
    """The target's first Betti number exceeds the allowed budget."""


# -- manifold expressions ----------------------------------------------------

class UnsupportedExpression(InputError):
    """No evaluation rule covers the given manifold expression."""


class DimensionMismatch(InputError):
    """Connected sum of manifolds of different dimensions."""


# -- serialization -----------------------------------------------------------

class SchemaError(InputError):
    """A document violates the JSON schema."""


class DanglingReference(InputError):
    """A document references an id that is not defined."""


# -- generators --------------------------------------------------------------

class Infeasible(InputError):
    """No graph satisfies the requested invariants."""
