"""Exception types shared across the package.

Everything that indicates bad *input* (malformed files, incompatible graphs,
infeasible mappings) derives from DataError so the CLI can map it to a single
exit code.
"""


class DataError(Exception):
    """Invalid input data."""


class FormatError(DataError):
    """A call-graph or ground-truth document violates the exchange format."""


class GraphMismatchError(DataError):
    """Two graphs cannot be compared (different instruction class lists)."""


class MappingError(DataError):
    """A mapping violates one-to-one constraints or refers to pruned pairs."""


class CompositionError(DataError):
    """Ground truths in a chain do not share an id space."""


class SearchSpaceError(Exception):
    """Exhaustive search was asked to enumerate an unreasonably large space."""
