"""Exception types shared across the package."""


class MarketError(Exception):
    """Base class for domain errors."""


class InvariantError(MarketError, ValueError):
    """Instance data violates a model invariant."""


class SchemaError(MarketError, ValueError):
    """Instance or candidate JSON does not follow the schema."""


class DimensionMismatch(MarketError, ValueError):
    pass


class UnboundedUtility(MarketError):
    """A utility LP is unbounded in its auxiliary variables."""


class InfeasibleUtility(MarketError):
    """No bundle in the unit box has finite utility."""


class UnboundedDemand(MarketError):
    """Optimal utility at the given prices is infinite."""


class EmptyMarket(MarketError):
    pass


class NonPositiveVmax(MarketError):
    pass


class NotFound(MarketError):
    """An enumeration finished without an acceptable candidate."""


class NegativePrice(MarketError, ValueError):
    pass


class SupplyShortfall(MarketError):
    pass


class NotLinear(MarketError, ValueError):
    pass
