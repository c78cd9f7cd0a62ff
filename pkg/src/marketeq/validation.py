"""Input checks shared by the estimators and the command line."""
from __future__ import annotations

import numbers

from .errors import InvariantError
from .io import parse_instance
from .model import AdMarket, FisherMarket, MatchingMarket

_KINDS = {"fisher": FisherMarket, "matching": MatchingMarket,
          "arrow_debreu": AdMarket}


def check_market(market, kind, require_unit_coefficients=False):
    """Return a market object of the requested kind.

    Accepts a market object, a JSON string/bytes, or an already decoded
    dict following the instance schema.
    """
    cls = _KINDS[kind]
    if not isinstance(market, (FisherMarket, MatchingMarket, AdMarket)):
        market = parse_instance(market, require_unit_coefficients)
    if not isinstance(market, cls):
        raise InvariantError(
            f"expected a {kind} market, got {type(market).__name__}")
    return market


def check_accuracy(value, name="accuracy"):
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise TypeError(f"{name} must be a real number")
    if not 0 < value < 1:
        raise ValueError(f"{name} must lie in (0, 1), got {value}")
    return float(value)


def check_threads(threads):
    if threads is None:
        return None
    if isinstance(threads, bool) or not isinstance(threads, numbers.Integral) \
            or threads < 1:
        raise ValueError("threads must be a positive integer or None")
    return int(threads)


def check_method(method, allowed):
    if method not in allowed:
        raise ValueError(f"method must be one of {sorted(allowed)}, "
                         f"got {method!r}")
    return method


def check_is_fitted(estimator):
    from sklearn.exceptions import NotFittedError
    if not hasattr(estimator, "candidate_"):
        raise NotFittedError(
            f"{type(estimator).__name__} is not fitted; call fit first")
