"""scikit-learn style front end.

Each estimator takes a market in ``fit`` and exposes the computed prices,
allocation and the independent verification report as fitted attributes::

    eq = FisherEquilibrium(method="fixed-agents", accuracy=0.25).fit(market)
    eq.prices_, eq.allocation_, eq.report_.passed
"""
from __future__ import annotations

from sklearn.base import BaseEstimator

from .arrow_debreu import solve_ad_fixed_agents, solve_ad_fixed_items
from .fisher import solve_fixed_agents, solve_fixed_items
from .matching import (solve_hz_thrifty_fixed_agents,
                       solve_matching_fixed_agents,
                       solve_matching_fixed_items)
from .validation import (check_accuracy, check_is_fitted, check_market,
                         check_method, check_threads)
from .verify import verify_ad, verify_fisher, verify_matching


class _EquilibriumEstimator(BaseEstimator):
    _kind = None
    _solvers = {}

    def __init__(self, method=None, accuracy=0.25, threads=None):
        self.method = method
        self.accuracy = accuracy
        self.threads = threads

    def _verify(self, market, cand):
        raise NotImplementedError

    def _market(self, market):
        return check_market(market, self._kind)

    def fit(self, market, y=None):
        method = check_method(self.method, self._solvers)
        accuracy = check_accuracy(self.accuracy)
        threads = check_threads(self.threads)
        market = self._market(market)
        cand = self._solvers[method](market, accuracy, threads=threads)
        self.candidate_ = cand
        self.prices_ = cand.p
        self.allocation_ = cand.x
        self.sigma_ = cand.sigma
        self.lambda_ = cand.lam
        self.thrifty_ = cand.thrifty
        self.report_ = self._verify(market, cand)
        return self

    def verify(self, market, sigma=None, lam=None):
        """Re-check the fitted candidate, by default at its advertised accuracy."""
        check_is_fitted(self)
        market = self._market(market)
        cand = self.candidate_
        if sigma is not None or lam is not None:
            cand = type(cand)(cand.x, cand.p,
                              cand.sigma if sigma is None else sigma,
                              cand.lam if lam is None else lam,
                              cand.thrifty, cand.info)
        return self._verify(market, cand)


class FisherEquilibrium(_EquilibriumEstimator):
    """Approximate Fisher equilibrium; thrifty with ``method="fixed-items"``."""

    _kind = "fisher"
    _solvers = {"fixed-items": solve_fixed_items,
                "fixed-agents": solve_fixed_agents}

    def __init__(self, method="fixed-items", accuracy=0.1, threads=None):
        super().__init__(method, accuracy, threads)

    def _verify(self, market, cand):
        return verify_fisher(market, cand, cand.sigma, cand.lam, cand.thrifty)


class MatchingEquilibrium(_EquilibriumEstimator):
    _kind = "matching"
    _solvers = {"fixed-items": solve_matching_fixed_items,
                "fixed-agents": solve_matching_fixed_agents,
                "hz-thrifty": solve_hz_thrifty_fixed_agents}

    def __init__(self, method="fixed-items", accuracy=0.2, threads=None):
        super().__init__(method, accuracy, threads)

    def _verify(self, market, cand):
        return verify_matching(market, cand, cand.sigma, cand.lam,
                               cand.thrifty)


class ExchangeEquilibrium(_EquilibriumEstimator):
    _kind = "arrow_debreu"
    _solvers = {"fixed-items": solve_ad_fixed_items,
                "fixed-agents": solve_ad_fixed_agents}

    def __init__(self, method="fixed-agents", accuracy=0.25, threads=None):
        super().__init__(method, accuracy, threads)

    def _market(self, market):
        return check_market(market, self._kind,
                            require_unit_coefficients=self.method
                            == "fixed-items")

    def _verify(self, market, cand):
        return verify_ad(market, cand, cand.sigma, cand.lam)
