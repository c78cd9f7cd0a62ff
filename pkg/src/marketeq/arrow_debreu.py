"""Approximate exchange (Arrow-Debreu) equilibria for PLC utilities.

Budgets are the market value of each agent's endowment, so prices are only
defined up to scale; both solvers work with prices summing to (about) 1.
Utilities are first made strictly increasing in every item by adding
``xi / m`` to every piece coefficient, which keeps equilibrium prices away
from zero.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import InvariantError, NotFound, UnboundedDemand
from .fisher import (PriceSystemConfig, _layout, guess_limit, guess_search)
from .lp import LE, EQ, LinearProgram, check_feasible
from .model import (AdMarket, EquilibriumCandidate, FisherMarket, best_value,
                    plc_to_cplc, v_max)
from .robust import additive_robustify_plc
from .search import Attempt, first_success


def normalize_exchange(ad: AdMarket) -> AdMarket:
    """Shift offsets to ``min(beta) = 0`` and cap every box maximum at 1."""
    utilities = []
    for u in ad.utilities:
        u = u.shifted()
        vm = v_max(plc_to_cplc(u))
        if vm > 1.0:
            u = u.scaled(1.0 / vm)
        utilities.append(u)
    return AdMarket(utilities, ad.endowments, ad.n_items)


def robust_exchange_utilities(ad: AdMarket, xi):
    m = ad.n_items
    return [plc_to_cplc(additive_robustify_plc(u, xi, m))
            for u in ad.utilities]


def _as_fisher(ad, utilities):
    # budgets are placeholders: the LPs here take budgets from the prices
    return FisherMarket(np.ones(ad.n_agents), utilities, ad.n_items)


def solve_ad_fixed_agents(ad: AdMarket, sigma, threads=None):
    """Utility-guess scheme with budgets tied to endowment values."""
    if not 0 < sigma < 1:
        raise ValueError("sigma must lie in (0, 1)")
    norm = normalize_exchange(ad)
    n = ad.n_agents
    delta, xi = sigma ** 2 / (2 * n), sigma / 2
    market = _as_fisher(norm, robust_exchange_utilities(norm, xi))
    config = PriceSystemConfig(delta, xi, endowments=norm.endowments)
    hit, lps = guess_search(market, config, threads,
                            kmax=guess_limit(delta, 1 + xi))
    if hit is None:
        raise NotFound("no utility guess admitted allocation and prices")
    return EquilibriumCandidate(
        hit.x, hit.p, n * delta / xi, 2 * delta + xi, False,
        info={"delta": delta, "xi": xi, "guesses": hit.guesses.tolist(),
              "budgets": hit.w.tolist(), "lps_solved": lps})


def ad_value_slack(delta, xi, m):
    return delta * m * (m + xi) ** 2 / xi


def ad_allocation_program(market: FisherMarket, endowments, p, delta, xi):
    """Allocation clearing every item exactly with near-optimal utilities.

    ``market`` holds the robust utilities. Each agent must reach its optimal
    value at ``p`` minus ``delta m (m + xi)^2 / xi`` while spending at most
    its endowment value plus ``delta m``. Returns None when infeasible or
    when some optimal value is unbounded.
    """
    p = np.asarray(p, dtype=float)
    m = market.n_items
    w = np.asarray(endowments, dtype=float) @ p
    try:
        values = np.array([best_value(u, p, wi)
                           for u, wi in zip(market.utilities, w)])
    except UnboundedDemand:
        return None
    lay = _layout(market)
    slack = ad_value_slack(delta, xi, m)
    A = np.vstack([lay.util_rows, -lay.value_rows, lay.spend_rows(p),
                   lay.supply_rows])
    rhs = np.r_[lay.util_rhs, -(values - slack), w + delta * m, np.ones(m)]
    senses = [LE] * (len(rhs) - m) + [EQ] * m
    out = check_feasible(LinearProgram(c=np.zeros(lay.n_vars), A=A,
                                       senses=senses, rhs=rhs, free=lay.free))
    if not out.optimal:
        return None
    return np.clip(lay.allocation(out.x), 0.0, None)


def simplex_band_grid(m, delta):
    """Index vectors ``k`` with ``1 <= delta * sum(k) <= 1 + m delta``.

    Each ``k_j`` is at most ``ceil(1/delta) + 1``; lexicographic order.
    """
    kmax = int(math.ceil(1.0 / delta - 1e-9)) + 1
    lo = int(math.ceil(1.0 / delta - 1e-9))
    hi = int(math.floor((1.0 + m * delta) / delta + 1e-9))

    def rec(prefix, used, left):
        if left == 0:
            if lo <= used <= hi:
                yield tuple(prefix)
            return
        top = min(kmax, hi - used)
        bottom = max(0, lo - used - (left - 1) * kmax)
        for k in range(bottom, top + 1):
            yield from rec(prefix + [k], used + k, left - 1)

    return rec([], 0, m)


def solve_ad_fixed_items(ad: AdMarket, sigma, threads=None):
    """Price grid on the near-unit simplex, first feasible allocation wins."""
    if not 0 < sigma < 1:
        raise ValueError("sigma must lie in (0, 1)")
    for i, u in enumerate(ad.utilities):
        if np.any(u.a > 1.0):
            raise InvariantError(
                f"agent {i}: coefficients must be <= 1 for this solver")
    norm = normalize_exchange(ad)
    m = ad.n_items
    xi, delta = sigma / 2, sigma ** 2 / (12 * m ** 3)
    market = _as_fisher(norm, robust_exchange_utilities(norm, xi))

    def evaluate(k):
        p = np.asarray(k, dtype=float) * delta
        x = ad_allocation_program(market, norm.endowments, p, delta, xi)
        cost = ad.n_agents + 1
        return Attempt(None if x is None else (p, x), cost)

    found, _ = first_success(simplex_band_grid(m, delta), evaluate, threads)
    if found is None:
        raise NotFound("no grid price admitted a feasible allocation")
    p, x = found.result
    return EquilibriumCandidate(
        x, p, float(sigma), float(sigma), False,
        info={"delta": delta, "xi": xi, "grid_index": list(found.task),
              "lps_solved": found.cost})
