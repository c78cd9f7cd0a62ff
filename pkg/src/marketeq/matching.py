"""PLC matching markets.

Every agent has budget 1 and must end up with exactly one unit of item mass.
The solvers work on the partial relaxation (at most one unit), which is a
Fisher market, restricted to prices with a zero entry. A zero-price item
lets the leftover mass be handed out afterwards without touching anyone's
optimal utility.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import (InvariantError, NegativePrice, NotFound, NotLinear,
                     SupplyShortfall)
from .fisher import (PriceSystemConfig, guess_limit, guess_search,
                     solve_fixed_agents, solve_fixed_items)
from .lp import TAU_FEAS
from .model import (EquilibriumCandidate, FisherMarket, MatchingMarket,
                    PlcUtility, plc_to_cplc, v_max)
from .robust import argmax_set, linear_matching_robustify

log = logging.getLogger(__name__)


@dataclass
class MatchingNormalization:
    market: MatchingMarket
    scales: np.ndarray


def normalize_matching(mm: MatchingMarket) -> MatchingNormalization:
    """Shift offsets to ``min(beta) = 0`` and scale the best match to 1."""
    scales = np.ones(mm.n_agents)
    utilities = []
    for i, u in enumerate(mm.utilities):
        u = u.shifted()
        best = v_max(plc_to_cplc(u, "perfect"))
        if best > TAU_FEAS:
            scales[i] = 1.0 / best
            u = u.scaled(scales[i])
        utilities.append(u)
    return MatchingNormalization(MatchingMarket(utilities, mm.n_items), scales)


def perfect_utilities(mm: MatchingMarket):
    return [plc_to_cplc(u, "perfect") for u in mm.utilities]


def relax_to_partial(mm: MatchingMarket) -> FisherMarket:
    """Unit-budget Fisher market with the ``sum(x) <= 1`` relaxation."""
    return FisherMarket(np.ones(mm.n_agents),
                        [plc_to_cplc(u, "partial") for u in mm.utilities],
                        mm.n_items)


def apply_price_transform(p, r):
    """``p' = 1 + r (p - 1)`` coordinatewise."""
    if not r > 0:
        raise ValueError("r must be positive")
    p = np.asarray(p, dtype=float)
    out = 1.0 + r * (p - 1.0)
    if np.any(out < -TAU_FEAS):
        raise NegativePrice(f"r = {r:g} drives a price below zero")
    return np.clip(out, 0.0, None)


@dataclass
class MinPriceZero:
    p: np.ndarray
    r: float
    warning: str | None = None


def normalize_min_price_zero(p) -> MinPriceZero:
    """Move ``p`` along the demand-preserving transform until a price is 0.

    All-ones prices collapse to zero. Prices that are all at least 1 but
    not all equal to 1 cannot be moved this way and come back unchanged
    with a warning.
    """
    p = np.asarray(p, dtype=float).ravel()
    if np.any(p < -TAU_FEAS):
        raise NegativePrice("prices must be nonnegative")
    low = p.min()
    if np.all(np.abs(p - 1.0) <= TAU_FEAS):
        return MinPriceZero(np.zeros_like(p), float("inf"))
    if low <= TAU_FEAS:
        return MinPriceZero(p.copy(), 1.0)
    if low < 1.0:
        r = 1.0 / (1.0 - low)
        out = apply_price_transform(p, r)
        out[np.argmin(p)] = 0.0
        return MinPriceZero(out, r)
    msg = "no price below 1; the transform cannot reach a zero price"
    log.warning(msg)
    return MinPriceZero(p.copy(), 1.0, msg)


def lift_partial_to_perfect(mm: MatchingMarket, x_partial, p):
    """Top every agent up to one unit using the unsold item mass.

    Items are used in ascending index order, agents served in ascending
    order.
    """
    p = np.asarray(p, dtype=float)
    if p.min() > TAU_FEAS:
        raise InvariantError("lifting needs a zero-price item")
    x = np.array(x_partial, dtype=float, copy=True)
    n, m = x.shape
    if (n, m) != (mm.n_agents, mm.n_items):
        raise InvariantError("allocation shape does not match the market")
    left = np.clip(1.0 - x.sum(axis=0), 0.0, None)
    need = np.clip(1.0 - x.sum(axis=1), 0.0, None)
    if need.sum() > left.sum() + 1e-9:
        raise SupplyShortfall(
            f"unsold mass {left.sum():g} below total deficit {need.sum():g}")
    for j in range(m):
        for i in range(n):
            if left[j] <= 0.0:
                break
            give = min(need[i], left[j])
            if give > 0.0:
                x[i, j] += give
                need[i] -= give
                left[j] -= give
    return x


def _has_zero(k):
    return min(k) == 0


def solve_matching_fixed_items(mm: MatchingMarket, epsilon, threads=None):
    """Fixed-items grid restricted to prices with a zero entry, then lift."""
    norm = normalize_matching(mm)
    relaxed = relax_to_partial(norm.market)
    cand = solve_fixed_items(relaxed, epsilon, _has_zero, threads)
    x = lift_partial_to_perfect(norm.market, cand.x, cand.p)
    return EquilibriumCandidate(x, cand.p, 2 * epsilon, epsilon, True,
                                info=cand.info)


def solve_matching_fixed_agents(mm: MatchingMarket, sigma, threads=None):
    """Fixed-agents scheme once per choice of zero-price item, then lift."""
    norm = normalize_matching(mm)
    relaxed = relax_to_partial(norm.market)
    lps = 0
    for j in range(mm.n_items):
        try:
            cand = solve_fixed_agents(relaxed, sigma, threads,
                                      zero_price_items=(j,))
        except NotFound as exc:
            lps += getattr(exc, "lps_solved", 0)
            continue
        lps += cand.info["lps_solved"]
        x = lift_partial_to_perfect(norm.market, cand.x, cand.p)
        info = dict(cand.info, zero_item=j, lps_solved=lps)
        return EquilibriumCandidate(x, cand.p, 2 * cand.sigma, cand.lam,
                                    False, info=info)
    raise NotFound("no zero-price item admitted a solution")


def hz_parameters(sigma, n):
    return sigma ** 2 / (4 * n), sigma / 2


def solve_hz_thrifty_fixed_agents(mm: MatchingMarket, sigma, threads=None):
    """Thrifty fixed-agents scheme for linear matching utilities.

    Favourite items get the bonus ``xi``, and the price system also caps
    every agent's spending by the price of each favourite item (plus
    slack), which is what makes the output thrifty.
    """
    if not 0 < sigma < 1:
        raise ValueError("sigma must lie in (0, 1)")
    for i, u in enumerate(mm.utilities):
        if u.n_pieces != 1:
            raise NotLinear(f"agent {i} has {u.n_pieces} pieces, expected 1")
    norm = normalize_matching(mm)
    n, m = mm.n_agents, mm.n_items
    delta, xi = hz_parameters(sigma, n)
    favourites = [argmax_set(u.a[0]) for u in norm.market.utilities]
    robust = MatchingMarket(
        [PlcUtility(linear_matching_robustify(u.a[0], xi)[None, :], [0.0])
         for u in norm.market.utilities], m)
    relaxed = relax_to_partial(robust)
    slack = n * n * delta / xi
    lps = 0
    for j in range(m):
        config = PriceSystemConfig(
            delta, xi, budgets=np.ones(n), zero_price_items=(j,),
            argmax_sets=favourites, argmax_slack=slack)
        hit, spent = guess_search(relaxed, config, threads,
                                  kmax=guess_limit(delta, 1 + xi))
        lps += spent
        if hit is None:
            continue
        x = lift_partial_to_perfect(norm.market, hit.x, hit.p)
        return EquilibriumCandidate(
            x, hit.p, 2 * n * delta / xi, 2 * delta + xi, True,
            info={"delta": delta, "xi": xi, "zero_item": j,
                  "guesses": hit.guesses.tolist(), "lps_solved": lps})
    raise NotFound("no zero-price item admitted a solution")
