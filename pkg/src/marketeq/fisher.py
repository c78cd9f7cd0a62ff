"""Approximate Fisher equilibria by grid search.

Two schemes live here.

*Fixed items*: enumerate prices on a uniform grid and, at each point,
measure how far the market is from a thrifty equilibrium with the residual
LP. The first grid point (lexicographic order) with residual at most
``epsilon`` is returned.

*Fixed agents*: robustify the utilities, enumerate guesses of every
agent's equilibrium utility on a ``delta`` grid, and for each guess solve
two feasibility LPs: one for an allocation meeting the guesses and one for
prices under which nobody can do much better than their guess.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleUtility, NotFound, UnboundedDemand
from .lp import EQ, GE, LE, LinearProgram, check_feasible, solve_lp
from .model import (EquilibriumCandidate, FisherMarket, best_value,
                    normalize_market, thrifty_cost)
from .robust import perspective_robustify
from .search import Attempt, first_success


class AgentLayout:
    """Column layout of stacked per-agent variables ``[x_i, t_i]``."""

    def __init__(self, utilities, n_items):
        self.utilities = list(utilities)
        self.m = n_items
        widths = [n_items + u.n_aux for u in self.utilities]
        self.offsets = np.r_[0, np.cumsum(widths)].astype(int)
        self.n_vars = int(self.offsets[-1])
        n = len(self.utilities)
        k_total = sum(u.n_rows for u in self.utilities)
        self.util_rows = np.zeros((k_total, self.n_vars))
        self.util_rhs = np.zeros(k_total)
        self.value_rows = np.zeros((n, self.n_vars))
        self.supply_rows = np.zeros((n_items, self.n_vars))
        self.free = np.zeros(self.n_vars, bool)
        r0 = 0
        for i, u in enumerate(self.utilities):
            o = self.offsets[i]
            w = widths[i]
            self.util_rows[r0:r0 + u.n_rows, o:o + w] = u.block
            self.util_rhs[r0:r0 + u.n_rows] = u.b
            r0 += u.n_rows
            self.value_rows[i, o:o + w] = u.objective
            self.supply_rows[:, o:o + n_items] = np.eye(n_items)
            self.free[o + n_items:o + w] = True

    @property
    def n_agents(self):
        return len(self.utilities)

    def spend_rows(self, p):
        rows = np.zeros((self.n_agents, self.n_vars))
        for i in range(self.n_agents):
            o = self.offsets[i]
            rows[i, o:o + self.m] = p
        return rows

    def allocation(self, z):
        return np.vstack([z[o:o + self.m] for o in self.offsets[:-1]])


def _layout(market):
    cached = getattr(market, "_layout_cache", None)
    if cached is None:
        cached = AgentLayout(market.utilities, market.n_items)
        market._layout_cache = cached
    return cached


# ---------------------------------------------------------------- fixed items

@dataclass
class Residual:
    delta: float
    x: np.ndarray
    values: np.ndarray
    costs: np.ndarray


def residual_program(market: FisherMarket, p, values=None, costs=None):
    """Smallest ``delta`` making ``p`` a ``delta``-approximate thrifty price.

    ``values``/``costs`` default to the per-agent optimal utility and
    thrifty cost at ``p``. Raises UnboundedDemand when some optimal utility
    is infinite.
    """
    p = np.asarray(p, dtype=float).ravel()
    lay = _layout(market)
    w = market.budgets
    if values is None:
        values = np.array([best_value(u, p, wi)
                           for u, wi in zip(market.utilities, w)])
    if costs is None:
        costs = np.array([thrifty_cost(u, p, wi, v) for u, wi, v
                          in zip(market.utilities, w, values)])
    n, m = lay.n_agents, lay.m
    total = float(w.sum())
    spend = lay.spend_rows(p)
    d = lambda k, v: np.full((k, 1), v)  # noqa: E731
    A = np.vstack([
        np.hstack([lay.util_rows, d(len(lay.util_rhs), 0.0)]),
        np.hstack([-lay.value_rows, d(n, -1.0)]),
        np.hstack([spend, d(n, -total)]),
        np.hstack([lay.supply_rows, d(m, 0.0)]),
        np.hstack([-spend.sum(axis=0, keepdims=True), d(1, -total)]),
    ])
    rhs = np.r_[lay.util_rhs, -values, costs, np.ones(m), -p.sum()]
    c = np.zeros(lay.n_vars + 1)
    c[-1] = 1.0
    out = solve_lp(LinearProgram(c=c, A=A, senses=[LE] * len(rhs), rhs=rhs,
                                 maximize=False, free=np.r_[lay.free, False]))
    if not out.optimal:
        # x = 0 with a large delta is always feasible
        raise InfeasibleUtility(f"residual program is {out.status.value}")
    return Residual(out.objective, lay.allocation(out.x), values, costs)


def price_grid(m, kmax, keep=None):
    """Integer grid points ``0 <= k_j <= kmax`` in lexicographic order."""
    for k in itertools.product(range(kmax + 1), repeat=m):
        if keep is None or keep(k):
            yield k


def fixed_items_grid(m, epsilon, total_budget):
    step = epsilon / (2 * m) * total_budget
    kmax = int(math.floor(2 * m / epsilon + 1))
    return step, kmax


def solve_fixed_items(market: FisherMarket, epsilon, price_grid_filter=None,
                      threads=None, normalized=False):
    """First grid price whose residual is at most ``epsilon``.

    ``price_grid_filter`` receives the integer grid index tuple.
    """
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    norm = None if normalized else normalize_market(market)
    mk = market if normalized else norm.market
    m = mk.n_items
    step, kmax = fixed_items_grid(m, epsilon, float(mk.budgets.sum()))

    def evaluate(k):
        p = np.asarray(k, dtype=float) * step
        try:
            res = residual_program(mk, p)
        except UnboundedDemand:
            return Attempt(None, mk.n_agents)
        cost = 2 * mk.n_agents + 1
        if res.delta <= epsilon:
            return Attempt((p, res), cost)
        return Attempt(None, cost)

    found, spent = first_success(price_grid(m, kmax, price_grid_filter),
                                 evaluate, threads)
    if found is None:
        raise NotFound(f"no grid price reached residual <= {epsilon}")
    p, res = found.result
    x = res.x if normalized else norm.expand(res.x)
    return EquilibriumCandidate(
        np.clip(x, 0.0, None), p, float(epsilon), float(epsilon), True,
        info={"residual": res.delta, "grid_index": list(found.task),
              "grid_step": step, "lps_solved": found.cost})


# --------------------------------------------------------------- fixed agents

def allocation_for_guess(market: FisherMarket, guesses):
    """Any allocation giving agent ``i`` utility at least ``guesses[i]``.

    Returns None when no such allocation exists.
    """
    lay = _layout(market)
    guesses = np.asarray(guesses, dtype=float)
    A = np.vstack([lay.util_rows, -lay.value_rows, lay.supply_rows])
    rhs = np.r_[lay.util_rhs, -guesses, np.ones(lay.m)]
    out = check_feasible(LinearProgram(c=np.zeros(lay.n_vars), A=A,
                                       senses=[LE] * len(rhs), rhs=rhs,
                                       free=lay.free))
    if not out.optimal:
        return None
    return np.clip(lay.allocation(out.x), 0.0, None)


@dataclass
class PriceSystemConfig:
    """Parameters and optional extra rows of the price feasibility system.

    ``budgets`` are fixed money budgets; with ``endowments`` set instead,
    budgets become variables tied to ``p @ e_i`` and prices sum to one.
    """

    delta: float
    xi: float
    budgets: np.ndarray | None = None
    endowments: np.ndarray | None = None
    slack: float = field(default=None)
    zero_price_items: tuple = ()
    argmax_sets: list | None = None
    argmax_slack: float = 0.0
    vtop: float | None = None

    def __post_init__(self):
        if not (self.delta > 0 and self.xi > 0):
            raise ValueError("delta and xi must be positive")
        if (self.budgets is None) == (self.endowments is None):
            raise ValueError("give exactly one of budgets or endowments")
        if self.budgets is not None:
            self.budgets = np.asarray(self.budgets, dtype=float)
            n, total = self.budgets.size, float(self.budgets.sum())
        else:
            self.endowments = np.atleast_2d(
                np.asarray(self.endowments, dtype=float))
            n, total = self.endowments.shape[0], 1.0
        if self.slack is None:
            self.slack = n * self.delta * total / self.xi
        if self.vtop is None:
            self.vtop = 1.0 + self.xi


def price_system(market: FisherMarket, guesses, x, config: PriceSystemConfig):
    """Prices under which every agent's optimum is at most guess + 2 delta.

    The optimal-value bound is written through the dual of each agent's
    demand LP after the substitution ``gamma_bar = gamma / beta`` and
    ``beta_bar = 1 / beta``, which makes it linear in the prices. Returns
    ``(p, w)`` or None; ``w`` is the budget vector (variable in exchange
    mode).
    """
    utils = market.utilities
    n, m = len(utils), market.n_items
    guesses = np.asarray(guesses, dtype=float)
    x = np.asarray(x, dtype=float)
    exchange = config.endowments is not None
    nw = n if exchange else 0
    goff = [m + nw]
    for u in utils:
        goff.append(goff[-1] + u.n_rows + 1)
    nv = goff[-1]
    rows, senses, rhs = [], [], []

    def row(coeffs, sense, value):
        rows.append(coeffs)
        senses.append(sense)
        rhs.append(value)

    for i, u in enumerate(utils):
        g, bb = goff[i], goff[i] + u.n_rows
        wi = None if exchange else config.budgets[i]
        # b @ gamma_bar + w <= beta_bar (guess + 2 delta)
        r = np.zeros(nv)
        r[g:bb] = u.b
        r[bb] = -(guesses[i] + 2 * config.delta)
        if exchange:
            r[m + i] = 1.0
            row(r, LE, 0.0)
        else:
            row(r, LE, -wi)
        # A^T gamma_bar + p - beta_bar q >= 0
        blk = np.zeros((m, nv))
        blk[:, g:bb] = u.A.T
        blk[:, :m] += np.eye(m)
        blk[:, bb] = -u.q
        for rr in blk:
            row(rr, GE, 0.0)
        # B^T gamma_bar = beta_bar s
        blk = np.zeros((u.n_aux, nv))
        blk[:, g:bb] = u.B.T
        blk[:, bb] = -u.s
        for rr in blk:
            row(rr, EQ, 0.0)
        # vtop * beta_bar >= w
        r = np.zeros(nv)
        r[bb] = config.vtop
        if exchange:
            r[m + i] = -1.0
            row(r, GE, 0.0)
        else:
            row(r, GE, wi)
        # p @ x_i <= w + slack
        r = np.zeros(nv)
        r[:m] = x[i]
        if exchange:
            r[m + i] = -1.0
            row(r, LE, config.slack)
        else:
            row(r, LE, wi + config.slack)
    # sum_j p_j (1 - sum_i x_ij) <= slack
    r = np.zeros(nv)
    r[:m] = 1.0 - x.sum(axis=0)
    row(r, LE, config.slack)
    for j in config.zero_price_items:
        r = np.zeros(nv)
        r[j] = 1.0
        row(r, LE, 0.0)
    if config.argmax_sets is not None:
        for i, J in enumerate(config.argmax_sets):
            for j in J:
                r = np.zeros(nv)
                r[:m] = x[i]
                r[j] -= 1.0
                row(r, LE, config.argmax_slack)
    if exchange:
        for i in range(n):
            r = np.zeros(nv)
            r[:m] = config.endowments[i]
            r[m + i] = -1.0
            row(r, EQ, 0.0)
        r = np.zeros(nv)
        r[:m] = 1.0
        row(r, EQ, 1.0)
    out = check_feasible(LinearProgram(c=np.zeros(nv), A=np.vstack(rows),
                                       senses=senses, rhs=np.array(rhs)))
    if not out.optimal:
        return None
    p = np.clip(out.x[:m], 0.0, None)
    w = out.x[m:m + n] if exchange else config.budgets.copy()
    return p, w


def guess_limit(delta, top):
    """Largest guess index when utilities top out at ``top``."""
    return int(math.ceil(top / delta - 1e-9)) + 1


@dataclass
class GuessHit:
    guesses: np.ndarray
    x: np.ndarray
    p: np.ndarray
    w: np.ndarray


def guess_search(market: FisherMarket, config: PriceSystemConfig,
                 threads=None, kmax=None):
    """Lexicographically first utility guess admitting allocation and prices.

    Guesses are ``k * delta`` for ``0 <= k <= kmax``. Along the last
    coordinate the allocation LP only gets harder, so the scan of a row stops
    at its first infeasible allocation; this never skips a success.
    Returns ``(hit or None, lps_solved)``.
    """
    n = market.n_agents
    delta = config.delta
    kmax = guess_limit(delta, config.vtop) if kmax is None else kmax

    def scan(prefix):
        lps = 0
        for k_last in range(kmax + 1):
            k = np.array(prefix + (k_last,), dtype=float)
            guesses = k * delta
            x = allocation_for_guess(market, guesses)
            lps += 1
            if x is None:
                break
            sol = price_system(market, guesses, x, config)
            lps += 1
            if sol is not None:
                return Attempt(GuessHit(guesses, x, sol[0], sol[1]), lps)
        return Attempt(None, lps)

    prefixes = itertools.product(range(kmax + 1), repeat=n - 1)
    found, spent = first_success(prefixes, scan, threads)
    if found is None:
        return None, spent
    return found.result, found.cost


def fixed_agents_parameters(sigma, n):
    return sigma ** 2 / (2 * n), sigma / 2


def robustify_market(market: FisherMarket, xi):
    """Shrink every normalized utility to ``1 - xi``, then robustify.

    The robust utilities then top out at exactly 1, which keeps utility
    guesses in ``[0, 1]``.
    """
    top = 1.0 - xi
    return FisherMarket(
        market.budgets,
        [perspective_robustify(u.scaled(top), xi, top).utility
         for u in market.utilities],
        market.n_items)


def solve_fixed_agents(market: FisherMarket, sigma, threads=None,
                       zero_price_items=()):
    """Fixed-agents scheme on a Fisher market.

    The candidate's advertised accuracy is
    ``(n delta / xi, (2 delta + xi) / (1 - xi))`` with
    ``delta = sigma^2 / (2n)`` and ``xi = sigma / 2``; the division undoes
    the shrinking done before robustification.
    """
    if not 0 < sigma < 1:
        raise ValueError("sigma must lie in (0, 1)")
    norm = normalize_market(market)
    mk = norm.market
    n = mk.n_agents
    delta, xi = fixed_agents_parameters(sigma, n)
    robust = robustify_market(mk, xi)
    config = PriceSystemConfig(delta, xi, budgets=mk.budgets,
                               zero_price_items=tuple(zero_price_items),
                               vtop=1.0)
    hit, lps = guess_search(robust, config, threads)
    if hit is None:
        exc = NotFound("no utility guess admitted allocation and prices")
        exc.lps_solved = lps
        raise exc
    return EquilibriumCandidate(
        norm.expand(hit.x), hit.p, n * delta / xi,
        (2 * delta + xi) / (1 - xi), False,
        info={"delta": delta, "xi": xi, "guesses": hit.guesses.tolist(),
              "lps_solved": lps})
