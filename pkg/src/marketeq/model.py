"""Utilities, markets and the per-agent LP quantities built on them.

A constrained PLC utility is the optimal value of an agent-specific LP::

    u(x) = max_t  q @ x + s @ t   s.t.  A @ x + B @ t <= b

and ``-inf`` when no ``t`` satisfies the rows. Every quantity here
(optimal value, thrifty cost, box maximum, minimum cost of the box maximum)
is one LP over the stacked variables ``[x, t]`` with ``x >= 0`` and ``t``
free.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import (EmptyMarket, InfeasibleUtility, InvariantError,
                     UnboundedDemand, UnboundedUtility)
from .lp import LE, TAU_FEAS, LinearProgram, Status, solve_lp


def tie_tolerance(v):
    """Slack used when an optimal value is re-imposed as a constraint."""
    return 1e-9 * (1.0 + abs(v))


class CplcUtility:
    """Constrained piecewise-linear concave utility ``(q, s, A, B, b)``."""

    def __init__(self, q, s, A, B, b):
        self.q = np.asarray(q, dtype=float).ravel()
        self.s = np.asarray(s, dtype=float).ravel()
        m, r = self.q.size, self.s.size
        self.b = np.asarray(b, dtype=float).ravel()
        k = self.b.size
        self.A = np.asarray(A, dtype=float).reshape(k, m) if k * m == 0 \
            else np.asarray(A, dtype=float)
        self.B = np.asarray(B, dtype=float).reshape(k, r) if k * r == 0 \
            else np.asarray(B, dtype=float)
        if self.A.shape != (k, m):
            raise InvariantError(
                f"A has shape {self.A.shape}, expected ({k}, {m})")
        if self.B.shape != (k, r):
            raise InvariantError(
                f"B has shape {self.B.shape}, expected ({k}, {r})")

    @property
    def n_items(self):
        return self.q.size

    @property
    def n_aux(self):
        return self.s.size

    @property
    def n_rows(self):
        return self.b.size

    @cached_property
    def block(self):
        return np.hstack([self.A, self.B])

    @cached_property
    def objective(self):
        return np.concatenate([self.q, self.s])

    @cached_property
    def free_mask(self):
        return np.r_[np.zeros(self.n_items, bool), np.ones(self.n_aux, bool)]

    def scaled(self, factor):
        return CplcUtility(self.q * factor, self.s * factor, self.A, self.B,
                           self.b)

    def __repr__(self):
        return (f"CplcUtility(items={self.n_items}, aux={self.n_aux}, "
                f"rows={self.n_rows})")


@dataclass
class PlcUtility:
    """``min_l (a[l] @ x + beta[l])`` over the pieces ``l``."""

    a: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        self.a = np.atleast_2d(np.asarray(self.a, dtype=float))
        self.beta = np.asarray(self.beta, dtype=float).ravel()
        if self.a.shape[0] == 0:
            raise InvariantError("a PLC utility needs at least one piece")
        if self.beta.size != self.a.shape[0]:
            raise InvariantError("one offset per piece is required")

    @classmethod
    def from_pieces(cls, pieces):
        a = [np.asarray(piece[0], dtype=float) for piece in pieces]
        return cls(np.vstack(a), [float(piece[1]) for piece in pieces])

    @property
    def n_items(self):
        return self.a.shape[1]

    @property
    def n_pieces(self):
        return self.a.shape[0]

    def value(self, x):
        return float(np.min(self.a @ np.asarray(x, dtype=float) + self.beta))

    def scaled(self, factor):
        return PlcUtility(self.a * factor, self.beta * factor)

    def shifted(self):
        """Same preferences with ``min(beta) = 0``."""
        return PlcUtility(self.a.copy(), self.beta - self.beta.min())


def plc_to_cplc(u: PlcUtility, extra_row=None) -> CplcUtility:
    """Encode ``min_l`` as ``max t`` with one row per piece.

    ``extra_row`` adds the unit-demand rows: ``"partial"`` for
    ``sum(x) <= 1`` and ``"perfect"`` for ``sum(x) == 1``.
    """
    m = u.n_items
    A = -u.a
    B = np.ones((u.n_pieces, 1))
    b = u.beta.copy()
    if extra_row == "partial":
        A = np.vstack([A, np.ones(m)])
        B = np.vstack([B, [[0.0]]])
        b = np.r_[b, 1.0]
    elif extra_row == "perfect":
        A = np.vstack([A, np.ones(m), -np.ones(m)])
        B = np.vstack([B, [[0.0], [0.0]]])
        b = np.r_[b, 1.0, -1.0]
    elif extra_row is not None:
        raise ValueError(f"unknown extra_row {extra_row!r}")
    return CplcUtility(np.zeros(m), [1.0], A, B, b)


@dataclass
class FisherMarket:
    budgets: np.ndarray
    utilities: list
    n_items: int

    def __post_init__(self):
        self.budgets = np.asarray(self.budgets, dtype=float).ravel()
        if self.budgets.size != len(self.utilities):
            raise InvariantError("one budget per agent is required")
        if np.any(self.budgets < 0):
            raise InvariantError("budgets must be nonnegative")
        for i, u in enumerate(self.utilities):
            if u.n_items != self.n_items:
                raise InvariantError(
                    f"agent {i}: utility has {u.n_items} items, "
                    f"market has {self.n_items}")

    @property
    def n_agents(self):
        return len(self.utilities)


@dataclass
class MatchingMarket:
    utilities: list
    n_items: int

    def __post_init__(self):
        for i, u in enumerate(self.utilities):
            if u.n_items != self.n_items:
                raise InvariantError(
                    f"agent {i}: utility has {u.n_items} items, "
                    f"market has {self.n_items}")
        if self.n_items < self.n_agents:
            raise InvariantError(
                f"matching needs at least as many items ({self.n_items}) "
                f"as agents ({self.n_agents})")

    @property
    def n_agents(self):
        return len(self.utilities)


@dataclass
class AdMarket:
    utilities: list
    endowments: np.ndarray
    n_items: int

    def __post_init__(self):
        self.endowments = np.atleast_2d(
            np.asarray(self.endowments, dtype=float))
        if self.endowments.shape != (self.n_agents, self.n_items):
            raise InvariantError(
                f"endowments have shape {self.endowments.shape}, expected "
                f"({self.n_agents}, {self.n_items})")
        for i, u in enumerate(self.utilities):
            if u.n_items != self.n_items:
                raise InvariantError(
                    f"agent {i}: utility has {u.n_items} items, "
                    f"market has {self.n_items}")

    @property
    def n_agents(self):
        return len(self.utilities)


@dataclass
class EquilibriumCandidate:
    x: np.ndarray
    p: np.ndarray
    sigma: float
    lam: float
    thrifty: bool
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.x = np.atleast_2d(np.asarray(self.x, dtype=float))
        self.p = np.asarray(self.p, dtype=float).ravel()
        if np.any(self.x < -TAU_FEAS) or np.any(self.p < -TAU_FEAS):
            raise InvariantError("allocations and prices must be nonnegative")


def eval_utility(u: CplcUtility, x) -> float:
    """Value of ``u`` at bundle ``x``; ``-inf`` outside the domain."""
    x = np.asarray(x, dtype=float).ravel()
    slack = u.b - u.A @ x
    base = float(u.q @ x)
    if u.n_aux == 0:
        ok = np.all(slack >= -TAU_FEAS * (1.0 + np.abs(u.b)))
        return base if ok else -np.inf
    out = solve_lp(LinearProgram(c=u.s, A=u.B, senses=[LE] * u.n_rows,
                                 rhs=slack, free=np.ones(u.n_aux, bool)))
    if out.status is Status.INFEASIBLE:
        return -np.inf
    if out.status is Status.UNBOUNDED:
        raise UnboundedUtility("utility LP is unbounded at this bundle")
    return base + out.objective


def _rows_with(u, extra_A, extra_senses, extra_rhs):
    A = np.vstack([u.block, extra_A]) if len(extra_rhs) else u.block
    senses = [LE] * u.n_rows + list(extra_senses)
    return A, senses, np.r_[u.b, extra_rhs]


def best_bundle(u: CplcUtility, p, w):
    """Optimal value and one optimal bundle at prices ``p``, budget ``w``."""
    p = np.asarray(p, dtype=float).ravel()
    budget_row = np.r_[p, np.zeros(u.n_aux)][None, :]
    A, senses, rhs = _rows_with(u, budget_row, [LE], [w])
    out = solve_lp(LinearProgram(c=u.objective, A=A, senses=senses, rhs=rhs,
                                 free=u.free_mask))
    if out.status is Status.UNBOUNDED:
        raise UnboundedDemand("optimal utility is unbounded at these prices")
    if out.status is Status.INFEASIBLE:
        raise InfeasibleUtility("no affordable bundle has finite utility")
    return out.objective, out.x[:u.n_items]


def best_value(u: CplcUtility, p, w) -> float:
    return best_bundle(u, p, w)[0]


def _cheapest(u, p, value_floor, w=None):
    p = np.asarray(p, dtype=float).ravel()
    cost = np.r_[p, np.zeros(u.n_aux)]
    extra_A = [-u.objective]
    extra_rhs = [-(value_floor - tie_tolerance(value_floor))]
    if w is not None:
        extra_A.append(cost)
        extra_rhs.append(w)
    A, senses, rhs = _rows_with(u, np.vstack(extra_A), [LE] * len(extra_A),
                                extra_rhs)
    out = solve_lp(LinearProgram(c=cost, A=A, senses=senses, rhs=rhs,
                                 maximize=False, free=u.free_mask))
    if not out.optimal:
        raise InfeasibleUtility(
            f"value {value_floor:g} is not attainable ({out.status.value})")
    return out.objective


def thrifty_cost(u: CplcUtility, p, w, v) -> float:
    """Cheapest cost of a bundle worth ``v`` within budget ``w``."""
    return _cheapest(u, p, v, w)


def c_min(u: CplcUtility, p, vmax) -> float:
    """Cheapest cost of reaching ``vmax``; bundles may leave the unit box."""
    return _cheapest(u, p, vmax)


def v_max(u: CplcUtility) -> float:
    m = u.n_items
    box = np.hstack([np.eye(m), np.zeros((m, u.n_aux))])
    A, senses, rhs = _rows_with(u, box, [LE] * m, np.ones(m))
    out = solve_lp(LinearProgram(c=u.objective, A=A, senses=senses, rhs=rhs,
                                 free=u.free_mask))
    if out.status is Status.INFEASIBLE:
        raise InfeasibleUtility("utility is -inf on the whole unit box")
    if out.status is Status.UNBOUNDED:
        raise UnboundedUtility("utility is unbounded on the unit box")
    return out.objective


def is_regular(u: CplcUtility) -> bool:
    """True when the empty bundle is in the domain with value 0."""
    try:
        return abs(eval_utility(u, np.zeros(u.n_items))) <= TAU_FEAS
    except UnboundedUtility:
        return False


@dataclass
class Normalization:
    market: FisherMarket
    scales: np.ndarray
    kept: np.ndarray

    def expand(self, x_kept):
        """Allocation over all original agents; removed agents get nothing."""
        full = np.zeros((len(self.scales), self.market.n_items))
        full[self.kept] = x_kept
        return full


def normalize_market(market: FisherMarket) -> Normalization:
    """Scale every utility to a box maximum of exactly 1.

    Agents whose box maximum is (numerically) zero are dropped; they can
    always receive the empty bundle.
    """
    scales = np.zeros(market.n_agents)
    kept, utilities = [], []
    for i, u in enumerate(market.utilities):
        vm = v_max(u)
        if vm <= TAU_FEAS:
            continue
        scales[i] = 1.0 / vm
        kept.append(i)
        utilities.append(u.scaled(scales[i]))
    if not kept:
        raise EmptyMarket("every agent has zero box maximum")
    kept = np.array(kept)
    return Normalization(
        FisherMarket(market.budgets[kept], utilities, market.n_items),
        scales, kept)
