"""Independent checks of approximate equilibria.

Every verifier rebuilds the per-agent optimal utility (and thrifty cost)
from the instance alone and compares against the candidate. Utilities are
put on the normalized scale first, so utility gaps are measured in units
of each agent's box maximum.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from importlib import resources

import numpy as np

from .errors import DimensionMismatch, UnboundedDemand
from .arrow_debreu import normalize_exchange
from .fisher import residual_program
from .lp import EQ, GE, LE, TAU_FEAS, LinearProgram
from .matching import normalize_matching, perfect_utilities
from .model import (AdMarket, EquilibriumCandidate, FisherMarket,
                    MatchingMarket, best_value, eval_utility,
                    normalize_market, plc_to_cplc, thrifty_cost, v_max)
from .search import evaluate_all

TOLERANCE = TAU_FEAS


@dataclass
class VerificationReport:
    utility_gaps: list
    budget_excess: list
    thrifty_excess: list | None
    clearing_slack: float
    oversupply: float
    sigma: float
    lam: float
    total_budget: float
    min_price: float | None = None
    price_sum: float | None = None
    unit_demand_error: float | None = None
    checks: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(self.checks.values())

    def failures(self):
        return [name for name, ok in self.checks.items() if not ok]

    def to_dict(self):
        out = asdict(self)
        out["passed"] = self.passed
        return _jsonable(out)

    def summary(self):
        lines = [f"verdict: {'PASS' if self.passed else 'FAIL'} "
                 f"at sigma={self.sigma:g}, lambda={self.lam:g}"]
        for name, ok in self.checks.items():
            lines.append(f"  {name:<16} {'ok' if ok else 'VIOLATED'}")
        lines.append(f"  max utility gap  {_fmax(self.utility_gaps):.3e}")
        lines.append(f"  max spend excess {_fmax(self.budget_excess):.3e}")
        if self.thrifty_excess is not None:
            lines.append(f"  max thrifty exc. {_fmax(self.thrifty_excess):.3e}")
        lines.append(f"  unsold value     {self.clearing_slack:.3e}")
        return "\n".join(lines)


def _fmax(values):
    return max(values) if len(values) else 0.0


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else ("inf" if v > 0 else "-inf")
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _check_dims(cand, n, m):
    if cand.x.shape != (n, m):
        raise DimensionMismatch(
            f"allocation has shape {cand.x.shape}, expected ({n}, {m})")
    if cand.p.size != m:
        raise DimensionMismatch(
            f"price vector has {cand.p.size} entries, expected {m}")


def _unit_scale(utilities):
    out = []
    for u in utilities:
        vm = v_max(u)
        out.append(u.scaled(1.0 / vm) if vm > TAU_FEAS else u)
    return out


def _core(utilities, budgets, x, p, sigma, lam, thrifty, money_scale):
    """Shared per-agent and market checks; ``money_scale`` multiplies sigma."""
    gaps, spend_excess, thrift = [], [], [] if thrifty else None
    for u, w, xi in zip(utilities, budgets, x):
        have = eval_utility(u, xi)
        spend = float(p @ xi)
        try:
            best = best_value(u, p, w)
        except UnboundedDemand:
            best = np.inf
        gaps.append(best - have)
        spend_excess.append(spend - w)
        if thrifty:
            if np.isfinite(best):
                thrift.append(spend - thrifty_cost(u, p, w, best))
            else:
                thrift.append(np.inf)
    sold = x.sum(axis=0)
    clearing = float(p @ (1.0 - sold))
    over = float(np.max(sold - 1.0)) if sold.size else 0.0
    budget_cap = sigma * money_scale + TOLERANCE
    report = VerificationReport(
        gaps, spend_excess, thrift, clearing, over, sigma, lam,
        money_scale)
    report.checks["utility"] = all(g <= lam + TOLERANCE for g in gaps)
    if thrifty:
        report.checks["thrifty_budget"] = all(t <= budget_cap for t in thrift)
    else:
        report.checks["budget"] = all(e <= budget_cap for e in spend_excess)
    report.checks["supply"] = over <= TOLERANCE
    report.checks["clearing"] = clearing <= budget_cap
    return report


def verify_fisher(market: FisherMarket, candidate: EquilibriumCandidate,
                  sigma, lam, thrifty=False) -> VerificationReport:
    _check_dims(candidate, market.n_agents, market.n_items)
    utilities = _unit_scale(market.utilities)
    return _core(utilities, market.budgets, candidate.x, candidate.p, sigma,
                 lam, thrifty, float(market.budgets.sum()))


def verify_matching(mm: MatchingMarket, candidate: EquilibriumCandidate,
                    sigma, lam, thrifty=False) -> VerificationReport:
    """Fisher checks with unit budgets plus one unit per agent and a free item.
    """
    _check_dims(candidate, mm.n_agents, mm.n_items)
    norm = normalize_matching(mm)
    utilities = perfect_utilities(norm.market)
    n = mm.n_agents
    report = _core(utilities, np.ones(n), candidate.x, candidate.p, sigma,
                   lam, thrifty, float(n))
    rows = candidate.x.sum(axis=1)
    report.unit_demand_error = float(np.max(np.abs(rows - 1.0)))
    report.min_price = float(candidate.p.min())
    report.checks["unit_demand"] = report.unit_demand_error <= TOLERANCE
    report.checks["zero_price"] = report.min_price <= TOLERANCE
    return report


def verify_ad(ad: AdMarket, candidate: EquilibriumCandidate, sigma, lam
              ) -> VerificationReport:
    _check_dims(candidate, ad.n_agents, ad.n_items)
    norm = normalize_exchange(ad)
    utilities = [plc_to_cplc(u) for u in norm.utilities]
    budgets = ad.endowments @ candidate.p
    report = _core(utilities, budgets, candidate.x, candidate.p, sigma, lam,
                   False, 1.0)
    report.price_sum = float(candidate.p.sum())
    report.checks["price_sum"] = report.price_sum >= 1.0 - TOLERANCE
    return report


# -------------------------------------------------------------------- oracle

@dataclass
class OracleResult:
    p: np.ndarray
    residual: float
    x: np.ndarray
    points: int


def oracle_grid_search(market: FisherMarket, grid_step, threads=None,
                       keep=None) -> OracleResult:
    """Global minimum of the residual over ``p_j = k_j * grid_step``.

    The grid covers ``sum(p) <= sum(w) + m * grid_step``. Beyond that the
    unsold-value and spending rows force the residual up to roughly
    ``(sum(p) - sum(w)) / ((n + 1) sum(w))``. Ties go to the
    lexicographically first point.
    """
    norm = normalize_market(market)
    mk = norm.market
    m = mk.n_items
    cap = float(mk.budgets.sum()) + m * grid_step
    kmax = int(np.floor(cap / grid_step + 1e-9))

    def grid():
        def rec(prefix, used):
            if len(prefix) == m:
                if keep is None or keep(tuple(prefix)):
                    yield tuple(prefix)
                return
            for k in range(kmax - used + 1):
                yield from rec(prefix + [k], used + k)
        return rec([], 0)

    def evaluate(k):
        p = np.asarray(k, dtype=float) * grid_step
        try:
            return residual_program(mk, p)
        except UnboundedDemand:
            return None

    points = list(grid())
    results = evaluate_all(points, evaluate, threads)
    best, best_k = None, None
    for k, res in zip(points, results):
        if res is not None and (best is None or res.delta < best.delta):
            best, best_k = res, k
    if best is None:
        raise UnboundedDemand("every grid point has unbounded demand")
    return OracleResult(np.asarray(best_k, dtype=float) * grid_step,
                        best.delta, norm.expand(best.x), len(points))


# -------------------------------------------------------- non-convex example

@dataclass
class NonconvexityFixture:
    market: MatchingMarket
    candidates: list
    midpoint_price: np.ndarray
    midpoint_allocation: np.ndarray
    reject_threshold: float


def _load_fixture_json():
    text = resources.files("marketeq").joinpath(
        "data/nonconvexity.json").read_text(encoding="utf-8")
    return json.loads(text)


def nonconvexity_fixture() -> NonconvexityFixture:
    """Three agents, three items, two equilibria whose midpoints fail."""
    data = _load_fixture_json()
    from .io import parse_instance   # local import: io depends on this module
    mm = parse_instance(json.dumps(data["instance"]))
    cands = [EquilibriumCandidate(c["x"], c["p"], c["sigma"], c["lambda"],
                                  c["thrifty"])
             for c in data["candidates"]]
    mid_p = (cands[0].p + cands[1].p) / 2
    mid_x = (cands[0].x + cands[1].x) / 2
    return NonconvexityFixture(mm, cands, mid_p, mid_x,
                               float(data["reject_threshold"]))


def matching_residual(mm: MatchingMarket, p):
    """Residual of ``p`` in the normalized perfect-matching market."""
    norm = normalize_matching(mm)
    fm = FisherMarket(np.ones(mm.n_agents), perfect_utilities(norm.market),
                      mm.n_items)
    return residual_program(fm, p)


def equilibrium_price_margin(mm: MatchingMarket, x):
    """How strongly some price vector supports ``x`` as an exact equilibrium.

    Only for linear matching utilities (one piece each). For an agent whose
    bundle is worth less than its favourite item, optimality at ``p`` means
    there are duals ``z_i`` (free) and ``y_i > 0`` of the demand LP with
    ``z_i + y_i p_j >= a_ij``, equality on the support of ``x_i``, and a
    binding budget. Dividing by ``y_i`` (``Y_i = 1/y_i``, ``Z_i = z_i/y_i``)
    makes every row linear in ``(p, Z, Y)``. The LP maximizes ``min_i Y_i``
    (capped at 1); a zero optimum means no price vector works, since
    ``Y_i = 0`` corresponds to no finite dual.

    Returns the optimal margin, or ``-1.0`` when even the relaxed rows are
    infeasible.
    """
    from .lp import solve_lp
    norm = normalize_matching(mm)
    x = np.asarray(x, dtype=float)
    n, m = x.shape
    for u in norm.market.utilities:
        if u.n_pieces != 1:
            raise ValueError("linear (single-piece) utilities are required")
    a = np.vstack([u.a[0] for u in norm.market.utilities])
    # variables: p (m), Z (n, free), Y (n), s
    nv = m + 2 * n + 1
    rows, senses, rhs = [], [], []

    def row(coeffs, sense, value):
        rows.append(coeffs)
        senses.append(sense)
        rhs.append(value)

    sold = x.sum(axis=0)
    for j in range(m):
        if sold[j] < 1.0 - TOLERANCE:
            r = np.zeros(nv)
            r[j] = 1.0
            row(r, EQ, 0.0)
    for i in range(n):
        value = float(a[i] @ x[i])
        r = np.zeros(nv)
        r[:m] = x[i]
        if value >= a[i].max() - TOLERANCE:
            row(r, LE, 1.0)
            continue
        row(r, EQ, 1.0)
        zi, yi = m + i, m + n + i
        for j in range(m):
            r = np.zeros(nv)
            r[j] = 1.0
            r[zi] = 1.0
            r[yi] = -a[i, j]
            row(r, EQ if x[i, j] > TOLERANCE else GE, 0.0)
        r = np.zeros(nv)
        r[-1] = 1.0
        r[yi] = -1.0
        row(r, LE, 0.0)
    r = np.zeros(nv)
    r[-1] = 1.0
    row(r, LE, 1.0)
    c = np.zeros(nv)
    c[-1] = 1.0
    free = np.zeros(nv, bool)
    free[m:m + n] = True
    out = solve_lp(LinearProgram(c=c, A=np.vstack(rows), senses=senses,
                                 rhs=np.array(rhs), free=free))
    if not out.optimal:
        return -1.0
    return out.objective
