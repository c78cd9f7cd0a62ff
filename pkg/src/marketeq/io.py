"""JSON instance and candidate formats.

Instance::

    {"model": "fisher" | "matching" | "arrow_debreu",
     "num_items": m,
     "agents": [{"budget": w, "utility": {...}}, ...]}

Fisher agents carry ``budget``, exchange agents carry ``endowment``.
A utility is one of::

    {"kind": "cplc", "q": [...], "s": [...], "A": [[...]], "B": [[...]],
     "b": [...]}
    {"kind": "plc", "pieces": [{"a": [...], "b": beta}, ...]}
    {"kind": "linear_matching", "a": [...]}

Candidate::

    {"x": [[...]], "p": [...], "sigma": s, "lambda": l, "thrifty": bool}
"""
from __future__ import annotations

import json

import numpy as np

from .errors import InvariantError, SchemaError
from .lp import TAU_FEAS
from .model import (AdMarket, CplcUtility, EquilibriumCandidate,
                    FisherMarket, MatchingMarket, PlcUtility, eval_utility,
                    plc_to_cplc)

MODELS = ("fisher", "matching", "arrow_debreu")


def _load(data):
    if isinstance(data, (bytes, bytearray)):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise SchemaError(f"input is not UTF-8: {exc}") from None
    if isinstance(data, str):
        try:
            return json.loads(data)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON: {exc}") from None
    return data


def _field(obj, key, where):
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: expected an object")
    if key not in obj:
        raise SchemaError(f"{where}: missing field '{key}'")
    return obj[key]


def _number(v, where):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SchemaError(f"{where}: expected a number")
    if not np.isfinite(v):
        raise SchemaError(f"{where}: must be finite")
    return float(v)


def _vector(v, where, length=None):
    if not isinstance(v, list):
        raise SchemaError(f"{where}: expected an array")
    out = np.array([_number(e, f"{where}[{k}]") for k, e in enumerate(v)])
    if length is not None and out.size != length:
        raise SchemaError(f"{where}: expected {length} entries, got {out.size}")
    return out


def _matrix(v, where, cols):
    if not isinstance(v, list):
        raise SchemaError(f"{where}: expected an array of rows")
    rows = [_vector(r, f"{where}[{k}]", cols) for k, r in enumerate(v)]
    return np.vstack(rows) if rows else np.zeros((0, cols))


def _count(v, where):
    if isinstance(v, bool) or not isinstance(v, int) or v < 1:
        raise SchemaError(f"{where}: expected a positive integer")
    return v


def _plc(node, where, m):
    kind = _field(node, "kind", where)
    if kind == "linear_matching":
        a = _vector(_field(node, "a", where), f"{where}.a", m)
        return PlcUtility(a[None, :], [0.0])
    if kind == "plc":
        pieces = _field(node, "pieces", where)
        if not isinstance(pieces, list) or not pieces:
            raise SchemaError(f"{where}.pieces: expected a nonempty array")
        a, beta = [], []
        for k, piece in enumerate(pieces):
            pw = f"{where}.pieces[{k}]"
            a.append(_vector(_field(piece, "a", pw), f"{pw}.a", m))
            beta.append(_number(_field(piece, "b", pw), f"{pw}.b"))
        return PlcUtility(np.vstack(a), beta)
    raise SchemaError(f"{where}.kind: expected 'plc' or 'linear_matching', "
                      f"got {kind!r}")


def _cplc(node, where, m):
    kind = _field(node, "kind", where)
    if kind in ("plc", "linear_matching"):
        return plc_to_cplc(_plc(node, where, m))
    if kind != "cplc":
        raise SchemaError(f"{where}.kind: unknown utility kind {kind!r}")
    q = _vector(_field(node, "q", where), f"{where}.q", m)
    s = _vector(_field(node, "s", where), f"{where}.s")
    b = _vector(_field(node, "b", where), f"{where}.b")
    A = _matrix(_field(node, "A", where), f"{where}.A", m)
    B = _matrix(_field(node, "B", where), f"{where}.B", s.size)
    if A.shape[0] != b.size or B.shape[0] != b.size:
        raise SchemaError(f"{where}: A, B and b need the same row count")
    return CplcUtility(q, s, A, B, b)


def _check_plc_signs(u, where):
    if np.any(u.a < 0):
        raise InvariantError(f"{where}: piece coefficients must be >= 0")
    if np.any(u.beta < 0):
        raise InvariantError(f"{where}: piece offsets must be >= 0")


def parse_instance(data, require_unit_coefficients=False):
    """Parse and validate an instance.

    ``require_unit_coefficients`` additionally demands every piece
    coefficient to be at most 1 (exchange markets solved over items).
    """
    doc = _load(data)
    model = _field(doc, "model", "instance")
    if model not in MODELS:
        raise SchemaError(f"instance.model: expected one of {MODELS}, "
                          f"got {model!r}")
    m = _count(_field(doc, "num_items", "instance"), "instance.num_items")
    agents = _field(doc, "agents", "instance")
    if not isinstance(agents, list) or not agents:
        raise SchemaError("instance.agents: expected a nonempty array")
    if model == "fisher":
        budgets, utils = [], []
        for i, ag in enumerate(agents):
            where = f"agents[{i}]"
            w = _number(_field(ag, "budget", where), f"{where}.budget")
            if w < 0:
                raise InvariantError(f"{where}.budget: must be >= 0")
            u = _cplc(_field(ag, "utility", where), f"{where}.utility", m)
            val = eval_utility(u, np.zeros(m))
            if not abs(val) <= TAU_FEAS:
                raise InvariantError(
                    f"{where}.utility: value at the empty bundle is {val}, "
                    f"expected 0")
            budgets.append(w)
            utils.append(u)
        return FisherMarket(budgets, utils, m)
    utils = []
    for i, ag in enumerate(agents):
        where = f"agents[{i}].utility"
        u = _plc(_field(ag, "utility", f"agents[{i}]"), where, m)
        _check_plc_signs(u, where)
        if require_unit_coefficients and np.any(u.a > 1.0):
            raise InvariantError(f"{where}: coefficients must be <= 1 "
                                 f"for the fixed-items exchange solver")
        utils.append(u)
    if model == "matching":
        if m < len(agents):
            raise InvariantError(
                f"matching needs num_items >= agents ({m} < {len(agents)})")
        return MatchingMarket(utils, m)
    endow = []
    for i, ag in enumerate(agents):
        where = f"agents[{i}].endowment"
        e = _vector(_field(ag, "endowment", f"agents[{i}]"), where, m)
        if np.any(e <= 0):
            raise InvariantError(f"{where}: every endowment must be > 0")
        endow.append(e)
    endow = np.vstack(endow)
    cols = endow.sum(axis=0)
    bad = np.flatnonzero(np.abs(cols - 1.0) > TAU_FEAS)
    if bad.size:
        raise InvariantError(
            f"endowments of item {int(bad[0])} sum to {cols[bad[0]]:g}, "
            f"expected 1")
    return AdMarket(utils, endow, m)


def _plc_json(u: PlcUtility):
    return {"kind": "plc",
            "pieces": [{"a": a.tolist(), "b": float(b)}
                       for a, b in zip(u.a, u.beta)]}


def _cplc_json(u: CplcUtility):
    return {"kind": "cplc", "q": u.q.tolist(), "s": u.s.tolist(),
            "A": u.A.tolist(), "B": u.B.tolist(), "b": u.b.tolist()}


def instance_to_dict(market):
    if isinstance(market, FisherMarket):
        agents = [{"budget": float(w), "utility": _cplc_json(u)}
                  for w, u in zip(market.budgets, market.utilities)]
        model = "fisher"
    elif isinstance(market, MatchingMarket):
        agents = [{"utility": _plc_json(u)} for u in market.utilities]
        model = "matching"
    elif isinstance(market, AdMarket):
        agents = [{"endowment": e.tolist(), "utility": _plc_json(u)}
                  for e, u in zip(market.endowments, market.utilities)]
        model = "arrow_debreu"
    else:
        raise TypeError(f"not a market: {type(market).__name__}")
    return {"model": model, "num_items": market.n_items, "agents": agents}


def serialize_instance(market) -> str:
    return json.dumps(instance_to_dict(market), indent=2)


def candidate_to_dict(c: EquilibriumCandidate, with_info=True):
    out = {"x": c.x.tolist(), "p": c.p.tolist(), "sigma": float(c.sigma),
           "lambda": float(c.lam), "thrifty": bool(c.thrifty)}
    if with_info and c.info:
        out["info"] = c.info
    return out


def serialize_candidate(c: EquilibriumCandidate) -> str:
    return json.dumps(candidate_to_dict(c), indent=2)


def parse_candidate(data) -> EquilibriumCandidate:
    doc = _load(data)
    p = _vector(_field(doc, "p", "candidate"), "candidate.p")
    x = _matrix(_field(doc, "x", "candidate"), "candidate.x", p.size)
    sigma = _number(_field(doc, "sigma", "candidate"), "candidate.sigma")
    lam = _number(_field(doc, "lambda", "candidate"), "candidate.lambda")
    thrifty = _field(doc, "thrifty", "candidate")
    if not isinstance(thrifty, bool):
        raise SchemaError("candidate.thrifty: expected true or false")
    info = doc.get("info", {})
    return EquilibriumCandidate(x, p, sigma, lam, thrifty, info=info)


def markets_equal(a, b) -> bool:
    """Structural equality of two parsed markets."""
    da, db = instance_to_dict(a), instance_to_dict(b)
    return da == db
