import json

import numpy as np
import pytest

from marketeq.errors import InvariantError, SchemaError
from marketeq.io import (candidate_to_dict, instance_to_dict, markets_equal,
                         parse_candidate, parse_instance, serialize_candidate,
                         serialize_instance)
from marketeq.model import (AdMarket, EquilibriumCandidate, FisherMarket,
                            MatchingMarket, eval_utility)
from marketeq.verify import _load_fixture_json, nonconvexity_fixture
from instances import random_fisher, two_linear_exchange

MINIMAL = {"model": "fisher", "num_items": 1,
           "agents": [{"budget": 1, "utility": {"kind": "plc",
                                                "pieces": [{"a": [1],
                                                            "b": 0}]}}]}


def with_(doc, path, value):
    doc = json.loads(json.dumps(doc))
    node = doc
    for key in path[:-1]:
        node = node[key]
    node[path[-1]] = value
    return doc


def exchange(endow, a=((0.5, 0.5), (0.5, 0.5))):
    return {"model": "arrow_debreu", "num_items": 2,
            "agents": [{"endowment": e,
                        "utility": {"kind": "plc",
                                    "pieces": [{"a": list(r), "b": 0}]}}
                       for e, r in zip(endow, a)]}


def test_minimal_fisher():
    mk = parse_instance(json.dumps(MINIMAL).encode())
    assert isinstance(mk, FisherMarket)
    assert mk.budgets == pytest.approx([1])
    assert eval_utility(mk.utilities[0], [0.5]) == pytest.approx(0.5)


def test_fixture_market():
    mm = parse_instance(_load_fixture_json()["instance"])
    assert isinstance(mm, MatchingMarket)
    assert (mm.n_agents, mm.n_items) == (3, 3)


def test_cplc_utility():
    doc = {"model": "fisher", "num_items": 2, "agents": [
        {"budget": 2, "utility": {"kind": "cplc", "q": [0, 0], "s": [1],
                                  "A": [[-1, 0], [0, -1]], "B": [[1], [1]],
                                  "b": [0, 0]}}]}
    u = parse_instance(doc).utilities[0]
    assert eval_utility(u, [0.3, 0.7]) == pytest.approx(0.3)


def test_exchange():
    ad = parse_instance(exchange([[0.5, 0.5], [0.5, 0.5]]))
    assert isinstance(ad, AdMarket) and ad.endowments.shape == (2, 2)


@pytest.mark.parametrize("doc, where", [
    (with_(MINIMAL, ["model"], "auction"), "instance.model"),
    (with_(MINIMAL, ["num_items"], 0), "instance.num_items"),
    (with_(MINIMAL, ["num_items"], True), "instance.num_items"),
    (with_(MINIMAL, ["agents"], []), "instance.agents"),
    (with_(MINIMAL, ["agents", 0, "budget"], "1"), "agents[0].budget"),
    (with_(MINIMAL, ["agents", 0, "utility", "kind"], "cobb"),
     "agents[0].utility.kind"),
    (with_(MINIMAL, ["agents", 0, "utility", "pieces", 0, "a"], [1, 2]),
     "agents[0].utility.pieces[0].a"),
    ({"num_items": 1, "agents": []}, "missing field 'model'"),
])
def test_schema_errors_name_the_field(doc, where):
    with pytest.raises(SchemaError, match=where.replace("[", r"\[")
                       .replace("]", r"\]").replace(".", r"\.")):
        parse_instance(doc)


def test_malformed_text():
    with pytest.raises(SchemaError, match="invalid JSON"):
        parse_instance("{")
    with pytest.raises(SchemaError, match="UTF-8"):
        parse_instance(b"\xff\xfe")


@pytest.mark.parametrize("doc, match", [
    (with_(MINIMAL, ["agents", 0, "budget"], -1), "budget"),
    (with_(MINIMAL, ["agents", 0, "utility", "pieces", 0, "b"], 1),
     "empty bundle"),
    (exchange([[0.0, 0.5], [1.0, 0.5]]), "endowment"),
    (exchange([[0.5, 0.5], [0.4, 0.5]]), "sum to"),
    (exchange([[0.5, 0.5], [0.5, 0.5]], ((-1, 1), (1, 1))), ">= 0"),
    ({"model": "matching", "num_items": 1, "agents": [
        {"utility": {"kind": "linear_matching", "a": [1]}}] * 2}, "num_items"),
])
def test_invariant_errors(doc, match):
    with pytest.raises(InvariantError, match=match):
        parse_instance(doc)


def test_unit_coefficient_requirement():
    doc = exchange([[0.5, 0.5], [0.5, 0.5]], ((2, 0), (1, 1)))
    parse_instance(doc)
    with pytest.raises(InvariantError, match="<= 1"):
        parse_instance(doc, require_unit_coefficients=True)


def test_round_trip():
    rng = np.random.default_rng(0)
    markets = [random_fisher(rng, 3, 2) for _ in range(5)]
    markets += [nonconvexity_fixture().market, two_linear_exchange()]
    for mk in markets:
        back = parse_instance(serialize_instance(mk))
        assert markets_equal(mk, back)
        assert instance_to_dict(back) == instance_to_dict(mk)


def test_candidate_round_trip():
    c = EquilibriumCandidate([[0.25, 0.75]], [0.5, 0.5], 0.1, 0.2, True,
                             info={"delta": 0.01})
    back = parse_candidate(serialize_candidate(c))
    assert np.array_equal(back.x, c.x) and np.array_equal(back.p, c.p)
    assert (back.sigma, back.lam, back.thrifty) == (0.1, 0.2, True)
    assert back.info == {"delta": 0.01}
    assert "info" not in candidate_to_dict(c, with_info=False)


def test_candidate_errors():
    good = {"x": [[1]], "p": [1], "sigma": 0, "lambda": 0, "thrifty": False}
    with pytest.raises(SchemaError, match="candidate.thrifty"):
        parse_candidate(dict(good, thrifty=1))
    with pytest.raises(SchemaError, match=r"candidate\.x\[0\]"):
        parse_candidate(dict(good, x=[[1, 2]]))
    with pytest.raises(SchemaError, match="lambda"):
        parse_candidate({k: v for k, v in good.items() if k != "lambda"})
