import itertools
import json
from fractions import Fraction

import pytest
from hypothesis import given

from helpers import factory, factory_doc, models
from opaque_plan.graphs import Digraph
from opaque_plan.ltl import lasso
from opaque_plan.model import (
    ModelError,
    Plan,
    check_plan,
    cycle_states,
    from_document,
    load,
    observation,
    path_cost,
    plan_costs,
    reach,
    to_document,
    trace,
)

T = factory()


def test_fixture_loads():
    assert T.states == ("A", "B", "C", "D", "E", "F")
    assert T.initial == {"A", "B"} and T.secret == {"A"}
    assert T.labels["F"] == {"P1"} and T.labels["E"] == {"P2"}
    assert all(not T.labels[s] for s in "ABCD")
    assert {s for s in T.states if T.outputs[s] == "Sand"} == set("ABCF")
    assert {s for s in T.states if T.outputs[s] == "Grass"} == set("DE")
    # bidirectional: six listed edges become twelve
    assert len(T.weights) == 12 and T.weights["D", "A"] == 3


def test_load_accepts_text_and_path(tmp_path):
    text = json.dumps(to_document(T))
    assert load(text).weights == T.weights
    f = tmp_path / "m.json"
    f.write_text(text)
    assert load(f).states == T.states
    assert load(str(f)).secret == T.secret


def _doc(**changes):
    doc = factory_doc()
    doc.update(changes)
    return doc


def test_rejects_zero_weight():
    doc = _doc()
    doc["transitions"][0]["weight"] = 0
    with pytest.raises(ModelError, match="weight <= 0"):
        from_document(doc)


def test_rejects_secret_outside_initial():
    with pytest.raises(ModelError, match="not initial"):
        from_document(_doc(secret=["C"]))


@pytest.mark.parametrize(
    "changes, match",
    [
        ({"initial": ["Z"]}, "unknown state 'Z' at initial/0"),
        ({"states": [{"name": "A", "output": "x"}, {"name": "A", "output": "x"}], "transitions": [], "initial": [], "secret": []}, "duplicate state"),
        ({"transitions": [{"from": "A", "to": "C"}]}, "schema violation at transitions/0"),
        ({"extra": 1}, "schema violation"),
    ],
)
def test_rejects_bad_documents(changes, match):
    with pytest.raises(ModelError, match=match):
        from_document(_doc(**changes))


def test_rejects_conflicting_bidirectional_weights():
    doc = _doc()
    doc["transitions"].append({"from": "C", "to": "A", "weight": 5})
    with pytest.raises(ModelError, match="conflicting"):
        from_document(doc)


def test_decode_errors_report_position(tmp_path):
    f = tmp_path / "bad.json"
    f.write_text('{"states": [\n  oops]}')
    with pytest.raises(ModelError, match=r"bad.json:2:3"):
        load(f)


def test_fractional_weights_stay_exact():
    doc = _doc()
    doc["transitions"][0]["weight"] = Fraction(1, 3)
    t = from_document(doc)
    assert path_cost(t, ["A", "C", "A"]) == Fraction(2, 3)


def test_path_cost():
    assert path_cost(T, ["A"]) == 0
    assert path_cost(T, ["A", "D", "F"]) == 4
    assert path_cost(T, ["F", "E", "F"]) == 2
    with pytest.raises(ModelError):
        path_cost(T, ["A", "E"])


def test_plan_costs_and_validity():
    p = Plan(("A", "D"), ("F", "E"))
    assert plan_costs(T, p) == (4, 2)
    assert plan_costs(T, Plan((), ("F", "E"))) == (0, 2)
    with pytest.raises(ModelError):
        check_plan(T, Plan(("A",), ("F", "E")))
    with pytest.raises(ValueError):
        Plan(("A",), ())


def test_plan_canonical_form():
    assert Plan(("A", "D", "F", "E"), ("F", "E")).canonical() == Plan(("A", "D"), ("F", "E"))
    assert Plan(("A", "D"), ("F", "E", "F", "E")).canonical() == Plan(("A", "D"), ("F", "E"))
    assert Plan(("F",), ("E", "F")).canonical() == Plan((), ("F", "E"))
    assert str(Plan(("A", "D"), ("F", "E"))) == "AD(FE)^w"


def test_trace_and_observation():
    p = Plan(("A", "D"), ("F", "E"))
    assert trace(T, p) == lasso([set(), set()], [{"P1"}, {"P2"}])
    assert observation(T, ["A", "D", "F"]) == ["Sand", "Grass", "Sand"]
    assert observation(T, ["A", "D", "F", "E"]) == observation(T, ["B", "D", "F", "E"])
    assert observation(T, ["C"]) == ["Sand"]
    assert trace(T, ["F", "E"]) == [{"P1"}, {"P2"}]


def test_reach_examples():
    assert reach(T, []) == set()
    assert reach(T, ["B"]) == set(T.states)
    assert reach(T, T.states) == set(T.states)


def test_cycle_states_examples():
    g = Digraph()
    for n in "abc":
        g.add_node(n)
    g.add_edge(0, 1, 1)
    g.add_edge(1, 2, 1)
    assert cycle_states(g) == set()
    g.add_edge(2, 2, 1)
    assert cycle_states(g) == {"c"}
    assert {"E", "F"} <= cycle_states(T)


@given(models())
def test_reach_closure_properties(t):
    for s in t.states:
        r = reach(t, [s])
        assert s in r and reach(t, r) == r
        for u in r:
            assert set(t.succ[u]) <= r


def _brute_cycle_states(t):
    out = set()
    for s in t.states:
        frontier = set(t.succ[s])
        seen = set()
        while frontier:
            if s in frontier:
                out.add(s)
                break
            seen |= frontier
            frontier = {v for u in frontier for v in t.succ[u]} - seen
    return out


@given(models(max_states=6))
def test_cycle_states_match_brute_force(t):
    assert cycle_states(t) == _brute_cycle_states(t)


@given(models())
def test_path_cost_is_additive(t):
    for u, v in itertools.islice(t.weights, 4):
        for x in t.succ[v][:2]:
            p = [u, v, x]
            assert path_cost(t, p) == path_cost(t, p[:2]) + path_cost(t, p[1:])


@given(models())
def test_document_round_trip(t):
    t2 = from_document(json.loads(json.dumps(to_document(t)), parse_float=Fraction))
    assert t2.states == t.states and t2.weights == t.weights
    assert t2.labels == t.labels and t2.outputs == t.outputs
    assert t2.initial == t.initial and t2.secret == t.secret
