import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import SUITE_FORMULAS, factory, factory_doc, models, random_model
from opaque_plan.ltl import parse
from opaque_plan.model import Plan, check_plan, from_document, observation
from opaque_plan.oracle import (
    OracleLimit,
    SecurityVerdict,
    brute_force_plan,
    is_secure,
    lasso_candidates,
    satisfies,
    verify,
)
from opaque_plan.planner import plan

T = factory()
PHI = parse("GF P1 && GF P2")
AD = Plan(("A", "D"), ("F", "E"))
AC = Plan(("A", "C"), ("F", "E"))


def test_fixture_security_verdicts():
    assert is_secure(T, AD) == SecurityVerdict(True, Plan(("B", "D"), ("F", "E")))
    assert is_secure(T, AC) == SecurityVerdict(False)


def test_public_start_is_its_own_witness():
    p = Plan(("B", "D"), ("F", "E"))
    assert is_secure(T, p) == SecurityVerdict(True, p)


def test_verdict_invariant():
    with pytest.raises(ValueError):
        SecurityVerdict(True)
    with pytest.raises(ValueError):
        SecurityVerdict(False, AD)


def test_satisfies_examples():
    assert satisfies(T, AD, PHI)
    doc = factory_doc()
    doc["transitions"].append({"from": "D", "to": "D", "weight": 1})
    t = from_document(doc)
    assert not satisfies(t, Plan(("A",), ("D",)), PHI)
    assert satisfies(T, AC, parse("true"))


def test_verify_document():
    assert verify(T, AD, PHI) == {
        "initial": "A",
        "secure": True,
        "satisfies": True,
        "witness_prefix": ["B", "D"],
        "witness_cycle": ["F", "E"],
    }
    assert verify(T, AC, PHI) == {"initial": "A", "secure": False, "satisfies": True}


def test_brute_force_on_fixture():
    r = plan(T, PHI, "A")
    for prune in (True, False):
        bf = brute_force_plan(T, PHI, "A", 4, 4, prune=prune)
        assert bf.plan == AD == r.plan and bf.cost == r.cost == 3


def test_brute_force_finds_nothing_without_a_d():
    t = factory(("A", "D"))
    assert brute_force_plan(t, PHI, "A", 6, 6) is None
    assert brute_force_plan(t, PHI, "A", 6, 6, prune=False) is None


def test_brute_force_dead_end_start():
    doc = {
        "states": [{"name": "x", "output": "o"}, {"name": "y", "output": "o"}],
        "initial": ["x"],
        "transitions": [{"from": "y", "to": "y", "weight": 1}],
    }
    assert brute_force_plan(from_document(doc), parse("true"), "x", 3, 3) is None


def test_brute_force_guards():
    with pytest.raises(ValueError):
        brute_force_plan(T, PHI, "A", 2, 0)
    with pytest.raises(ValueError):
        brute_force_plan(T, PHI, "C", 2, 2)
    with pytest.raises(OracleLimit):
        brute_force_plan(T, PHI, "A", 8, 8, prune=False, ceiling=1000)


# -- cross-checks ---------------------------------------------------------------


def consistent_sets_never_empty(t, p: Plan) -> bool:
    """Security by subset tracking: keep the set of non-secret-start states
    consistent with the observations so far; an infinite witness exists iff
    the set never empties (finite branching)."""
    if p.start not in t.secret:
        return True
    H = t.outputs
    seq = p.prefix + p.cycle
    k, n = len(p.prefix), len(seq)
    cur = frozenset(w for w in t.initial - t.secret if H[w] == H[seq[0]])
    pos = 0
    seen = set()
    while cur and (cur, pos) not in seen:
        seen.add((cur, pos))
        pos = pos + 1 if pos + 1 < n else k
        cur = frozenset(v for u in cur for v in t.succ[u] if H[v] == H[seq[pos]])
    return bool(cur)


def _small_plans(t, limit=40):
    for q0 in sorted(t.initial):
        yield from itertools.islice(lasso_candidates(t, q0, 2, 2), limit)


def _unrolled(p, n):
    out = list(p.prefix)
    while len(out) < n:
        out.extend(p.cycle)
    return out[:n]


@settings(max_examples=80, deadline=None)
@given(models(max_states=5))
def test_is_secure_matches_subset_tracking(t):
    for p in _small_plans(t):
        v = is_secure(t, p)
        assert v.secure == consistent_sets_never_empty(t, p)
        if v.secure:
            w = v.witness
            check_plan(t, w)
            assert w.start in t.initial and w.start not in t.secret
            n = 2 * (len(p.prefix) + len(w.prefix)) + 2 * len(p.cycle) * len(w.cycle)
            assert observation(t, _unrolled(p, n)) == observation(t, _unrolled(w, n))


@settings(max_examples=60, deadline=None)
@given(models(max_states=5))
def test_is_secure_ignores_rotation(t):
    for p in _small_plans(t, 20):
        rotated = Plan(p.prefix + p.cycle[:1], p.cycle[1:] + p.cycle[:1])
        assert is_secure(t, p).secure == is_secure(t, rotated).secure


@settings(max_examples=40, deadline=None)
@given(models(max_states=4), st.sampled_from(SUITE_FORMULAS))
def test_pruned_brute_force_matches_literal(t, text):
    f = parse(text)
    for q0 in sorted(t.initial):
        a = brute_force_plan(t, f, q0, 3, 3)
        b = brute_force_plan(t, f, q0, 3, 3, prune=False)
        assert (a is None) == (b is None)
        if a:
            assert (a.plan, a.cost) == (b.plan, b.cost)


def test_pruned_brute_force_is_stable_past_the_bound():
    # once the bound covers the product, raising it changes nothing
    rng = random.Random(3)
    f = parse("GF p && GF q")
    found = 0
    for _ in range(30):
        t = random_model(rng, max_states=4)
        for q0 in sorted(t.initial):
            a = brute_force_plan(t, f, q0, 12, 12)
            b = brute_force_plan(t, f, q0, 20, 20)
            found += a is not None
            assert (a and (a.plan, a.cost)) == (b and (b.plan, b.cost))
    assert found > 5
