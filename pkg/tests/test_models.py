"""Tree models, denotational and game evaluation, verification checking."""

import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from mu_forge.models import (
    GameResult, Verification, check_verification, denote, eval_game,
    make_model, model_from_json, model_to_json, random_model,
)
from mu_forge.syntax import (
    negate, parse_formula, random_formula, show, substitute, unfold, var,
)


def P(text):
    return parse_formula(text)


CHAIN3 = make_model("v0", [
    ("v0", (), ("v1",)),
    ("v1", (), ("v2",)),
    ("v2", ("p",), ()),
])
SINGLE = make_model("r", [("r", ("p",), ())])


# ---------------------------------------------------------------- model

def test_model_validation():
    with pytest.raises(ValueError, match="root"):
        make_model("x", [("a", (), ())])
    with pytest.raises(ValueError, match="tree"):
        make_model("a", [("a", (), ("b", "b")), ("b", (), ())])
    with pytest.raises(ValueError, match="tree"):
        make_model("a", [("a", (), ()), ("b", (), ())])
    with pytest.raises(ValueError, match="unknown child"):
        make_model("a", [("a", (), ("zz",))])


def test_model_json_round_trip():
    doc = model_to_json(CHAIN3)
    assert model_from_json(doc) == CHAIN3
    assert model_from_json(json.dumps(doc)) == CHAIN3
    assert doc["root"] == "v0"


def test_random_model_examples():
    m = random_model(0, 1, ("p",))
    assert len(m) == 1 and m.label(m.root) <= {"p"}
    assert random_model(7, 30, ("p", "q")) == random_model(7, 30, ("p", "q"))
    for s in range(20):
        assert len(random_model(s, 50, ("p", "q"))) <= 50


# --------------------------------------------------------------- denote

def test_denote_examples():
    assert denote(P("nu x. []x"), CHAIN3) == frozenset(("v0", "v1", "v2"))
    assert denote(P("mu x. <>x"), CHAIN3) == frozenset()
    m = make_model("v0", [("v0", (), ("v1",)), ("v1", ("p",), ())])
    assert denote(P("<>p"), m) == frozenset(("v0",))
    assert denote(P("p | ~p"), SINGLE) == frozenset(("r",))
    assert denote(P("[]F"), CHAIN3) == frozenset(("v2",))


def test_denote_free_variables_from_labels():
    assert denote(var("p"), CHAIN3) == frozenset(("v2",))
    assert denote(P("~p"), CHAIN3) == frozenset(("v0", "v1"))


def test_denote_reach_along_chain():
    f = P("mu x. (p | <>x)")
    assert denote(f, CHAIN3) == frozenset(("v0", "v1", "v2"))
    g = P("mu x. (q | <>x)")
    assert denote(g, CHAIN3) == frozenset()


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_negation_duality(seed):
    rng = random.Random(seed)
    f = random_formula(rng, 3, ("p", "q"))
    m = random_model(rng.randrange(10 ** 9), 14, ("p", "q"))
    assert denote(negate(f), m) == frozenset(m.ids) - denote(f, m)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_fixpoint_law(seed):
    rng = random.Random(seed)
    f = random_formula(rng, 3, ("p", "q"))
    if f.tag not in (P("mu x. x").tag, P("nu x. x").tag):
        return
    m = random_model(rng.randrange(10 ** 9), 12, ("p", "q"))
    assert denote(f, m) == denote(unfold(f), m)


def test_monotonicity_of_predicates():
    """Evaluating a positive body at a larger vertex set gives a larger
    result; realized through substitution of stronger/weaker tests."""
    from mu_forge.syntax import free_names, neg_var, walk
    rng = random.Random(3)
    checked = 0
    while checked < 60:
        body = random_formula(rng, 2, ("u", "q"))
        if "u" not in free_names(body) or \
                any(g is neg_var("u") for g in walk(body)):
            continue
        checked += 1
        m = random_model(rng.randrange(10 ** 9), 12, ("q", "p1", "p2"))
        small = P("p1 & p2")
        large = P("p1 | p2")
        lo = denote(substitute(body, {"u": small}), m)
        hi = denote(substitute(body, {"u": large}), m)
        assert lo <= hi, show(body)


# -------------------------------------------------------------- the game

def test_eval_game_examples():
    r = eval_game(P("nu x. <>x"), SINGLE)
    assert r.holds is False
    assert r.subject is P("mu x. []x")
    assert check_verification(r.strategy, r.subject, SINGLE)

    r2 = eval_game(P("mu x. (p | <>x)"), CHAIN3)
    assert r2.holds is True
    assert check_verification(r2.strategy, P("mu x. (p | <>x)"), CHAIN3)

    assert eval_game(P("p | ~p"), SINGLE).holds
    assert eval_game(P("p | ~p"), CHAIN3).holds


def test_eval_game_unguarded_fixpoints():
    assert eval_game(P("nu x. x"), SINGLE).holds
    assert not eval_game(P("mu x. x"), SINGLE).holds
    r = eval_game(P("mu x. x"), SINGLE)
    assert check_verification(r.strategy, r.subject, SINGLE)


@settings(max_examples=400, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_fst_agreement_random(seed):
    rng = random.Random(seed)
    f = random_formula(rng, 3, ("p", "q"))
    m = random_model(rng.randrange(10 ** 9), 12, ("p", "q"))
    g = eval_game(f, m)
    assert g.holds == (m.root in denote(f, m))
    assert check_verification(g.strategy, g.subject, m)


# -------------------------------------------------------- check_verification

def test_check_verification_root_mismatch():
    r = eval_game(P("p | ~p"), SINGLE)
    assert not check_verification(r.strategy, P("p & ~p"), SINGLE)


def test_check_verification_rejects_mu_cycle():
    m = make_model("a", [("a", (), ())])
    f = P("mu x. (p | x)")
    u = unfold(f)
    nd1, nd2 = (f, "a"), (u, "a")
    v = Verification(subject=f, root=nd1,
                     edges=((nd1, (nd2,)), (nd2, (nd1,))),
                     priorities=((nd1, 3), (nd2, 6)))
    verdict = check_verification(v, f, m)
    assert not verdict and "least fixpoint" in verdict.reason


def test_check_verification_accepts_nu_cycle():
    m = make_model("a", [("a", (), ())])
    g = P("nu x. (p | x)")
    u = unfold(g)
    nd1, nd2 = (g, "a"), (u, "a")
    v = Verification(subject=g, root=nd1,
                     edges=((nd1, (nd2,)), (nd2, (nd1,))),
                     priorities=((nd1, 2), (nd2, 6)))
    assert check_verification(v, g, m)


def test_check_verification_dangling_conjunct():
    f = P("p & q")
    m = make_model("a", [("a", ("p", "q"), ())])
    nd = (f, "a")
    ndp = (var("p"), "a")
    v = Verification(subject=f, root=nd,
                     edges=((nd, (ndp,)), (ndp, ())),
                     priorities=((nd, 4), (ndp, 4)))
    verdict = check_verification(v, f, m)
    assert not verdict and "conjunct" in verdict.reason


def test_check_verification_false_literal():
    f = P("p")
    m = make_model("a", [("a", (), ())])
    nd = (f, "a")
    v = Verification(subject=f, root=nd, edges=((nd, ()),),
                     priorities=((nd, 4),))
    verdict = check_verification(v, f, m)
    assert not verdict and "literal" in verdict.reason


def test_round_trip_verification_strategies():
    rng = random.Random(11)
    for _ in range(150):
        f = random_formula(rng, 3, ("p", "q"))
        m = random_model(rng.randrange(10 ** 9), 10, ("p", "q"))
        r = eval_game(f, m)
        assert check_verification(r.strategy, r.subject, m)
