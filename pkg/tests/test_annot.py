"""Tests for names, the KB order, restriction, and linear decomposition."""

import itertools
import random

import pytest

from mu_forge.annot import (
    ann_le,
    ann_less,
    covered,
    kb_less,
    kb_strict,
    linear_decompose,
    next_name,
    restrict,
    restrict_formula,
)
from mu_forge.syntax import (
    MU,
    NU,
    box,
    conj,
    dia,
    disj,
    mu_db,
    nu_db,
    plain,
    var,
)


def subsequences(c):
    out = []
    for r in range(len(c) + 1):
        out.extend(itertools.combinations(c, r))
    return out


# --- KB order ----------------------------------------------------------------


def test_kb_prefix_clause():
    assert kb_less((0, 1), (0,), (0, 1))
    assert not kb_less((0,), (0, 1), (0, 1))


def test_kb_left_clause():
    assert kb_less((0,), (1,), (0, 1))
    assert not kb_less((1,), (0,), (0, 1))


def test_kb_epsilon_maximal():
    c = (0, 1, 2, 3)
    for a in subsequences(c):
        assert kb_less(a, (), c)
        if a:
            assert not kb_less((), a, c)


def test_kb_rejects_bad_input():
    with pytest.raises(ValueError):
        kb_less((1, 0), (), (0, 1))
    with pytest.raises(ValueError):
        kb_less((), (2,), (0, 1))
    with pytest.raises(ValueError):
        kb_less((), (), (0, 0))


def test_kb_well_order_exhaustive():
    # Totality, antisymmetry, and transitivity on subsequences of every
    # control of length at most 5; on a finite carrier this is a well-order.
    for k in range(6):
        c = tuple(range(k))
        ss = subsequences(c)
        for a in ss:
            assert kb_less(a, a, c)
            for b in ss:
                if a != b:
                    assert kb_less(a, b, c) != kb_less(b, a, c)
                for d in ss:
                    if kb_less(a, b, c) and kb_less(b, d, c):
                        assert kb_less(a, d, c)


def test_kb_monotone_in_control():
    # Extending the control preserves every comparison.
    d = (0, 1, 2, 3, 4)
    for cbits in range(32):
        c = tuple(n for i, n in enumerate(d) if cbits >> i & 1)
        ss = subsequences(c)
        for a in ss:
            for b in ss:
                if kb_less(a, b, c):
                    assert kb_less(a, b, d)


# --- names, covered, restriction ----------------------------------------------


def test_next_name():
    assert next_name() == 0
    assert next_name((), ()) == 0
    assert next_name((0, 3), (1,)) == 4


def test_covered():
    f = nu_db(box(var(0)), (0, 1))
    assert covered(0, [f])
    assert not covered(1, [f])  # final in its annotation
    assert not covered(2, [f])  # absent
    g = mu_db(dia(var(0)), (0,))
    assert not covered(0, [f, g])  # final occurrence in g spoils coverage


def test_restrict_formula():
    f = nu_db(box(var(0)), (0, 1))
    assert restrict_formula(f, (0,)) == nu_db(box(var(0)), (0,))
    assert restrict_formula(f, (1,)) == nu_db(box(var(0)), (1,))
    assert restrict_formula(f, ()) == plain(f)
    assert restrict_formula(f, (0, 1)) is f


class Stub:
    def __init__(self, control, ante, succ):
        self.control = control
        self.ante = ante
        self.succ = succ


def test_restrict_sequent():
    f = nu_db(box(var(0)), (0, 1))
    s = Stub((0, 1), (f,), ())
    r = restrict(s, (0,))
    assert r.control == (0,)
    assert r.ante == (nu_db(box(var(0)), (0,)),)
    full = restrict(s, (0, 1))
    assert full.control == (0, 1) and full.ante == (f,)
    empty = restrict(s, ())
    assert empty.control == () and empty.ante == (plain(f),)


# --- linear decomposition ------------------------------------------------------


def outer_inner(a, b):
    # nu^a x.(<>x \/ nu^b y.[]y)
    inner = nu_db(box(var(0)), b)
    return nu_db(disj((dia(var(0)), inner)), a)


def test_decompose_plain():
    f = plain(outer_inner((0,), (1,)))
    d = linear_decompose(f, NU)
    assert d is not None and len(d) == 0 and d.base is f
    assert linear_decompose(f, MU) is not None


def test_decompose_nested_all_annotations():
    for a in ((), (0,), (0, 2)):
        for b in ((), (1,), (1, 3)):
            d = linear_decompose(outer_inner(a, b), NU)
            assert d is not None
            expect = tuple(x for x in (a, b) if x)
            assert d.annotations() == expect


def test_decompose_shapes():
    d = linear_decompose(outer_inner((0,), (1,)), NU)
    assert d.base == var(0)
    body0, a0 = d.parts[0]
    body1, a1 = d.parts[1]
    assert a0 == (0,) and a1 == (1,)
    assert body0 == disj((dia(var(0)), var(1)))  # index 1 is the hole
    assert body1 == box(var(0))


def test_decompose_rejects_captured_link():
    # mu^a x.(<>x \/ mu^b y.[](x /\ y)) is linear only when b is trivial:
    # the inner quantifier reaches the outer variable, so it cannot be
    # substituted in from outside.
    def build(a, b):
        inner = mu_db(box(conj((var(1), var(0)))), b)
        return mu_db(disj((dia(var(0)), inner)), a)

    assert linear_decompose(build((0,), ()), MU) is not None
    assert linear_decompose(build((0,), (1,)), MU) is None
    assert linear_decompose(build((), (1,)), MU) is None


def test_decompose_rejects_incomparable_tops():
    # /\{nu^a x.[]x, nu^b y.<>y} is linear iff a or b is trivial.
    def build(a, b):
        return conj((nu_db(box(var(0)), a), nu_db(dia(var(0)), b)))

    assert linear_decompose(build((0,), (1,)), NU) is None
    assert linear_decompose(build((0,), ()), NU) is not None
    assert linear_decompose(build((), (1,)), NU) is not None
    assert linear_decompose(build((), ()), NU) is not None


def test_decompose_rejects_name_overlap_and_wrong_sign():
    assert linear_decompose(outer_inner((0,), (0, 1)), NU) is None
    assert linear_decompose(outer_inner((0,), (1,)), MU) is None
    assert linear_decompose(outer_inner((0,), (1,)), "nu") is not None


def test_decompose_duplicated_hole():
    # The same link may fill several holes of the base.
    link = nu_db(box(var(0)), (0,))
    f = conj((dia(link), box(link)))
    d = linear_decompose(f, NU)
    assert d is not None
    assert d.base == conj((dia(var(0)), box(var(0))))
    assert d.annotations() == ((0,),)


# --- the lifted order ----------------------------------------------------------


def test_ann_less_substitution_example():
    # For nontrivial annotations throughout, (nu^a phi)[nu^b psi] <_c
    # (nu^a' phi)[nu^b' psi] iff b <_c b', or b = b' and a <_c a': the
    # innermost annotation decides first.
    c = (0, 1, 2, 3)
    pool = ((0,), (1,), (0, 1), (2,), (0, 2), (1, 3))
    for a, b, a2, b2 in itertools.product(pool, repeat=4):
        if set(a) & set(b) or set(a2) & set(b2):
            continue
        x = outer_inner(a, b)
        y = outer_inner(a2, b2)
        expect = kb_strict(b, b2, c) or (b == b2 and kb_strict(a, a2, c))
        assert ann_less(x, y, c) == expect, (a, b, a2, b2)
        assert ann_le(x, y, c) == (expect or x is y)


def test_ann_less_shape_mismatch_incomparable():
    # Dropping an annotation to the trivial one changes the decomposition
    # shape (the quantifier joins the plain skeleton), so annotated and
    # plain variants of the same skeleton never compare.
    c = (0, 1)
    for x, y in itertools.combinations(
        (outer_inner((), ()), outer_inner((0,), ()), outer_inner((), (0,))), 2
    ):
        assert not ann_less(x, y, c) and not ann_less(y, x, c)


def test_ann_less_requires_matching_shape():
    c = (0, 1)
    x = outer_inner((0,), ())
    y = nu_db(dia(var(0)), (0,))
    assert not ann_less(x, y, c)
    assert not ann_less(y, x, c)
    assert not ann_less(x, x, c)


def test_antichain_bound_constant_over_growing_controls():
    # For a fixed plain skeleton the linearly annotated variants split into
    # finitely many shapes (which quantifiers carry a nontrivial
    # annotation); variants of equal shape are totally ordered and variants
    # of distinct shape are incomparable, so the maximal antichain is the
    # shape count, independent of how large the control grows.
    rng = random.Random(7)
    counts = []
    for size in (2, 3, 4, 6):
        c = tuple(rng.sample(range(10), size))
        variants = []
        for a in subsequences(c):
            for b in subsequences(c):
                f = outer_inner(a, b)
                d = linear_decompose(f, NU)
                if d is not None:
                    variants.append((f, d))
        shapes = {(d.base, tuple(p for p, _ in d.parts)) for _, d in variants}
        counts.append(len(shapes))
        for (x, dx), (y, dy) in itertools.combinations(variants, 2):
            same_shape = dx.base is dy.base and [p for p, _ in dx.parts] == [
                p for p, _ in dy.parts
            ]
            comparable = ann_less(x, y, c) or ann_less(y, x, c) or x is y
            assert comparable == same_shape
    assert len(set(counts)) == 1 and counts[0] == 4
