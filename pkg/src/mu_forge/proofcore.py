"""Sequents, rule instances, derivations, and the shared trace machinery.

Sequents are pairs of formula sequences under a control annotation; every
annotation inside a formula must be a subsequence of the control.  Positions
are (side, index) pairs with side "L" or "R".  Left logical rules act on the
first antecedent formula and right logical rules on the last consequent
formula; exchange, weakening, and contraction are explicit proof nodes, so
the descendant relation used by traces is deterministic.

Rule catalogue (conclusion below, premises above):

* plain structural: eL, eR (move the first/last formula), cL, cR
  (duplicate it), wL (premise antecedent a suffix), wR (premise consequent
  a prefix), b (assumption, zero premises).
* macros: e, w, c match any permutation / sub-multiset / contraction of
  the conclusion and are elaborated positionally during tracing.
* left logical: andL, orL, muL, nuL, diaL; right logical: andR, orR, muR,
  nuR, boxR; axioms id, idL, idR.
* induction and cut: indL, indR, sindL, sindR, cut (split-context,
  shared-context, or single-consequent shapes).
* annotated: muL^n, nuR^n (extend the control with a fresh name), cw
  (drop unused names), awL, awR (drop the last name of one annotation
  occurrence), plus the template rules dup, cover^n, andL*, diaL*, boxR*.

Proof files are JSON objects {"root": id, "nodes": [{"id", "sequent":
{"control": [names], "ante": [strings], "succ": [strings]}, "rule":
{"name", "params"} or null, "children": [ids], "backedge": id?}]}.  A node
with null rule is a bud: with a backedge it points at its companion, which
must carry the identical sequent; without one it is an open assumption.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Dict, Optional

import networkx as nx

from .annot import ann_le, covered
from .syntax import (
    BOX,
    CONJ,
    DIA,
    DISJ,
    MU,
    NEGVAR,
    NU,
    VAR,
    Formula,
    box,
    conj,
    dia,
    disj,
    instantiate,
    is_literal,
    mu_db,
    negate,
    nu_db,
    parse_formula,
    show,
    show_name,
    var,
    walk,
)
from .util import ACCEPT, Verdict, is_subsequence, refuse

LEFT, RIGHT = "L", "R"


def _check_formula(f) -> Formula:
    if not isinstance(f, Formula):
        raise TypeError("sequent entries must be formulas")
    if f.loose:
        raise ValueError("sequent formulas must be closed: %s" % show(f))
    return f


@dataclass(frozen=True)
class Sequent:
    """An annotated sequent [control] ante |- succ."""

    control: tuple
    ante: tuple
    succ: tuple

    def __post_init__(self):
        object.__setattr__(self, "control", tuple(self.control))
        object.__setattr__(self, "ante", tuple(_check_formula(f) for f in self.ante))
        object.__setattr__(self, "succ", tuple(_check_formula(f) for f in self.succ))
        if len(set(self.control)) != len(self.control):
            raise ValueError("control repeats a name")
        for f in self.ante + self.succ:
            for g in walk(f):
                if g.ann and not is_subsequence(g.ann, self.control):
                    raise ValueError(
                        "annotation %s is not a subsequence of the control"
                        % (g.ann,)
                    )

    @property
    def intuitionistic(self) -> bool:
        return len(self.succ) <= 1

    def side(self, s: str) -> tuple:
        return self.ante if s == LEFT else self.succ

    def at(self, pos) -> Formula:
        s, i = pos
        return self.side(s)[i]

    def positions(self):
        for i in range(len(self.ante)):
            yield (LEFT, i)
        for i in range(len(self.succ)):
            yield (RIGHT, i)

    def replace(self, **kw) -> "Sequent":
        return Sequent(
            kw.get("control", self.control),
            kw.get("ante", self.ante),
            kw.get("succ", self.succ),
        )


def seq(ante=(), succ=(), control=()) -> Sequent:
    return Sequent(tuple(control), tuple(ante), tuple(succ))


def show_sequent(s: Sequent) -> str:
    parts = []
    if s.control:
        parts.append("[%s]" % ",".join(show_name(n) for n in s.control))
    left = ", ".join(show(f) for f in s.ante)
    right = ", ".join(show(f) for f in s.succ)
    body = "|-" if not right else "|- " + right
    parts.append((left + " " + body) if left else body)
    return " ".join(parts)


RULE_NAMES = frozenset(
    {
        "eL", "eR", "cL", "cR", "wL", "wR", "b", "e", "w", "c",
        "andL", "andR", "orL", "orR", "muL", "muR", "nuL", "nuR",
        "boxR", "diaL", "id", "idL", "idR",
        "indL", "indR", "sindL", "sindR", "cut",
        "muL^n", "nuR^n", "cw", "awL", "awR",
        "dup", "cover^n", "diaL*", "andL*", "boxR*",
    }
)


@dataclass(frozen=True)
class RuleInstance:
    name: str
    params: tuple = ()

    def __post_init__(self):
        if self.name not in RULE_NAMES:
            raise ValueError("unknown rule name: %r" % self.name)
        p = self.params
        if isinstance(p, dict):
            p = tuple(sorted(p.items()))
        object.__setattr__(self, "params", tuple(p))

    def get(self, key, default=None):
        for k, v in self.params:
            if k == key:
                return v
        return default


def rule(kind: str, **params) -> RuleInstance:
    return RuleInstance(kind, tuple(sorted(params.items())))


# --- local rule checking ------------------------------------------------------


def _same_controls(c: Sequent, ps) -> bool:
    return all(p.control == c.control for p in ps)


def _arity(ps, n) -> Optional[Verdict]:
    if len(ps) != n:
        return refuse("expected %d premises, got %d" % (n, len(ps)))
    return None


def _plain_quantifier(f: Formula, tag: int) -> bool:
    return f.tag == tag and not f.ann


def _unfold_self(f: Formula) -> Formula:
    return instantiate(f.children[0], f)


def _r_eL(c, r, ps):
    bad = _arity(ps, 1)
    if bad:
        return bad
    j = r.get("to")
    if not c.ante or j is None or not 0 <= j < len(c.ante):
        return refuse("eL needs a target position inside the antecedent")
    want = c.ante[1 : j + 1] + (c.ante[0],) + c.ante[j + 1 :]
    if ps[0].ante != want or ps[0].succ != c.succ or not _same_controls(c, ps):
        return refuse("eL premise must move the first antecedent formula to the target")
    return ACCEPT


def _r_eR(c, r, ps):
    bad = _arity(ps, 1)
    if bad:
        return bad
    j = r.get("to")
    if not c.succ or j is None or not 0 <= j < len(c.succ):
        return refuse("eR needs a target position inside the consequent")
    want = c.succ[:j] + (c.succ[-1],) + c.succ[j:-1]
    if ps[0].succ != want or ps[0].ante != c.ante or not _same_controls(c, ps):
        return refuse("eR premise must move the last consequent formula to the target")
    return ACCEPT


def _r_cL(c, r, ps):
    bad = _arity(ps, 1)
    if bad:
        return bad
    if not c.ante or ps[0].ante != (c.ante[0],) + c.ante or ps[0].succ != c.succ:
        return refuse("cL premise must duplicate the first antecedent formula")
    if not _same_controls(c, ps):
        return refuse("cL must preserve the control")
    return ACCEPT


def _r_cR(c, r, ps):
    bad = _arity(ps, 1)
    if bad:
        return bad
    if not c.succ or ps[0].succ != c.succ + (c.succ[-1],) or ps[0].ante != c.ante:
        return refuse("cR premise must duplicate the last consequent formula")
    if not _same_controls(c, ps):
        return refuse("cR must preserve the control")
    return ACCEPT


def _r_wL(c, r, ps):
    bad = _arity(ps, 1)
    if bad:
        return bad
    k = len(c.ante) - len(ps[0].ante)
    if k < 0 or ps[0].ante != c.ante[k:] or ps[0].succ != c.succ:
        return refuse("wL premise antecedent must be a suffix of the conclusion's")
    if not _same_controls(c, ps):
        return refuse("wL must preserve the control")
    return ACCEPT


def _r_wR(c, r, ps):
    bad = _arity(ps, 1)
    if bad:
        return bad
    k = len(ps[0].succ)
    if k > len(c.succ) or ps[0].succ != c.succ[:k] or ps[0].ante != c.ante:
        return refuse("wR premise consequent must be a prefix of the conclusion's")
    if not _same_controls(c, ps):
        return refuse("wR must preserve the control")
    return ACCEPT


def _r_b(c, r, ps):
    return _arity(ps, 0) or ACCEPT


def _multiset(fs):
    out = {}
    for f in fs:
        out[f] = out.get(f, 0) + 1
    return out


def _r_e(c, r, ps):
    bad = _arity(ps, 1)
    if bad:
        return bad
    p = ps[0]
    if (
        _multiset(p.ante) != _multiset(c.ante)
        or _multiset(p.succ) != _multiset(c.succ)
        or p.control != c.control
    ):
        return refuse("e premise must permute the conclusion")
    return ACCEPT


def _r_w(c, r, ps):
    bad = _arity(ps, 1)
    if bad:
        return bad
    p = ps[0]
    for pm, cm, side in ((_multiset(p.ante), _multiset(c.ante), "antecedent"),
                         (_multiset(p.succ), _multiset(c.succ), "consequent")):
        for f, n in pm.items():
            if n > cm.get(f, 0):
                return refuse("w premise exceeds the conclusion in the " + side)
    if p.control != c.control:
        return refuse("w must preserve the control")
    return ACCEPT


def _r_c(c, r, ps):
    bad = _arity(ps, 1)
    if bad:
        return bad
    p = ps[0]
    for pm, cm, side in ((_multiset(p.ante), _multiset(c.ante), "antecedent"),
                         (_multiset(p.succ), _multiset(c.succ), "consequent")):
        if set(pm) != set(cm) or any(pm[f] < cm[f] for f in cm):
            return refuse("c premise must contract onto the conclusion's " + side)
    if p.control != c.control:
        return refuse("c must preserve the control")
    return ACCEPT


def _r_andL(c, r, ps):
    bad = _arity(ps, 1)
    if bad:
        return bad
    if not c.ante or c.ante[0].tag != CONJ:
        return refuse("andL principal must be a conjunction at the first position")
    k = r.get("member")
    members = c.ante[0].children
    if k is None or not 0 <= k < len(members):
        return refuse("andL needs a member index into the conjunction")
    if ps[0].ante != (members[k],) + c.ante[1:] or ps[0].succ != c.succ:
        return refuse("andL premise must replace the conjunction by the chosen member")
    if not _same_controls(c, ps):
        return refuse("andL must preserve the control")
    return ACCEPT


def _r_orL(c, r, ps):
    if not c.ante or c.ante[0].tag != DISJ:
        return refuse("orL principal must be a disjunction at the first position")
    members = c.ante[0].children
    bad = _arity(ps, len(members))
    if bad:
        return bad
    for g, p in zip(members, ps):
        if p.ante != (g,) + c.ante[1:] or p.succ != c.succ or p.control != c.control:
            return refuse("orL premise for %s is malformed" % show(g))
    return ACCEPT


def _r_muL(c, r, ps):
    bad = _arity(ps, 1)
    if bad:
        return bad
    if not c.ante or not _plain_quantifier(c.ante[0], MU):
        return refuse("muL principal must be a plain least fixpoint")
    if ps[0].ante != (_unfold_self(c.ante[0]),) + c.ante[1:] or ps[0].succ != c.succ:
        return refuse("muL premise must unfold the principal formula")
    if not _same_controls(c, ps):
        return refuse("muL must preserve the control")
    return ACCEPT


def _r_nuL(c, r, ps):
    bad = _arity(ps, 1)
    if bad:
        return bad
    if not c.ante or not _plain_quantifier(c.ante[0], NU):
        return refuse("nuL principal must be a plain greatest fixpoint")
    if ps[0].ante != (_unfold_self(c.ante[0]),) + c.ante[1:] or ps[0].succ != c.succ:
        return refuse("nuL premise must unfold the principal formula")
    if not _same_controls(c, ps):
        return refuse("nuL must preserve the control")
    return ACCEPT


def _r_diaL(c, r, ps):
    bad = _arity(ps, 1)
    if bad:
        return bad
    if not c.ante or c.ante[0].tag != DIA:
        return refuse("diaL principal must be a diamond at the first position")
    if any(f.tag != BOX for f in c.ante[1:]):
        return refuse("diaL context must consist of boxes")
    if any(f.tag != DIA for f in c.succ):
        return refuse("diaL consequent must consist of diamonds")
    want_a = (c.ante[0].children[0],) + tuple(f.children[0] for f in c.ante[1:])
    want_s = tuple(f.children[0] for f in c.succ)
    if ps[0].ante != want_a or ps[0].succ != want_s:
        return refuse("diaL premise must strip one diamond and every box")
    if not _same_controls(c, ps):
        return refuse("diaL must preserve the control")
    return ACCEPT


def _r_andR(c, r, ps):
    if not c.succ or c.succ[-1].tag != CONJ:
        return refuse("andR principal must be a conjunction at the last position")
    members = c.succ[-1].children
    bad = _arity(ps, len(members))
    if bad:
        return bad
    for g, p in zip(members, ps):
        if p.succ != c.succ[:-1] + (g,) or p.ante != c.ante or p.control != c.control:
            return refuse("andR premise for %s is malformed" % show(g))
    return ACCEPT


def _r_orR(c, r, ps):
    bad = _arity(ps, 1)
    if bad:
        return bad
    if not c.succ or c.succ[-1].tag != DISJ:
        return refuse("orR principal must be a disjunction at the last position")
    k = r.get("member")
    members = c.succ[-1].children
    if k is None or not 0 <= k < len(members):
        return refuse("orR needs a member index into the disjunction")
    if ps[0].succ != c.succ[:-1] + (members[k],) or ps[0].ante != c.ante:
        return refuse("orR premise must replace the disjunction by the chosen member")
    if not _same_controls(c, ps):
        return refuse("orR must preserve the control")
    return ACCEPT


def _r_muR(c, r, ps):
    bad = _arity(ps, 1)
    if bad:
        return bad
    if not c.succ or not _plain_quantifier(c.succ[-1], MU):
        return refuse("muR principal must be a plain least fixpoint")
    if ps[0].succ != c.succ[:-1] + (_unfold_self(c.succ[-1]),) or ps[0].ante != c.ante:
        return refuse("muR premise must unfold the principal formula")
    if not _same_controls(c, ps):
        return refuse("muR must preserve the control")
    return ACCEPT


def _r_nuR(c, r, ps):
    bad = _arity(ps, 1)
    if bad:
        return bad
    if not c.succ or not _plain_quantifier(c.succ[-1], NU):
        return refuse("nuR principal must be a plain greatest fixpoint")
    if ps[0].succ != c.succ[:-1] + (_unfold_self(c.succ[-1]),) or ps[0].ante != c.ante:
        return refuse("nuR premise must unfold the principal formula")
    if not _same_controls(c, ps):
        return refuse("nuR must preserve the control")
    return ACCEPT


def _r_boxR(c, r, ps):
    bad = _arity(ps, 1)
    if bad:
        return bad
    if not c.succ or c.succ[-1].tag != BOX:
        return refuse("boxR principal must be a box at the last position")
    if any(f.tag != DIA for f in c.succ[:-1]):
        return refuse("boxR consequent context must consist of diamonds")
    if any(f.tag != BOX for f in c.ante):
        return refuse("boxR antecedent must consist of boxes")
    want_a = tuple(f.children[0] for f in c.ante)
    want_s = tuple(f.children[0] for f in c.succ[:-1]) + (c.succ[-1].children[0],)
    if ps[0].ante != want_a or ps[0].succ != want_s:
        return refuse("boxR premise must strip every modality")
    if not _same_controls(c, ps):
        return refuse("boxR must preserve the control")
    return ACCEPT


def _literalish(c: Sequent) -> bool:
    lits = tuple(negate(f) for f in c.ante) + c.succ
    if not all(is_literal(f) for f in lits):
        return False
    vs = {f for f in lits if f.tag == VAR}
    return any(negate(v) in lits for v in vs) and len({f.payload for f in lits}) == 1


def _r_id(c, r, ps):
    bad = _arity(ps, 0)
    if bad:
        return bad
    if c.control:
        return refuse("id requires an empty control")
    if len(c.ante) == 1 and c.ante == c.succ:
        return ACCEPT
    if _literalish(c):
        return ACCEPT
    return refuse("id concludes alpha |- alpha or a complementary literal sequent")


def _r_idL(c, r, ps):
    bad = _arity(ps, 0)
    if bad:
        return bad
    if c.control:
        return refuse("idL requires an empty control")
    if len(c.ante) == 2 and c.succ == () and c.ante[1] is negate(c.ante[0]):
        return ACCEPT
    return refuse("idL concludes alpha, ~alpha |-")


def _r_idR(c, r, ps):
    bad = _arity(ps, 0)
    if bad:
        return bad
    if c.control:
        return refuse("idR requires an empty control")
    if len(c.succ) == 2 and c.ante == () and c.succ[0] is negate(c.succ[1]):
        return ACCEPT
    return refuse("idR concludes |- ~alpha, alpha")


def _r_indR(c, r, ps):
    bad = _arity(ps, 1)
    if bad:
        return bad
    if not c.succ or not _plain_quantifier(c.succ[-1], NU):
        return refuse("indR principal must be a plain greatest fixpoint")
    inv = conj(c.ante + tuple(negate(f) for f in c.succ[:-1]))
    want = instantiate(c.succ[-1].children[0], inv)
    if ps[0].succ != c.succ[:-1] + (want,) or ps[0].ante != c.ante:
        return refuse("indR premise must instantiate the body at the context invariant")
    if not _same_controls(c, ps):
        return refuse("indR must preserve the control")
    return ACCEPT


def _r_indL(c, r, ps):
    bad = _arity(ps, 1)
    if bad:
        return bad
    if not c.ante or not _plain_quantifier(c.ante[0], MU):
        return refuse("indL principal must be a plain least fixpoint")
    inv = disj(tuple(negate(f) for f in c.ante[1:]) + c.succ)
    want = instantiate(c.ante[0].children[0], inv)
    if ps[0].ante != (want,) + c.ante[1:] or ps[0].succ != c.succ:
        return refuse("indL premise must instantiate the body at the context invariant")
    if not _same_controls(c, ps):
        return refuse("indL must preserve the control")
    return ACCEPT


def _r_sindR(c, r, ps):
    bad = _arity(ps, 1)
    if bad:
        return bad
    if not c.succ or not _plain_quantifier(c.succ[-1], NU):
        return refuse("sindR principal must be a plain greatest fixpoint")
    inv = conj(c.ante + tuple(negate(f) for f in c.succ[:-1]))
    body = c.succ[-1].children[0]
    want = nu_db(instantiate(body, disj((inv, var(0)))))
    if ps[0].succ != c.succ[:-1] + (want,) or ps[0].ante != c.ante:
        return refuse("sindR premise must weaken the fixpoint by the context invariant")
    if not _same_controls(c, ps):
        return refuse("sindR must preserve the control")
    return ACCEPT


def _r_sindL(c, r, ps):
    bad = _arity(ps, 1)
    if bad:
        return bad
    if not c.ante or not _plain_quantifier(c.ante[0], MU):
        return refuse("sindL principal must be a plain least fixpoint")
    inv = disj(tuple(negate(f) for f in c.ante[1:]) + c.succ)
    body = c.ante[0].children[0]
    want = mu_db(instantiate(body, conj((inv, var(0)))))
    if ps[0].ante != (want,) + c.ante[1:] or ps[0].succ != c.succ:
        return refuse("sindL premise must strengthen the fixpoint by the context invariant")
    if not _same_controls(c, ps):
        return refuse("sindL must preserve the control")
    return ACCEPT


def cut_shape(c: Sequent, ps) -> Optional[str]:
    """Which cut schema the premises instantiate: split-context, shared-
    context, or the single-consequent (intuitionistic) form."""
    if len(ps) != 2 or not _same_controls(c, ps):
        return None
    p0, p1 = ps
    if not p0.succ or not p1.ante:
        return None
    if p0.succ[-1] is not p1.ante[0]:
        return None
    if c.ante == p0.ante + p1.ante[1:] and c.succ == p0.succ[:-1] + p1.succ:
        return "split"
    if (
        c.ante == p0.ante == p1.ante[1:]
        and c.succ == p0.succ[:-1] == p1.succ
    ):
        return "shared"
    if (
        len(p0.succ) == 1
        and len(c.succ) <= 1
        and c.ante == p0.ante == p1.ante[1:]
        and c.succ == p1.succ
    ):
        return "intuitionistic"
    return None


def _r_cut(c, r, ps):
    bad = _arity(ps, 2)
    if bad:
        return bad
    if cut_shape(c, ps) is None:
        return refuse("cut premises fit no cut schema (split, shared, or single-consequent)")
    return ACCEPT


def _r_muLn(c, r, ps):
    bad = _arity(ps, 1)
    if bad:
        return bad
    n = r.get("name")
    if n is None:
        return refuse("muL^n needs a name parameter")
    if n in c.control:
        return refuse("muL^n name must be fresh for the control")
    if not c.ante or c.ante[0].tag != MU:
        return refuse("muL^n principal must be a least fixpoint")
    g = c.ante[0]
    body = g.children[0]
    want = instantiate(body, mu_db(body, g.ann + (n,)))
    p = ps[0]
    if p.control != c.control + (n,):
        return refuse("muL^n premise control must append the new name")
    if p.ante != (want,) + c.ante[1:] or p.succ != c.succ:
        return refuse("muL^n premise must unfold with the extended annotation")
    return ACCEPT


def _r_nuRn(c, r, ps):
    bad = _arity(ps, 1)
    if bad:
        return bad
    n = r.get("name")
    if n is None:
        return refuse("nuR^n needs a name parameter")
    if n in c.control:
        return refuse("nuR^n name must be fresh for the control")
    if not c.succ or c.succ[-1].tag != NU:
        return refuse("nuR^n principal must be a greatest fixpoint")
    g = c.succ[-1]
    body = g.children[0]
    want = instantiate(body, nu_db(body, g.ann + (n,)))
    p = ps[0]
    if p.control != c.control + (n,):
        return refuse("nuR^n premise control must append the new name")
    if p.succ != c.succ[:-1] + (want,) or p.ante != c.ante:
        return refuse("nuR^n premise must unfold with the extended annotation")
    return ACCEPT


def _r_cw(c, r, ps):
    bad = _arity(ps, 1)
    if bad:
        return bad
    p = ps[0]
    if p.ante != c.ante or p.succ != c.succ:
        return refuse("cw must leave every formula unchanged")
    if not is_subsequence(p.control, c.control) or p.control == c.control:
        return refuse("cw premise control must be a proper subsequence")
    dropped = set(c.control) - set(p.control)
    for f in c.ante + c.succ:
        for g in walk(f):
            if dropped & set(g.ann):
                return refuse("cw may only drop names absent from every annotation")
    return ACCEPT


def _rebuild(g: Formula, kids) -> Formula:
    if g.tag == BOX:
        return box(kids[0])
    if g.tag == DIA:
        return dia(kids[0])
    if g.tag == CONJ:
        return conj(kids)
    if g.tag == DISJ:
        return disj(kids)
    make = mu_db if g.tag == MU else nu_db
    return make(kids[0], g.ann)


def _aw_variants(f: Formula, tag: int):
    """All formulas obtained by dropping the final name of exactly one
    annotation occurrence on a tag quantifier inside f."""
    memo = {}

    def go(g: Formula):
        got = memo.get(g)
        if got is not None:
            return got
        out = []
        if g.tag in (VAR, NEGVAR):
            memo[g] = out
            return out
        kids = g.children
        if g.tag == tag and g.ann:
            make = mu_db if g.tag == MU else nu_db
            out.append(make(kids[0], g.ann[:-1]))
        for i, ch in enumerate(kids):
            for v in go(ch):
                out.append(_rebuild(g, kids[:i] + (v,) + kids[i + 1 :]))
        memo[g] = out
        return out

    return set(go(f))


def _r_awL(c, r, ps):
    bad = _arity(ps, 1)
    if bad:
        return bad
    p = ps[0]
    if not c.ante or p.succ != c.succ or p.ante[1:] != c.ante[1:] or not p.ante:
        return refuse("awL acts inside the first antecedent formula")
    if not _same_controls(c, ps):
        return refuse("awL must preserve the control")
    if p.ante[0] not in _aw_variants(c.ante[0], MU):
        return refuse("awL premise must drop the last name of one mu annotation")
    return ACCEPT


def _r_awR(c, r, ps):
    bad = _arity(ps, 1)
    if bad:
        return bad
    p = ps[0]
    if not c.succ or p.ante != c.ante or p.succ[:-1] != c.succ[:-1] or not p.succ:
        return refuse("awR acts inside the last consequent formula")
    if not _same_controls(c, ps):
        return refuse("awR must preserve the control")
    if p.succ[-1] not in _aw_variants(c.succ[-1], NU):
        return refuse("awR premise must drop the last name of one nu annotation")
    return ACCEPT


def _r_dup(c, r, ps):
    bad = _arity(ps, 1)
    if bad:
        return bad
    i, j = r.get("keep"), r.get("drop")
    n = len(c.ante)
    if i is None or j is None or not (0 <= i < n and 0 <= j < n) or i == j:
        return refuse("dup needs distinct keep/drop antecedent positions")
    if ps[0].ante != c.ante[:j] + c.ante[j + 1 :] or ps[0].succ != c.succ:
        return refuse("dup premise must drop exactly the chosen occurrence")
    if not _same_controls(c, ps):
        return refuse("dup must preserve the control")
    if not ann_le(c.ante[i], c.ante[j], c.control):
        return refuse("dup kept formula must precede the dropped one in the annotation order")
    return ACCEPT


def _truncate_at(f: Formula, n: int) -> Formula:
    """Shorten every annotation containing n to its least prefix containing n."""
    memo = {}

    def go(g: Formula) -> Formula:
        h = memo.get(g)
        if h is not None:
            return h
        if g.tag in (VAR, NEGVAR):
            h = g
        elif g.tag in (BOX, DIA, CONJ, DISJ):
            h = _rebuild(g, tuple(go(ch) for ch in g.children))
        else:
            a = g.ann
            if n in a:
                a = a[: a.index(n) + 1]
            make = mu_db if g.tag == MU else nu_db
            h = make(go(g.children[0]), a)
        memo[g] = h
        return h

    return go(f)


def _r_cover(c, r, ps):
    bad = _arity(ps, 1)
    if bad:
        return bad
    n = r.get("name")
    if n is None:
        return refuse("cover^n needs a name parameter")
    if not covered(n, c.ante + c.succ):
        return refuse("cover^n requires the name to be covered in the sequent")
    want_a = tuple(_truncate_at(f, n) for f in c.ante)
    want_s = tuple(_truncate_at(f, n) for f in c.succ)
    if ps[0].ante != want_a or ps[0].succ != want_s or not _same_controls(c, ps):
        return refuse("cover^n premise must truncate every annotation through the name")
    return ACCEPT


def _r_andL_star(c, r, ps):
    bad = _arity(ps, 1)
    if bad:
        return bad
    i = r.get("pos", 0)
    if not 0 <= i < len(c.ante) or c.ante[i].tag != CONJ:
        return refuse("andL* principal must be a conjunction at the given position")
    want = c.ante[:i] + c.ante[i].children + c.ante[i + 1 :]
    if ps[0].ante != want or ps[0].succ != c.succ or not _same_controls(c, ps):
        return refuse("andL* premise must splice the members in place")
    return ACCEPT


def _modal_split(fs):
    dias, boxes, lits = [], [], []
    for i, f in enumerate(fs):
        if f.tag == DIA:
            dias.append(i)
        elif f.tag == BOX:
            boxes.append(i)
        elif is_literal(f):
            lits.append(i)
        else:
            return None
    return dias, boxes, lits


def _r_diaL_star(c, r, ps):
    if c.succ != ():
        return refuse("diaL* requires an empty consequent")
    split = _modal_split(c.ante)
    if split is None:
        return refuse("diaL* antecedent must consist of diamonds, boxes, and literals")
    dias, boxes, _ = split
    bad = _arity(ps, len(dias) + 1)
    if bad:
        return bad
    ctx = tuple(c.ante[i].children[0] for i in boxes)
    for k, di in enumerate(dias):
        p = ps[k]
        if p.ante != (c.ante[di].children[0],) + ctx or p.succ != () or p.control != c.control:
            return refuse("diaL* premise %d is malformed" % k)
    last = ps[-1]
    if last.ante != ctx or last.succ != () or last.control != c.control:
        return refuse("diaL* final premise must keep exactly the box contexts")
    return ACCEPT


def _r_boxR_star(c, r, ps):
    if c.ante != ():
        return refuse("boxR* requires an empty antecedent")
    split = _modal_split(c.succ)
    if split is None:
        return refuse("boxR* consequent must consist of boxes, diamonds, and literals")
    dias, boxes, _ = split
    bad = _arity(ps, len(boxes) + 1)
    if bad:
        return bad
    ctx = tuple(c.succ[i].children[0] for i in dias)
    for k, bi in enumerate(boxes):
        p = ps[k]
        if p.succ != (c.succ[bi].children[0],) + ctx or p.ante != () or p.control != c.control:
            return refuse("boxR* premise %d is malformed" % k)
    last = ps[-1]
    if last.succ != ctx or last.ante != () or last.control != c.control:
        return refuse("boxR* final premise must keep exactly the diamond contexts")
    return ACCEPT


_RULES = {
    "eL": _r_eL, "eR": _r_eR, "cL": _r_cL, "cR": _r_cR,
    "wL": _r_wL, "wR": _r_wR, "b": _r_b,
    "e": _r_e, "w": _r_w, "c": _r_c,
    "andL": _r_andL, "orL": _r_orL, "muL": _r_muL, "nuL": _r_nuL,
    "diaL": _r_diaL, "andR": _r_andR, "orR": _r_orR, "muR": _r_muR,
    "nuR": _r_nuR, "boxR": _r_boxR,
    "id": _r_id, "idL": _r_idL, "idR": _r_idR,
    "indL": _r_indL, "indR": _r_indR, "sindL": _r_sindL, "sindR": _r_sindR,
    "cut": _r_cut,
    "muL^n": _r_muLn, "nuR^n": _r_nuRn, "cw": _r_cw,
    "awL": _r_awL, "awR": _r_awR,
    "dup": _r_dup, "cover^n": _r_cover,
    "andL*": _r_andL_star, "diaL*": _r_diaL_star, "boxR*": _r_boxR_star,
}


def check_local(node: Sequent, rule: RuleInstance, premises) -> Verdict:
    """Does (node, premises) instantiate the named rule schema?  The verdict
    is truthy on success and names the violated schema slot otherwise."""
    fn = _RULES.get(rule.name)
    if fn is None:
        return refuse("unknown rule name: %r" % rule.name)
    return fn(node, rule, tuple(premises))


# --- proofs -------------------------------------------------------------------


@dataclass(frozen=True)
class ProofNode:
    sequent: Sequent
    rule: Optional[RuleInstance]
    children: tuple = ()
    backedge: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if self.rule is None:
            if self.children:
                raise ValueError("a bud has no children")
        elif self.backedge is not None:
            raise ValueError("only buds carry back-edges")

    @property
    def is_bud(self) -> bool:
        return self.rule is None


class Proof:
    """A finite derivation tree, possibly with back-edges.

    Tree edges run from each node to its premises in order.  A node with
    rule None is a bud: with a back-edge it refers to its companion (which
    must carry the identical sequent); without one it is an open
    assumption.  Every node is reachable from the root and has exactly one
    tree parent.
    """

    __slots__ = ("root", "nodes")

    def __init__(self, root: int, nodes: Dict[int, ProofNode]):
        self.root = root
        self.nodes = dict(nodes)
        if root not in self.nodes:
            raise ValueError("root id missing from the node table")
        parents = {}
        for u, nd in self.nodes.items():
            for v in nd.children:
                if v not in self.nodes:
                    raise ValueError("child id %r is not a node" % (v,))
                if v in parents:
                    raise ValueError("node %r has two parents" % (v,))
                parents[v] = u
        if root in parents:
            raise ValueError("the root cannot be a premise")
        seen = {root}
        stack = [root]
        while stack:
            u = stack.pop()
            for v in self.nodes[u].children:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        if seen != set(self.nodes):
            raise ValueError("every node must be reachable from the root")
        for u, nd in self.nodes.items():
            t = nd.backedge
            if t is None:
                continue
            if t not in self.nodes:
                raise ValueError("back-edge target %r is not a node" % (t,))
            if self.nodes[t].sequent != nd.sequent:
                raise ValueError("back-edge target must carry the identical sequent")
        for u, nd in self.nodes.items():
            if nd.is_bud and nd.backedge is not None:
                hops, v = set(), u
                while self.nodes[v].is_bud and self.nodes[v].backedge is not None:
                    if v in hops:
                        raise ValueError("back-edge cycle without any rule")
                    hops.add(v)
                    v = self.nodes[v].backedge

    def node(self, u: int) -> ProofNode:
        return self.nodes[u]

    def sequent(self, u: int) -> Sequent:
        return self.nodes[u].sequent

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def is_tree(self) -> bool:
        return all(nd.backedge is None for nd in self.nodes.values())

    def buds(self):
        return tuple(u for u, nd in sorted(self.nodes.items()) if nd.is_bud)

    def parent_map(self) -> Dict[int, int]:
        out = {}
        for u, nd in self.nodes.items():
            for v in nd.children:
                out[v] = u
        return out

    def path_from_root(self, u: int) -> tuple:
        parents = self.parent_map()
        path = [u]
        while path[-1] != self.root:
            path.append(parents[path[-1]])
        return tuple(reversed(path))


Derivation = Proof
RegularProof = Proof


def check_all_local(p: Proof) -> Verdict:
    """Run check_local at every non-bud node."""
    for u in sorted(p.nodes):
        nd = p.nodes[u]
        if nd.is_bud:
            continue
        prems = tuple(p.nodes[v].sequent for v in nd.children)
        v = check_local(nd.sequent, nd.rule, prems)
        if not v:
            return refuse("node %r: %s" % (u, v.reason), detail=u)
    return ACCEPT


# --- JSON ----------------------------------------------------------------------


def sequent_to_obj(s: Sequent) -> dict:
    return {
        "control": list(s.control),
        "ante": [show(f) for f in s.ante],
        "succ": [show(f) for f in s.succ],
    }


def sequent_from_obj(o: dict) -> Sequent:
    return Sequent(
        tuple(o.get("control", ())),
        tuple(parse_formula(t) for t in o.get("ante", ())),
        tuple(parse_formula(t) for t in o.get("succ", ())),
    )


def proof_to_json(p: Proof) -> str:
    nodes = []
    for u in sorted(p.nodes):
        nd = p.nodes[u]
        o = {"id": u, "sequent": sequent_to_obj(nd.sequent)}
        o["rule"] = (
            None
            if nd.rule is None
            else {"name": nd.rule.name, "params": dict(nd.rule.params)}
        )
        o["children"] = list(nd.children)
        if nd.backedge is not None:
            o["backedge"] = nd.backedge
        nodes.append(o)
    return json.dumps({"root": p.root, "nodes": nodes}, indent=1)


def proof_from_json(text) -> Proof:
    o = json.loads(text) if isinstance(text, str) else text
    nodes = {}
    for entry in o["nodes"]:
        r = entry.get("rule")
        ri = None if r is None else RuleInstance(r["name"], tuple(sorted(r.get("params", {}).items())))
        nodes[entry["id"]] = ProofNode(
            sequent_from_obj(entry["sequent"]),
            ri,
            tuple(entry.get("children", ())),
            entry.get("backedge"),
        )
    return Proof(o["root"], nodes)


# --- traces --------------------------------------------------------------------


def _identity_map(conclusion: Sequent, nprem: int, p):
    return frozenset((k, p) for k in range(nprem))


def trace_step(rule: RuleInstance, p, conclusion: Sequent, premises) -> frozenset:
    """The premise occurrences descending from conclusion occurrence p,
    as (premise index, position) pairs.  Assumes the instance is locally
    valid; weakened occurrences yield the empty set."""
    side, i = p
    ps = tuple(premises)
    name = rule.name

    if name == "eL":
        j = rule.get("to")
        if side == LEFT:
            if i == 0:
                return frozenset({(0, (LEFT, j))})
            return frozenset({(0, (LEFT, i - 1 if i <= j else i))})
        return frozenset({(0, p)})
    if name == "eR":
        j = rule.get("to")
        if side == RIGHT:
            last = len(conclusion.succ) - 1
            if i == last:
                return frozenset({(0, (RIGHT, j))})
            return frozenset({(0, (RIGHT, i + 1 if i >= j else i))})
        return frozenset({(0, p)})
    if name == "cL":
        if side == LEFT:
            if i == 0:
                return frozenset({(0, (LEFT, 0)), (0, (LEFT, 1))})
            return frozenset({(0, (LEFT, i + 1))})
        return frozenset({(0, p)})
    if name == "cR":
        if side == RIGHT:
            last = len(conclusion.succ) - 1
            if i == last:
                return frozenset({(0, (RIGHT, last)), (0, (RIGHT, last + 1))})
        return frozenset({(0, p)})
    if name == "wL":
        k = len(conclusion.ante) - len(ps[0].ante)
        if side == LEFT:
            if i < k:
                return frozenset()
            return frozenset({(0, (LEFT, i - k))})
        return frozenset({(0, p)})
    if name == "wR":
        if side == RIGHT and i >= len(ps[0].succ):
            return frozenset()
        return frozenset({(0, p)})
    if name in ("b", "id", "idL", "idR"):
        return frozenset()
    if name in ("e", "w", "c"):
        return _macro_map(conclusion, ps[0], p)
    if name == "orL":
        return _identity_map(conclusion, len(ps), p)
    if name == "andR":
        return _identity_map(conclusion, len(ps), p)
    if name in ("andL", "muL", "nuL", "diaL", "orR", "muR", "nuR", "boxR",
                "indL", "indR", "sindL", "sindR", "muL^n", "nuR^n",
                "cw", "awL", "awR", "cover^n"):
        return frozenset({(0, p)})
    if name == "cut":
        shape = cut_shape(conclusion, ps)
        if shape == "split":
            a0 = len(ps[0].ante)
            s0 = len(ps[0].succ) - 1
            if side == LEFT:
                if i < a0:
                    return frozenset({(0, p)})
                return frozenset({(1, (LEFT, i - a0 + 1))})
            if i < s0:
                return frozenset({(0, p)})
            return frozenset({(1, (RIGHT, i - s0))})
        if shape == "shared":
            if side == LEFT:
                return frozenset({(0, p), (1, (LEFT, i + 1))})
            return frozenset({(0, p), (1, p)})
        if side == LEFT:
            return frozenset({(0, p), (1, (LEFT, i + 1))})
        return frozenset({(1, p)})
    if name == "dup":
        j = rule.get("drop")
        k = rule.get("keep")
        if side == LEFT:
            tgt = k if i == j else i
            return frozenset({(0, (LEFT, tgt - 1 if tgt > j else tgt))})
        return frozenset({(0, p)})
    if name == "andL*":
        at = rule.get("pos", 0)
        width = len(conclusion.ante[at].children)
        if side == LEFT:
            if i < at:
                return frozenset({(0, p)})
            if i == at:
                return frozenset((0, (LEFT, at + t)) for t in range(width))
            return frozenset({(0, (LEFT, i + width - 1))})
        return frozenset({(0, p)})
    if name == "diaL*":
        dias, boxes, _ = _modal_split(conclusion.ante)
        if side == LEFT:
            if i in dias:
                return frozenset({(dias.index(i), (LEFT, 0))})
            if i in boxes:
                j = boxes.index(i)
                out = {(k, (LEFT, 1 + j)) for k in range(len(dias))}
                out.add((len(dias), (LEFT, j)))
                return frozenset(out)
        return frozenset()
    if name == "boxR*":
        dias, boxes, _ = _modal_split(conclusion.succ)
        if side == RIGHT:
            if i in boxes:
                return frozenset({(boxes.index(i), (RIGHT, 0))})
            if i in dias:
                j = dias.index(i)
                out = {(k, (RIGHT, 1 + j)) for k in range(len(boxes))}
                out.add((len(boxes), (RIGHT, j)))
                return frozenset(out)
        return frozenset()
    raise ValueError("trace_step: unknown rule %r" % name)


def _macro_map(c: Sequent, prem: Sequent, p):
    """Canonical occurrence matching for the e/w/c macros: the i-th
    occurrence of a formula maps to the i-th occurrence in the premise,
    and the final occurrence absorbs any surplus premise copies."""
    side, i = p
    cs = c.side(side)
    pside = prem.side(side)
    f = cs[i]
    mine = [k for k, g in enumerate(cs) if g is f].index(i)
    spots = [k for k, g in enumerate(pside) if g is f]
    total = len([g for g in cs if g is f])
    out = set()
    if mine < len(spots):
        out.add((0, (side, spots[mine])))
    if mine == total - 1:
        for extra in spots[total:]:
            out.add((0, (side, extra)))
    return frozenset(out)


FIXPOINT_RULES = {
    "muL": (LEFT, MU), "nuL": (LEFT, NU), "muL^n": (LEFT, MU),
    "muR": (RIGHT, MU), "nuR": (RIGHT, NU), "nuR^n": (RIGHT, NU),
}


def principal_position(rule: RuleInstance, s: Sequent):
    name = rule.name
    if name in ("andL", "orL", "muL", "nuL", "diaL", "indL", "sindL", "muL^n"):
        return (LEFT, 0)
    if name in ("andR", "orR", "muR", "nuR", "boxR", "indR", "sindR", "nuR^n"):
        return (RIGHT, len(s.succ) - 1)
    if name == "andL*":
        return (LEFT, rule.get("pos", 0))
    return None


def trace_graph(rp: Proof) -> nx.DiGraph:
    """The graph of formula occurrences along tree and back edges.  Nodes
    are (proof node, position); an edge carries sign and rank attributes
    exactly when its source is principal at a fixpoint rule, giving the
    data from which thread parities are computed."""
    g = nx.DiGraph()
    for u in sorted(rp.nodes):
        nd = rp.nodes[u]
        for p in nd.sequent.positions():
            g.add_node((u, p))
    for u in sorted(rp.nodes):
        nd = rp.nodes[u]
        if nd.is_bud:
            if nd.backedge is not None:
                for p in nd.sequent.positions():
                    g.add_edge((u, p), (nd.backedge, p), sign=None, rank=None, side=None)
            continue
        prems = tuple(rp.nodes[v].sequent for v in nd.children)
        prin = principal_position(nd.rule, nd.sequent)
        fix = FIXPOINT_RULES.get(nd.rule.name)
        for p in nd.sequent.positions():
            mark = fix is not None and p == prin
            f = nd.sequent.at(p)
            for k, q in trace_step(nd.rule, p, nd.sequent, prems):
                g.add_edge(
                    (u, p),
                    (nd.children[k], q),
                    sign=(fix[1] if mark else None),
                    rank=(f.rank if mark else None),
                    side=(p[0] if mark else None),
                )
    return g


# --- unravelling -----------------------------------------------------------------


def unravel(rp: Proof, depth: int) -> Proof:
    """The tree unravelling of rp, cut at the given number of rule
    applications per branch; cut points become open buds."""
    nodes = {}
    counter = [0]

    def fresh() -> int:
        counter[0] += 1
        return counter[0] - 1

    def visit(u: int, d: int) -> int:
        nd = rp.nodes[u]
        while nd.is_bud and nd.backedge is not None:
            u = nd.backedge
            nd = rp.nodes[u]
        me = fresh()
        if d == 0 or nd.is_bud:
            nodes[me] = ProofNode(nd.sequent, None)
            return me
        kids = tuple(visit(v, d - 1) for v in nd.children)
        nodes[me] = ProofNode(nd.sequent, nd.rule, kids)
        return me

    root = visit(rp.root, depth)
    return Proof(root, nodes)
