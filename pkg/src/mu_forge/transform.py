"""Formula and proof transformations.

guard rewrites a formula into a semantically equivalent guarded one.
derive_identity builds a cut-free regular proof of a => a, and dualize
maps any proof onto its dual refutation form (every consequent formula
crosses to the antecedent, negated).  derive_induction realises an
explicit induction instance as an annotated cyclic proof over a single
assumption leaf.

The system translations are cyclic_to_finitary (annotated cyclic into
the finitary system with strengthened induction), cyclic_to_coproof
(annotated cyclic into the infinitary cut-free system), and
coproof_to_cyclic (regular infinitary proofs back into annotated cyclic
form, subject to constructiveness and fixpoint-freeness certificates).

Multicut, mcut_step and cut_expand implement stepwise cut elimination:
a multicut node is reduced one visible inference at a time, so partial
expansions are honest prefixes of the cut-free unravelling.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

from .annot import restrict, restrict_formula
from .checkers import KMO_RULES, check_coproof, check_cyclic, is_constructive
from .proofcore import Proof, ProofNode, RuleInstance, Sequent, rule, seq
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
    MuForgeError,
    auto_pf_cert,
    bot,
    box,
    conj,
    dia,
    disj,
    instantiate,
    is_plain,
    mu_db,
    negate,
    nu_db,
    pf_certificate_check,
    plain,
    show,
    skey,
    top,
    unfold,
    var,
    var_guarded,
    walk,
)
from .util import is_subsequence


class TransformError(MuForgeError):
    """A transformation's precondition failed or its image is undefined."""


# --- builder utilities -------------------------------------------------------


class _Names:
    """Fresh control names, strictly increasing."""

    def __init__(self, start: int = 0):
        self._next = start

    def seed(self, used) -> None:
        for n in used:
            if n >= self._next:
                self._next = n + 1

    def fresh(self) -> int:
        n = self._next
        self._next += 1
        return n


class _Build:
    """Accumulates proof nodes under explicit integer ids."""

    def __init__(self):
        self.nodes: Dict[int, ProofNode] = {}
        self._next = 0

    def reserve(self) -> int:
        u = self._next
        self._next += 1
        return u

    def put(self, u, sequent, rl=None, children=(), backedge=None) -> int:
        self.nodes[u] = ProofNode(sequent, rl, tuple(children), backedge)
        return u

    def add(self, sequent, rl=None, children=(), backedge=None) -> int:
        return self.put(self.reserve(), sequent, rl, children, backedge)

    def proof(self, root: int) -> Proof:
        return Proof(root, dict(self.nodes))


def _copy_unfold(b: _Build, p: Proof, u: int, at: Optional[int] = None) -> int:
    """Copy the subproof at u into b, unfolding back-edges that escape it.

    Back-edges to nodes inside the copied region are preserved; a
    back-edge to a node outside it is resolved by inlining the target.
    """

    def go(w, active, target):
        nd = p.nodes[w]
        if nd.is_bud and nd.backedge is not None:
            t = nd.backedge
            if t in active:
                wid = target if target is not None else b.reserve()
                return b.put(wid, nd.sequent, None, (), active[t])
            return go(t, active, target)
        if nd.is_bud:
            wid = target if target is not None else b.reserve()
            return b.put(wid, nd.sequent, None)
        wid = target if target is not None else b.reserve()
        act = dict(active)
        act[w] = wid
        kids = tuple(go(v, act, None) for v in nd.children)
        return b.put(wid, nd.sequent, nd.rule, kids)

    return go(u, {}, at)


def _mset(fs) -> Counter:
    return Counter(fs)


def _same_mset(xs, ys) -> bool:
    return Counter(xs) == Counter(ys)


# --- guardedness -------------------------------------------------------------


def _occurs(g: Formula, k: int) -> bool:
    if g.loose <= k:
        return False
    t = g.tag
    if t == VAR:
        return g.payload == k
    if t in (MU, NU):
        return _occurs(g.children[0], k + 1)
    return any(_occurs(c, k) for c in g.children)


def _guarded_occ(g: Formula, k: int) -> bool:
    """True when some occurrence of index k sits under a modality."""
    if g.loose <= k:
        return False
    t = g.tag
    if t in (BOX, DIA):
        return _occurs(g.children[0], k)
    if t in (MU, NU):
        return _guarded_occ(g.children[0], k + 1)
    if t in (CONJ, DISJ):
        return any(_guarded_occ(c, k) for c in g.children)
    return False


def _plug_unguarded(g: Formula, k: int, unit: Formula) -> Formula:
    """Replace the unguarded occurrences of index k by unit."""
    if g.loose <= k:
        return g
    t = g.tag
    if t == VAR:
        return unit if g.payload == k else g
    if t in (BOX, DIA):
        return g
    if t == CONJ:
        return conj(tuple(_plug_unguarded(c, k, unit) for c in g.children))
    if t == DISJ:
        return disj(tuple(_plug_unguarded(c, k, unit) for c in g.children))
    if t in (MU, NU):
        body = _plug_unguarded(g.children[0], k + 1, unit)
        return (mu_db if t == MU else nu_db)(body, g.ann)
    return g


def _flatten(tag, items):
    out = []
    for g in items:
        if g.tag == tag and g.children:
            out.extend(g.children)
        else:
            out.append(g)
    return tuple(out)


def guard(a: Formula) -> Formula:
    """Equivalent guarded formula: every bound variable occurs only under
    a modality inside its binder.  Nested same-operator junctions are
    flattened and singleton junctions collapsed along the way."""

    def go(f: Formula) -> Formula:
        t = f.tag
        if t in (VAR, NEGVAR):
            return f
        if t == BOX:
            return box(go(f.children[0]))
        if t == DIA:
            return dia(go(f.children[0]))
        if t in (CONJ, DISJ):
            mk = conj if t == CONJ else disj
            kids = _flatten(t, tuple(go(c) for c in f.children))
            out = mk(kids)
            if len(out.children) == 1:
                return out.children[0]
            return out
        body = go(f.children[0])
        mk = mu_db if t == MU else nu_db
        unit = bot() if t == MU else top()
        if var_guarded(body, 0):
            return mk(body, f.ann)
        if not _guarded_occ(body, 0):
            return go(instantiate(body, unit))
        return mk(go(_plug_unguarded(body, 0, unit)), f.ann)

    return go(a)


# --- identity proofs ---------------------------------------------------------


def derive_identity(a: Formula) -> Proof:
    """Cut-free regular proof of (a,) => (a,); linear in the closure of a.

    Each fixpoint subformula is proved once and re-entered through a
    back-edge, so the proof doubles as a template for identity expansion.
    """
    a = plain(a)
    b = _Build()
    memo: Dict[Formula, int] = {}

    def go(f: Formula) -> int:
        s = seq((f,), (f,))
        t = f.tag
        if t in (VAR, NEGVAR):
            return b.add(s, rule("id"))
        if t == BOX:
            return b.add(s, rule("boxR"), (go(f.children[0]),))
        if t == DIA:
            return b.add(s, rule("diaL"), (go(f.children[0]),))
        if t == CONJ:
            kids = []
            for k, g in enumerate(f.children):
                mid = b.add(seq((f,), (g,)), rule("andL", member=k), (go(g),))
                kids.append(mid)
            return b.add(s, rule("andR"), tuple(kids))
        if t == DISJ:
            kids = []
            for k, g in enumerate(f.children):
                mid = b.add(seq((g,), (f,)), rule("orR", member=k), (go(g),))
                kids.append(mid)
            return b.add(s, rule("orL"), tuple(kids))
        if f in memo:
            return b.add(s, None, (), memo[f])
        head = b.reserve()
        memo[f] = head
        u = unfold(f)
        core = go(u)
        if t == MU:
            mid = b.add(seq((u,), (f,)), rule("muR"), (core,))
            return b.put(head, s, rule("muL"), (mid,))
        mid = b.add(seq((u,), (f,)), rule("nuR"), (core,))
        return b.put(head, s, rule("nuL"), (mid,))

    root = go(a)
    return b.proof(root)


# --- dualization -------------------------------------------------------------


def _dual_seq(s: Sequent) -> Sequent:
    ante = tuple(negate(f) for f in reversed(s.succ)) + s.ante
    return Sequent(s.control, ante, ())


_D_RIGHT = {
    "andR": "orL",
    "orR": "andL",
    "muR": "nuL",
    "nuR": "muL",
    "boxR": "diaL",
    "nuR^n": "muL^n",
    "awR": "awL",
    "indR": "indL",
    "sindR": "sindL",
}

_D_LEFT = frozenset(
    {"andL", "orL", "muL", "nuL", "diaL", "indL", "sindL", "muL^n", "awL"}
)

_D_EXCH = {"eL": "e", "eR": "e", "e": "e"}
_D_CONTR = {"cL": "c", "cR": "c", "c": "c"}
_D_WEAK = {"wL": "w", "wR": "w", "w": "w"}


def dualize(p: Proof) -> Proof:
    """Dual proof: Gamma => Delta becomes neg(Delta) reversed, Gamma => ().

    Left rules keep their name behind an exchange; right rules become
    their left duals exactly; cuts are replaced by an excluded-middle
    split on the cut formula, which must be plain.
    """
    b = _Build()
    mapping = {u: b.reserve() for u in sorted(p.nodes)}

    def link(s: Sequent, child: int) -> int:
        if b.nodes[child].sequent == s:
            return child
        return b.add(s, rule("e"), (child,))

    for u in sorted(p.nodes):
        nd = p.nodes[u]
        C = nd.sequent
        D = _dual_seq(C)
        at = mapping[u]
        if nd.is_bud:
            be = mapping[nd.backedge] if nd.backedge is not None else None
            b.put(at, D, None, (), be)
            continue
        r = nd.rule
        name = r.name
        kids = tuple(mapping[v] for v in nd.children)
        prem = tuple(_dual_seq(p.nodes[v].sequent) for v in nd.children)
        q = len(C.succ)

        if name == "b":
            b.put(at, D, rule("b"))
        elif name == "id":
            if len(C.ante) == 1 and C.ante == C.succ:
                b.put(at, D, rule("idL"))
            else:
                b.put(at, D, rule("id"))
        elif name in ("idL", "idR"):
            b.put(at, D, rule("idL"))
        elif name in _D_EXCH:
            b.put(at, D, rule(_D_EXCH[name]), (link(prem[0], kids[0]),))
        elif name in _D_CONTR:
            b.put(at, D, rule(_D_CONTR[name]), (link(prem[0], kids[0]),))
        elif name in _D_WEAK:
            b.put(at, D, rule(_D_WEAK[name]), (link(prem[0], kids[0]),))
        elif name == "dup":
            r2 = rule("dup", keep=q + r.get("keep"), drop=q + r.get("drop"))
            b.put(at, D, r2, kids)
        elif name == "cw":
            b.put(at, D, rule("cw"), kids)
        elif name == "cover^n":
            b.put(at, D, r, kids)
        elif name == "andL*":
            b.put(at, D, rule("andL*", pos=q + r.get("pos", 0)), kids)
        elif name == "diaL*":
            b.put(at, D, r, kids)
        elif name == "boxR*":
            boxes = [t for t, f in enumerate(C.succ) if f.tag == BOX]
            ctx = tuple(negate(f).children[0] for f in reversed(C.succ) if f.tag == DIA)
            legs = []
            for t in reversed(boxes):
                g = negate(C.succ[t]).children[0]
                s2 = Sequent(C.control, (g,) + ctx, ())
                legs.append(link(s2, kids[boxes.index(t)]))
            legs.append(kids[-1])
            b.put(at, D, rule("diaL*"), tuple(legs))
        elif name in _D_RIGHT:
            dual = _D_RIGHT[name]
            if name == "andR":
                g = C.succ[-1]
                members = negate(g).children
                legs = tuple(kids[g.children.index(negate(m))] for m in members)
                b.put(at, D, rule("orL"), legs)
            elif name == "orR":
                g = C.succ[-1]
                m = g.children[r.get("member")]
                k2 = negate(g).children.index(negate(m))
                b.put(at, D, rule("andL", member=k2), kids)
            elif name == "nuR^n":
                b.put(at, D, rule("muL^n", name=r.get("name")), kids)
            else:
                b.put(at, D, rule(dual), kids)
        elif name in _D_LEFT:
            rest = D.ante[:q] + D.ante[q + 1:]
            F = Sequent(C.control, (C.ante[0],) + rest, ())
            legs = []
            for i, v in enumerate(nd.children):
                P = p.nodes[v].sequent
                if name == "diaL":
                    ante2 = (P.ante[0],) + tuple(g.children[0] for g in F.ante[1:])
                    want = Sequent(C.control, ante2, ())
                elif name == "muL^n":
                    want = Sequent(
                        C.control + (r.get("name"),), (P.ante[0],) + F.ante[1:], ()
                    )
                else:
                    want = Sequent(C.control, (P.ante[0],) + F.ante[1:], ())
                legs.append(link(want, kids[i]))
            if F == D:
                b.put(at, F, r, tuple(legs))
            else:
                inner = b.add(F, r, tuple(legs))
                b.put(at, D, rule("e"), (inner,))
        elif name == "cut":
            cf = p.nodes[nd.children[0]].sequent.succ[-1]
            if not is_plain(cf):
                raise TransformError(
                    "cannot dualize a cut on the annotated formula %s" % show(cf)
                )
            beta = disj((cf, negate(cf)))
            em = _em_chain(b, C.control, beta, cf)
            legs = []
            for m in beta.children:
                s2 = Sequent(C.control, (m,) + D.ante, ())
                src = kids[1] if m is cf else kids[0]
                legs.append(b.add(s2, rule("w"), (src,)))
            p1 = b.add(Sequent(C.control, (beta,) + D.ante, ()), rule("orL"), tuple(legs))
            b.put(at, D, rule("cut"), (em, p1))
        else:
            raise TransformError("no dual for rule %r" % name)

    return b.proof(mapping[p.root])


def _em_chain(b: _Build, control, beta: Formula, cf: Formula) -> int:
    """Derivation of [control] () => (beta,) for beta = cf or neg cf."""
    ncf = negate(cf)
    n4 = b.add(seq((), (cf, ncf)), rule("idR"))
    k_ncf = beta.children.index(ncf)
    n3 = b.add(seq((), (cf, beta)), rule("orR", member=k_ncf), (n4,))
    n2 = b.add(seq((), (beta, cf)), rule("eR", to=0), (n3,))
    k_cf = beta.children.index(cf)
    n1 = b.add(seq((), (beta, beta)), rule("orR", member=k_cf), (n2,))
    n0 = b.add(seq((), (beta,)), rule("cR"), (n1,))
    if control:
        return b.add(Sequent(tuple(control), (), (beta,)), rule("cw"), (n0,))
    return n0


# --- induction figures -------------------------------------------------------


def _fill(g: Formula, subs: Dict[int, tuple], side: int) -> Formula:
    """Simultaneous substitution of closed values for loose indices."""
    if not subs or g.loose <= min(subs):
        return g
    t = g.tag
    if t == VAR:
        v = subs.get(g.payload)
        return v[side] if v is not None else g
    if t == BOX:
        return box(_fill(g.children[0], subs, side))
    if t == DIA:
        return dia(_fill(g.children[0], subs, side))
    if t == CONJ:
        return conj(tuple(_fill(c, subs, side) for c in g.children))
    if t == DISJ:
        return disj(tuple(_fill(c, subs, side) for c in g.children))
    if t in (MU, NU):
        inner = {k + 1: v for k, v in subs.items()}
        body = _fill(g.children[0], inner, side)
        return (mu_db if t == MU else nu_db)(body, g.ann)
    return g


def _pair_walk(b: _Build, names: _Names, g: Formula, subs, control) -> int:
    """Derivation of [control] (L,) => (R,) for the two fillings of g.

    subs maps each loose index of g to (left value, right value, emit);
    emit places the node for the leaf sequent at that index.  Fixpoints
    whose body mentions a live index are unfolded through a fresh name
    on the good side, leaving an open bud for the justification scan.
    """
    L = _fill(g, subs, 0)
    R = _fill(g, subs, 1)
    s = Sequent(tuple(control), (L,), (R,))
    if L is R:
        if control:
            inner = b.add(seq((L,), (R,)), rule("id"))
            return b.add(s, rule("cw"), (inner,))
        return b.add(s, rule("id"))
    t = g.tag
    if t == VAR:
        return subs[g.payload][2](b, s)
    if t == BOX:
        return b.add(s, rule("boxR"), (_pair_walk(b, names, g.children[0], subs, control),))
    if t == DIA:
        return b.add(s, rule("diaL"), (_pair_walk(b, names, g.children[0], subs, control),))
    if t == CONJ:
        kids = []
        for m in R.children:
            src = next(c for c in g.children if _fill(c, subs, 1) is m)
            li = L.children.index(_fill(src, subs, 0))
            kid = _pair_walk(b, names, src, subs, control)
            mid = Sequent(tuple(control), (L,), (m,))
            kids.append(b.add(mid, rule("andL", member=li), (kid,)))
        return b.add(s, rule("andR"), tuple(kids))
    if t == DISJ:
        kids = []
        for m in L.children:
            src = next(c for c in g.children if _fill(c, subs, 0) is m)
            ri = R.children.index(_fill(src, subs, 1))
            kid = _pair_walk(b, names, src, subs, control)
            mid = Sequent(tuple(control), (m,), (R,))
            kids.append(b.add(mid, rule("orR", member=ri), (kid,)))
        return b.add(s, rule("orL"), tuple(kids))
    if g.ann:
        raise TransformError("annotated fixpoint inside an induction template")
    m = names.fresh()
    inner = {k + 1: v for k, v in subs.items()}
    ctrl2 = tuple(control) + (m,)

    def emit(bb, s2):
        return bb.add(s2, None)

    if t == NU:
        br = _fill(g.children[0], inner, 1)
        vr = nu_db(br, (m,))
        sub2 = dict(inner)
        sub2[0] = (L, vr, emit)
        kid = _pair_walk(b, names, g.children[0], sub2, ctrl2)
        midf = _fill(g.children[0], sub2, 1)
        mid = b.add(Sequent(ctrl2, (L,), (midf,)), rule("nuL"), (kid,))
        return b.add(s, rule("nuR^n", name=m), (mid,))
    bl = _fill(g.children[0], inner, 0)
    vl = mu_db(bl, (m,))
    sub2 = dict(inner)
    sub2[0] = (vl, R, emit)
    kid = _pair_walk(b, names, g.children[0], sub2, ctrl2)
    midf = _fill(g.children[0], sub2, 0)
    mid = b.add(Sequent(ctrl2, (midf,), (R,)), rule("muR"), (kid,))
    return b.add(s, rule("muL^n", name=m), (mid,))


def _chain_id(b: _Build, s: Sequent) -> int:
    if s.control:
        inner = b.add(seq(s.ante, s.succ), rule("id"))
        return b.add(s, rule("cw"), (inner,))
    return b.add(s, rule("id"))


def _induction_core_right(b, names, alpha, nu, leaf) -> int:
    """[()] (alpha,) => (nu,) from a leaf for [()] (alpha,) => (body alpha,)."""
    n = names.fresh()
    body = nu.children[0]
    nun = nu_db(body, (n,))
    phial = instantiate(body, alpha)
    leaf_node = leaf(b, seq((alpha,), (phial,)))
    cwn = b.add(Sequent((n,), (alpha,), (phial,)), rule("cw"), (leaf_node,))

    def emit(bb, s2):
        return bb.add(s2, None)

    mono = _pair_walk(b, names, body, {0: (alpha, nun, emit)}, (n,))
    mid = Sequent((n,), (alpha,), (instantiate(body, nun),))
    cut = b.add(mid, rule("cut"), (cwn, mono))
    return b.add(seq((alpha,), (nu,)), rule("nuR^n", name=n), (cut,))


def _induction_core_left(b, names, mu, beta, leaf) -> int:
    """[()] (mu,) => (beta,) from a leaf for [()] (body beta,) => (beta,)."""
    n = names.fresh()
    body = mu.children[0]
    mun = mu_db(body, (n,))
    phib = instantiate(body, beta)
    leaf_node = leaf(b, seq((phib,), (beta,)))
    cwn = b.add(Sequent((n,), (phib,), (beta,)), rule("cw"), (leaf_node,))

    def emit(bb, s2):
        return bb.add(s2, None)

    mono = _pair_walk(b, names, body, {0: (mun, beta, emit)}, (n,))
    mid = Sequent((n,), (instantiate(body, mun),), (beta,))
    cut = b.add(mid, rule("cut"), (mono, cwn))
    return b.add(seq((mu,), (beta,)), rule("muL^n", name=n), (cut,))


def _vchain_right(b: _Build, inst: Sequent, delta: Formula, target: Sequent) -> int:
    """(delta,) => (body delta,) from the assumption leaf for inst's premise.

    The antecedent of inst and the negated side consequents are cut back
    in one at a time, each against an identity axiom.
    """
    phid = target.succ[-1]
    psi = list(inst.succ[:-1])
    leafseq = seq(inst.ante, tuple(psi) + (phid,))
    node = b.add(leafseq, rule("b"))
    cur = leafseq
    want0 = seq(inst.ante, (phid,) + tuple(reversed(psi)))
    if cur != want0:
        node = b.add(want0, rule("e"), (node,))
        cur = want0
    for j in range(1, len(psi) + 1):
        pj = psi[j - 1]
        p0s = seq(cur.ante + (negate(pj),), cur.succ)
        p0 = b.add(p0s, rule("w"), (node,))
        ax = b.add(seq((pj, negate(pj)), ()), rule("idL"))
        new_succ = cur.succ[:-1]
        p1s = seq((pj,) + p0s.ante, new_succ)
        p1 = b.add(p1s, rule("w"), (ax,))
        cur = seq(p0s.ante, new_succ)
        node = b.add(cur, rule("cut"), (p0, p1))
    written = inst.ante + tuple(negate(x) for x in psi)
    if written != delta.children:
        cur = seq(delta.children, (phid,))
        node = b.add(cur, rule("c"), (node,))
    return b.add(target, rule("andL*", pos=0), (node,))


def _vchain_left(b: _Build, inst: Sequent, deltap: Formula, target: Sequent) -> int:
    """(body deltap,) => (deltap,) from the assumption leaf for inst's premise."""
    phid = target.ante[0]
    others = inst.ante[1:]
    psi = inst.succ
    leafseq = seq((phid,) + others, psi)
    node = b.add(leafseq, rule("b"))
    members = deltap.children
    if not members:
        return b.add(target, rule("wR"), (node,))
    negs = tuple(negate(g) for g in others)
    u_succ = tuple(reversed(negs)) + tuple(psi)
    u_ante = tuple(others) + (phid,)
    if not (u_ante == leafseq.ante and u_succ == tuple(psi)):
        node = b.add(seq(u_ante, u_succ if others else tuple(psi)), rule("e"), (node,))
    cur = seq(u_ante, u_succ) if others else seq(u_ante, tuple(psi))
    if others and b.nodes[node].sequent != cur:
        node = b.add(cur, rule("e"), (node,))
    for j in range(len(others), 0, -1):
        fj = others[j - 1]
        ax = b.add(seq((), (negate(fj), fj)), rule("idR"))
        new_ante = cur.ante[1:]
        new_succ = (negate(fj),) + cur.succ
        nxt = seq(new_ante, new_succ)
        node = b.add(nxt, rule("cut"), (ax, node))
        cur = nxt
    # cur is now (phid,) => (neg others reversed..., psi...)
    chain = []
    s0 = target
    picks = list(members)
    for t, m in enumerate(picks):
        last = t == len(picks) - 1
        if not last:
            chain.append((s0, rule("cR")))
            s0 = seq(s0.ante, s0.succ + (s0.succ[-1],))
        k = deltap.children.index(m)
        chain.append((s0, rule("orR", member=k)))
        s0 = seq(s0.ante, s0.succ[:-1] + (m,))
        if not last:
            chain.append((s0, rule("eR", to=0)))
            s0 = seq(s0.ante, (s0.succ[-1],) + s0.succ[:-1])
    if s0 != cur.sequent if False else s0 != cur:
        chain.append((s0, rule("e")))
        s0 = cur
    for sq, rl in reversed(chain):
        node = b.add(sq, rl, (node,))
    return node


def derive_induction(kind: str, inst: Sequent) -> Proof:
    """Annotated cyclic proof of inst whose only open leaf is the premise
    of the corresponding induction instance, supplied as an assumption.

    kind 'right' requires a plain greatest fixpoint in the last consequent
    position; 'left' a plain least fixpoint in the first antecedent
    position.  With side formulas present, the invariant is packaged into
    a single formula and unpacked again around the core.
    """
    if kind not in ("left", "right"):
        raise TransformError("kind must be 'left' or 'right'")
    if inst.control:
        raise TransformError("the instance sequent must carry no control")
    b = _Build()
    names = _Names()

    if kind == "right":
        if not inst.succ or inst.succ[-1].tag != NU or inst.succ[-1].ann:
            raise TransformError(
                "right induction needs a plain greatest fixpoint last on the right"
            )
        nu = inst.succ[-1]
        if len(inst.ante) == 1 and len(inst.succ) == 1:
            def leaf(bb, s2):
                return bb.add(s2, rule("b"))

            root = _induction_core_right(b, names, inst.ante[0], nu, leaf)
            return b.proof(root)
        delta = conj(inst.ante + tuple(negate(x) for x in inst.succ[:-1]))

        def leaf(bb, s2):
            return _vchain_right(bb, inst, delta, s2)

        core = _induction_core_right(b, names, delta, nu, leaf)
        intro = _delta_intro_right(b, inst, delta)
        root = b.add(inst, rule("cut"), (intro, core))
        return b.proof(root)

    if not inst.ante or inst.ante[0].tag != MU or inst.ante[0].ann:
        raise TransformError(
            "left induction needs a plain least fixpoint first on the left"
        )
    mu = inst.ante[0]
    if len(inst.ante) == 1 and len(inst.succ) == 1:
        def leaf(bb, s2):
            return bb.add(s2, rule("b"))

        root = _induction_core_left(b, names, mu, inst.succ[0], leaf)
        return b.proof(root)
    deltap = disj(tuple(negate(x) for x in inst.ante[1:]) + inst.succ)

    def leaf(bb, s2):
        return _vchain_left(bb, inst, deltap, s2)

    core = _induction_core_left(b, names, mu, deltap, leaf)
    outro = _deltap_elim_left(b, inst, deltap)
    root = b.add(inst, rule("cut"), (core, outro))
    return b.proof(root)


def _delta_intro_right(b: _Build, inst: Sequent, delta: Formula) -> int:
    """inst.ante => inst.succ[:-1] + (delta,) by one conjunction split."""
    psi = inst.succ[:-1]
    kids = []
    for g in delta.children:
        prem = seq(inst.ante, psi + (g,))
        if g in inst.ante:
            ax = b.add(seq((g,), (g,)), rule("id"))
        else:
            ax = b.add(seq((), (g, negate(g))), rule("idR"))
        kids.append(b.add(prem, rule("w"), (ax,)))
    return b.add(seq(inst.ante, psi + (delta,)), rule("andR"), tuple(kids))


def _deltap_elim_left(b: _Build, inst: Sequent, deltap: Formula) -> int:
    """(deltap,) + inst.ante[1:] => inst.succ by one disjunction split."""
    others = inst.ante[1:]
    kids = []
    for m in deltap.children:
        prem = seq((m,) + others, inst.succ)
        if negate(m) in others:
            ax = b.add(seq((negate(m), m), ()), rule("idL"))
        else:
            ax = b.add(seq((m,), (m,)), rule("id"))
        kids.append(b.add(prem, rule("w"), (ax,)))
    return b.add(seq((deltap,) + others, inst.succ), rule("orL"), tuple(kids))
