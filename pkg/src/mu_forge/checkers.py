"""Whole-proof checkers for the three systems.

check_kmu accepts finite derivations in the finitary system (structural
rules, logical rules, induction, strengthened induction, cut); buds are
rejected unless their sequents appear among the caller's assumptions.

check_cyclic accepts cyclic proofs in the annotated system: every node must
instantiate an annotated-system rule, and every bud needs an ancestor that
introduced a control name which survives down to the bud and restricts the
bud's sequent back onto that ancestor's.  The verdict detail maps each bud
to its justifying (ancestor id, name) pair.

check_coproof accepts regular proofs in the infinitary cut-free system.
Local checking is followed by the global trace condition: every infinite
branch must carry a thread whose minimal infinitely-recurring unfolding is
a greatest fixpoint on the right or a least fixpoint on the left.  The
condition is decided by composing trace profiles into a finite semigroup
and inspecting its idempotent loops; a failure reports a concrete bad
lasso.  For proofs whose graph has a single loop, lasso_thread_check
decides the same condition by cycle analysis and serves as an independent
oracle.
"""

from __future__ import annotations

from typing import Dict, Optional, Tuple

import networkx as nx

from .annot import restrict
from .models import Model, denote
from .proofcore import (
    LEFT,
    RIGHT,
    Proof,
    Sequent,
    check_local,
    principal_position,
    trace_step,
)
from .syntax import MU, NU, is_literal, plain
from .util import ACCEPT, Verdict, refuse

KMO_RULES = frozenset(
    {
        "eL", "eR", "cL", "cR", "wL", "wR", "e", "w", "c",
        "andL", "orL", "muL", "nuL", "diaL",
        "andR", "orR", "muR", "nuR", "boxR",
        "id", "idL", "idR",
    }
)

KMU_RULES = KMO_RULES | {"b", "indL", "indR", "sindL", "sindR", "cut"}

CMU_RULES = frozenset(
    {
        "eL", "eR", "cL", "cR", "wL", "wR", "b", "e", "w", "c",
        "andL", "orL", "nuL", "diaL",
        "andR", "orR", "muR", "boxR",
        "id", "idL", "idR",
        "muL^n", "nuR^n", "cw", "awL", "awR", "cut",
        "dup", "cover^n", "andL*", "diaL*", "boxR*",
    }
)


def _local_pass(p: Proof, allowed, system: str) -> Optional[Verdict]:
    for u in sorted(p.nodes):
        nd = p.nodes[u]
        if nd.is_bud:
            continue
        if nd.rule.name not in allowed:
            return refuse(
                "node %r uses %s, which is outside the %s system"
                % (u, nd.rule.name, system),
                detail=u,
            )
        prems = tuple(p.nodes[v].sequent for v in nd.children)
        v = check_local(nd.sequent, nd.rule, prems)
        if not v:
            return refuse("node %r: %s" % (u, v.reason), detail=u)
    return None


def _plain_controls(p: Proof) -> Optional[Verdict]:
    for u in sorted(p.nodes):
        if p.nodes[u].sequent.control:
            return refuse("node %r carries a nonempty control" % u, detail=u)
    return None


# --- finitary system ---------------------------------------------------------


def check_kmu(d: Proof, assumptions=()) -> Verdict:
    """Accept a finite derivation; buds must match the given assumptions."""
    if not d.is_tree:
        return refuse("finitary derivations have no back-edges")
    bad = _plain_controls(d)
    if bad is None:
        bad = _local_pass(d, KMU_RULES, "finitary")
    if bad is not None:
        return bad
    allowed = set(assumptions)
    for u in sorted(d.nodes):
        nd = d.nodes[u]
        open_leaf = nd.is_bud or (nd.rule is not None and nd.rule.name == "b")
        if open_leaf and nd.sequent not in allowed:
            return refuse("node %r is an unproved assumption" % u, detail=u)
    return ACCEPT


# --- annotated cyclic system ----------------------------------------------------


def check_cyclic(rp: Proof) -> Verdict:
    """Accept an annotated cyclic proof; detail maps each bud to the
    (ancestor id, name) pair justifying it."""
    bad = _local_pass(rp, CMU_RULES, "annotated")
    if bad is not None:
        return bad
    diagnosis: Dict[int, Tuple[int, int]] = {}
    for bud in rp.buds():
        path = rp.path_from_root(bud)
        found = None
        for l in range(len(path) - 2, -1, -1):
            vl = rp.nodes[path[l]]
            if vl.rule is None or vl.rule.name not in ("muL^n", "nuR^n"):
                continue
            n = vl.rule.get("name")
            if any(n not in rp.sequent(path[i]).control for i in range(l + 1, len(path))):
                continue
            if restrict(rp.sequent(bud), vl.sequent.control) == vl.sequent:
                found = (path[l], n)
                break
        if found is None:
            return refuse(
                "bud %r has no name-preserving ancestor that restricts onto it" % bud,
                detail=bud,
            )
        diagnosis[bud] = found
    return Verdict(True, "", diagnosis)


def is_constructive(p: Proof) -> bool:
    """At most one consequent formula everywhere."""
    return all(len(nd.sequent.succ) <= 1 for nd in p.nodes.values())


# --- infinitary cut-free system ---------------------------------------------------


def _max_rank(p: Proof) -> int:
    best = 0
    for nd in p.nodes.values():
        for f in nd.sequent.ante + nd.sequent.succ:
            if f.rank > best:
                best = f.rank
    return best


def _edge_priority(sign, rank, side, big: int) -> int:
    if sign is None:
        return big
    good = (side == RIGHT and sign == NU) or (side == LEFT and sign == MU)
    return 2 * rank + (0 if good else 1)


def _step_profiles(rp: Proof, big: int):
    """Per proof edge (u, child k) a profile: the set of (p, q, priority)
    trace moves it performs.  Bud jumps contribute identity profiles."""
    from .proofcore import FIXPOINT_RULES

    out = {}
    for u in sorted(rp.nodes):
        nd = rp.nodes[u]
        if nd.is_bud:
            if nd.backedge is not None:
                prof = frozenset(
                    (p, p, big) for p in nd.sequent.positions()
                )
                out[(u, nd.backedge)] = prof
            continue
        prems = tuple(rp.nodes[v].sequent for v in nd.children)
        prin = principal_position(nd.rule, nd.sequent)
        fix = FIXPOINT_RULES.get(nd.rule.name)
        moves = {k: set() for k in range(len(nd.children))}
        for p in nd.sequent.positions():
            marked = fix is not None and p == prin
            f = nd.sequent.at(p)
            pri = _edge_priority(fix[1] if marked else None, f.rank, p[0], big)
            for k, q in trace_step(nd.rule, p, nd.sequent, prems):
                moves[k].add((p, q, pri))
        for k, mv in moves.items():
            out[(u, nd.children[k])] = frozenset(mv)
    return out


def _compose(m1: frozenset, m2: frozenset) -> frozenset:
    by_src = {}
    for p, q, a in m2:
        by_src.setdefault(p, []).append((q, a))
    out = set()
    for p, q, a in m1:
        for r, b in by_src.get(q, ()):
            out.add((p, r, min(a, b)))
    return frozenset(out)


_CLOSURE_FUEL = 200000


def _bad_idempotent(rp: Proof, big: int):
    """Search the profile semigroup for an idempotent loop without any even
    self-thread; returns (node, witness cycle) or None."""
    gens = _step_profiles(rp, big)
    elems = {}
    for (u, v), prof in gens.items():
        key = (u, v, prof)
        elems.setdefault(key, (u, v))
    paths = {key: (key[0], key[1], (key[1],)) for key in elems}
    work = list(elems)
    seen = set(elems)
    fuel = _CLOSURE_FUEL
    while work:
        fuel -= 1
        if fuel < 0:
            raise RuntimeError("profile closure exceeded its budget")
        u1, v1, prof1 = key1 = work.pop()
        for (u2, v2), gprof in gens.items():
            if u2 != v1:
                continue
            prof = _compose(prof1, gprof)
            key = (u1, v2, prof)
            if key in seen:
                continue
            seen.add(key)
            paths[key] = (u1, v2, paths[key1][2] + (v2,))
            work.append(key)
    for (u, v, prof) in seen:
        if u != v:
            continue
        if _compose(prof, prof) != prof:
            continue
        if any(p == q and a % 2 == 0 for p, q, a in prof):
            continue
        return u, paths[(u, v, prof)][2]
    return None


def check_coproof(rp: Proof) -> Verdict:
    """Accept a regular proof in the infinitary cut-free system."""
    bad = _plain_controls(rp)
    if bad is None:
        bad = _local_pass(rp, KMO_RULES, "infinitary")
    if bad is not None:
        return bad
    for u in sorted(rp.nodes):
        nd = rp.nodes[u]
        if nd.is_bud and nd.backedge is None:
            return refuse("node %r is an open bud" % u, detail=u)
        if nd.rule is not None and nd.rule.name in ("id", "idL", "idR"):
            s = nd.sequent
            if not all(is_literal(f) for f in s.ante + s.succ):
                return refuse(
                    "node %r: identity axioms are restricted to literals" % u,
                    detail=u,
                )
    big = 2 * _max_rank(rp) + 3
    hit = _bad_idempotent(rp, big)
    if hit is not None:
        u, cycle = hit
        stem = nx.shortest_path(_proof_digraph(rp), rp.root, u)
        return refuse(
            "branch through node %r has no accepting thread" % u,
            detail={"stem": tuple(stem), "loop": tuple(cycle)},
        )
    return ACCEPT


def _proof_digraph(rp: Proof) -> nx.DiGraph:
    g = nx.DiGraph()
    g.add_nodes_from(rp.nodes)
    for u, nd in rp.nodes.items():
        for v in nd.children:
            g.add_edge(u, v)
        if nd.backedge is not None:
            g.add_edge(u, nd.backedge)
    return g


def lasso_thread_check(rp: Proof) -> Verdict:
    """Decide the trace condition for a proof whose graph contains exactly
    one cycle, by searching the loop's position graph for a recurrent
    even-priority thread.  Serves as an independent oracle for
    check_coproof on that class."""
    g = _proof_digraph(rp)
    cycles = list(nx.simple_cycles(g))
    if len(cycles) != 1:
        raise ValueError("lasso_thread_check expects exactly one cycle")
    loop = cycles[0]
    big = 2 * _max_rank(rp) + 3
    profs = _step_profiles(rp, big)
    t = len(loop)
    pg = nx.DiGraph()
    prios = set()
    for i in range(t):
        u, v = loop[i], loop[(i + 1) % t]
        for p, q, a in profs[(u, v)]:
            pg.add_edge((i, p), ((i + 1) % t, q), pri=a)
            prios.add(a)
    for m in sorted(a for a in prios if a % 2 == 0):
        sub = nx.DiGraph(
            (x, y) for x, y, d in pg.edges(data=True) if d["pri"] >= m
        )
        for comp in nx.strongly_connected_components(sub):
            if len(comp) == 1 and not sub.has_edge(*list(comp) * 2):
                continue
            if any(
                pg.edges[x, y]["pri"] == m
                for x in comp
                for y in sub.successors(x)
                if y in comp
            ):
                return ACCEPT
    return refuse("the unique loop carries no accepting thread")


# --- semantics -----------------------------------------------------------------


def sequent_holds(s: Sequent, m: Model) -> bool:
    """True iff in m every vertex satisfying the whole antecedent satisfies
    part of the consequent.  Annotations are semantically transparent."""
    have = frozenset(m.ids)
    for f in s.ante:
        have = have & denote(plain(f), m)
        if not have:
            return True
    need = frozenset()
    for f in s.succ:
        need = need | denote(plain(f), m)
    return have <= need


def check(system: str, p: Proof, assumptions=()) -> Verdict:
    """Dispatch on the system name used by the command line."""
    if system == "kmu":
        return check_kmu(p, assumptions)
    if system == "cmu":
        return check_cyclic(p)
    if system == "kmo":
        return check_coproof(p)
    return refuse("unknown system %r (expected kmu, cmu, or kmo)" % system)
