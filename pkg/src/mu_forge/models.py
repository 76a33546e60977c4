"""Finite tree models and the two semantics.

denote computes Knaster-Tarski denotations by fixpoint iteration over
bitmask vertex sets. eval_game plays the evaluation parity game between
Verifier (even, greatest fixpoints) and Falsifier and extracts a
positional strategy as a Verification graph; on a loss it certifies the
negation instead. check_verification validates such a graph against the
six local clauses and the global parity condition on cycles.
"""

from __future__ import annotations

import json
import random
from collections import deque
from dataclasses import dataclass

import networkx as nx

from .syntax import (
    BOX, CONJ, DIA, DISJ, MU, NU, NEGVAR, VAR,
    Formula, closure, negate, show, unfold,
)
from .util import ACCEPT, Verdict, refuse

__all__ = [
    "Model", "make_model", "model_from_json", "model_to_json",
    "random_model", "denote", "Verification", "GameResult", "eval_game",
    "check_verification",
]


@dataclass(frozen=True)
class Model:
    """Finite tree. ids[0] is not required to be the root; root names it.
    labels[i] is the variable set at ids[i]; children[i] its child ids."""

    root: str
    ids: tuple
    labels: tuple
    children: tuple

    def __post_init__(self):
        n = len(self.ids)
        if not (n == len(self.labels) == len(self.children)):
            raise ValueError("ragged model components")
        pos = {v: i for i, v in enumerate(self.ids)}
        if len(pos) != n:
            raise ValueError("duplicate vertex id")
        if self.root not in pos:
            raise ValueError("root is not a vertex")
        seen_child = set()
        for kids in self.children:
            for k in kids:
                if k not in pos:
                    raise ValueError(f"unknown child {k!r}")
                if k == self.root or k in seen_child:
                    raise ValueError("not a tree: duplicate parent or root child")
                seen_child.add(k)
        if len(seen_child) != n - 1:
            raise ValueError("not a tree: unreachable vertices")
        object.__setattr__(self, "_pos", pos)

    def __len__(self):
        return len(self.ids)

    def index(self, v: str) -> int:
        return self._pos[v]

    def label(self, v: str) -> frozenset:
        return self.labels[self._pos[v]]

    def kids(self, v: str) -> tuple:
        return self.children[self._pos[v]]


def make_model(root: str, nodes) -> Model:
    """nodes: iterable of (id, label iterable, children iterable)."""
    ids, labels, children = [], [], []
    for vid, lab, kids in nodes:
        ids.append(vid)
        labels.append(frozenset(lab))
        children.append(tuple(kids))
    return Model(root, tuple(ids), tuple(labels), tuple(children))


def model_to_json(m: Model) -> dict:
    return {
        "root": m.root,
        "nodes": [
            {"id": v, "label": sorted(m.labels[i]), "children": list(m.children[i])}
            for i, v in enumerate(m.ids)
        ],
    }


def model_from_json(doc) -> Model:
    if isinstance(doc, str):
        doc = json.loads(doc)
    return make_model(
        doc["root"],
        [(nd["id"], nd.get("label", ()), nd.get("children", ()))
         for nd in doc["nodes"]],
    )


def random_model(seed: int, max_vertices: int, var_pool) -> Model:
    """Deterministic random tree with independently sampled labels."""
    if max_vertices < 1:
        raise ValueError("max_vertices must be at least 1")
    rng = random.Random(seed)
    pool = tuple(var_pool)
    n = rng.randint(1, max_vertices)
    kids = [[] for _ in range(n)]
    for i in range(1, n):
        kids[rng.randrange(i)].append(f"v{i}")
    labels = [frozenset(x for x in pool if rng.random() < 0.5) for _ in range(n)]
    return Model("v0",
                 tuple(f"v{i}" for i in range(n)),
                 tuple(labels),
                 tuple(tuple(k) for k in kids))


# ----------------------------------------------------------- denotation

def denote(a: Formula, m: Model) -> frozenset:
    """Vertices whose subtree satisfies a. Free variables are read from
    the labels; fixpoints iterate to stabilization."""
    n = len(m)
    full = (1 << n) - 1
    masks = {}
    for i, lab in enumerate(m.labels):
        for x in lab:
            masks[x] = masks.get(x, 0) | (1 << i)
    kidx = [tuple(m.index(k) for k in kids) for kids in m.children]
    memo = {}

    def den(f: Formula, env: tuple) -> int:
        key = (f, env[len(env) - f.loose:] if f.loose else ())
        got = memo.get(key)
        if got is not None:
            return got
        t = f.tag
        if t == VAR:
            p = f.payload
            out = env[-(p + 1)] if isinstance(p, int) else masks.get(p, 0)
        elif t == NEGVAR:
            out = full ^ masks.get(f.payload, 0)
        elif t == CONJ:
            out = full
            for c in f.children:
                out &= den(c, env)
        elif t == DISJ:
            out = 0
            for c in f.children:
                out |= den(c, env)
        elif t == BOX or t == DIA:
            s = den(f.children[0], env)
            out = 0
            if t == BOX:
                for i in range(n):
                    if all(s >> j & 1 for j in kidx[i]):
                        out |= 1 << i
            else:
                for i in range(n):
                    if any(s >> j & 1 for j in kidx[i]):
                        out |= 1 << i
        else:
            body = f.children[0]
            x = 0 if t == MU else full
            while True:
                nxt = den(body, env + (x,))
                if nxt == x:
                    break
                x = nxt
            out = x
        memo[key] = out
        return out

    bits = den(a, ())
    return frozenset(v for i, v in enumerate(m.ids) if bits >> i & 1)


# ------------------------------------------------------ evaluation game

@dataclass(frozen=True)
class Verification:
    """Strategy graph over (closure formula, vertex id) pairs.

    edges lists each node once with its chosen successors; priorities
    pair each node with its parity rank (even = greatest fixpoint)."""

    subject: Formula
    root: tuple
    edges: tuple
    priorities: tuple

    def succ_map(self) -> dict:
        return dict(self.edges)


@dataclass(frozen=True)
class GameResult:
    holds: bool
    subject: Formula
    strategy: Verification


def _priority_of(g: Formula, insignificant: int) -> int:
    if g.tag == NU:
        return 2 * g.rank
    if g.tag == MU:
        return 2 * g.rank + 1
    return insignificant


def _insignificant(cl) -> int:
    qr = [g.rank for g in cl if g.tag in (MU, NU)]
    return 2 * max(qr, default=0) + 2


def _build_game(a: Formula, m: Model):
    """Positions (formula, vertex); Verifier = player 0."""
    cl = closure(a)
    insig = _insignificant(cl)
    nodes, owner, prio, succ = [], [], [], []
    index = {}

    def pos(g, v):
        key = (g, v)
        i = index.get(key)
        if i is None:
            i = len(nodes)
            index[key] = i
            nodes.append(key)
            owner.append(0)
            prio.append(_priority_of(g, insig))
            succ.append(())
        return i

    i = 0
    pos(a, m.root)
    while i < len(nodes):
        g, v = nodes[i]
        t = g.tag
        if t == VAR:
            holds = g.payload in m.label(v)
            owner[i] = 1 if holds else 0
        elif t == NEGVAR:
            holds = g.payload not in m.label(v)
            owner[i] = 1 if holds else 0
        elif t == DISJ:
            owner[i] = 0
            succ[i] = tuple(pos(c, v) for c in g.children)
        elif t == CONJ:
            owner[i] = 1
            succ[i] = tuple(pos(c, v) for c in g.children)
        elif t == DIA:
            owner[i] = 0
            succ[i] = tuple(pos(g.children[0], w) for w in m.kids(v))
        elif t == BOX:
            owner[i] = 1
            succ[i] = tuple(pos(g.children[0], w) for w in m.kids(v))
        else:
            owner[i] = 0
            succ[i] = (pos(unfold(g), v),)
        i += 1
    return nodes, owner, prio, succ


def _attract(active, owner, succ, pred, player, target):
    """Backward attractor of target for player inside active; returns the
    attracted set and the forced moves for player."""
    out_deg = {}
    attracted = set(target)
    strat = {}
    queue = list(target)
    while queue:
        v = queue.pop()
        for u in pred[v]:
            if u not in active or u in attracted:
                continue
            if owner[u] == player:
                attracted.add(u)
                strat[u] = v
                queue.append(u)
            else:
                d = out_deg.get(u)
                if d is None:
                    d = sum(1 for w in succ[u] if w in active)
                d -= 1
                out_deg[u] = d
                if d == 0:
                    attracted.add(u)
                    queue.append(u)
    return attracted, strat


def _zielonka(active, owner, prio, succ, pred):
    """Min-parity solver. Returns (W0, W1, strat) where strat holds one
    winning move for the region owner at each owned winning node."""
    if not active:
        return set(), set(), {}
    d = min(prio[v] for v in active)
    i = d & 1
    target = {v for v in active if prio[v] == d}
    A, astrat = _attract(active, owner, succ, pred, i, target)
    w0, w1, strat = _zielonka(active - A, owner, prio, succ, pred)
    wi, wo = (w0, w1) if i == 0 else (w1, w0)
    if not wo:
        strat.update(astrat)
        for v in target:
            if owner[v] == i and v not in strat:
                for w in succ[v]:
                    if w in active:
                        strat[v] = w
                        break
        win = set(active)
        return (win, set(), strat) if i == 0 else (set(), win, strat)
    B, bstrat = _attract(active, owner, succ, pred, 1 - i, wo)
    w0b, w1b, strat2 = _zielonka(active - B, owner, prio, succ, pred)
    # winner 1-i keeps the sub-strategy on wo, the attractor moves on B,
    # and the recursive strategy elsewhere
    final = {v: w for v, w in strat.items() if v in wo}
    final.update(bstrat)
    final.update(strat2)
    if i == 0:
        return w0b, w1b | B, final
    return w0b | B, w1b, final


def _solve(a: Formula, m: Model):
    nodes, owner, prio, succ = _build_game(a, m)
    pred = [[] for _ in nodes]
    for u, ws in enumerate(succ):
        for w in ws:
            pred[w].append(u)
    active = set(range(len(nodes)))
    # stuck positions lose immediately; peel their attractors off first,
    # leaving a dead-end-free subgame for the recursive solver
    dead_adam = {v for v in active if not succ[v] and owner[v] == 1}
    a0, s0 = _attract(active, owner, succ, pred, 0, dead_adam)
    active -= a0
    dead_eve = {v for v in active if not succ[v] and owner[v] == 0}
    a1, _ = _attract(active, owner, succ, pred, 1, dead_eve)
    active -= a1
    w0, w1, strat = _zielonka(active, owner, prio, succ, pred)
    w0 |= a0
    strat.update(s0)
    return nodes, owner, prio, succ, w0, strat


def _extract_verification(a: Formula, m: Model, solved=None) -> Verification:
    nodes, owner, prio, succ, w0, strat = solved or _solve(a, m)
    start = 0
    if start not in w0:
        raise ValueError("no verification: the formula does not hold")
    edges = {}
    prios = {}
    todo = [start]
    while todo:
        v = todo.pop()
        if nodes[v] in edges:
            continue
        if owner[v] == 0 and succ[v]:
            nxt = (strat[v],)
        else:
            nxt = succ[v]
        edges[nodes[v]] = tuple(nodes[w] for w in nxt)
        prios[nodes[v]] = prio[v]
        todo.extend(w for w in nxt if nodes[w] not in edges)
    order = sorted(edges, key=lambda nd: (str(nd[1]), show(nd[0])))
    return Verification(
        subject=a,
        root=nodes[start],
        edges=tuple((nd, edges[nd]) for nd in order),
        priorities=tuple((nd, prios[nd]) for nd in order),
    )


def eval_game(a: Formula, m: Model) -> GameResult:
    """Game evaluation at the root. On a loss the strategy certifies the
    negation, so the result is checkable either way."""
    solved = _solve(a, m)
    if 0 in solved[4]:
        return GameResult(True, a, _extract_verification(a, m, solved))
    na = negate(a)
    return GameResult(False, na, _extract_verification(na, m))


# ------------------------------------------------- verification checking

def _legal_succ(g: Formula, v: str, m: Model):
    """The full legal successor set per the game clauses; None for
    literals (no successors allowed)."""
    t = g.tag
    if t in (VAR, NEGVAR):
        return None
    if t in (CONJ, DISJ):
        return {(c, v) for c in g.children}
    if t in (BOX, DIA):
        return {(g.children[0], w) for w in m.kids(v)}
    return {(unfold(g), v)}


def check_verification(ver: Verification, a: Formula, m: Model) -> Verdict:
    """Local clauses at every listed node, then the parity condition on
    every cycle reachable from the root."""
    succ = dict(ver.edges)
    if len(succ) != len(ver.edges):
        return refuse("duplicate node in edge list")
    root = (a, m.root)
    if ver.root != root or root not in succ:
        return refuse("root: verification does not start at (formula, root)",
                      ver.root)
    vset = set(m.ids)
    for nd, out in ver.edges:
        g, v = nd
        if v not in vset:
            return refuse("unknown vertex", nd)
        t = g.tag
        legal = _legal_succ(g, v, m)
        if legal is None:
            holds = (g.payload in m.label(v)) == (t == VAR)
            if not holds:
                return refuse("clause 1: literal fails at vertex", nd)
            if out:
                return refuse("clause 1: literal with successors", nd)
            continue
        extra = set(out) - legal
        if extra:
            return refuse("illegal successor", (nd, min(map(str, extra))))
        missing = [s for s in out if s not in succ]
        if missing:
            return refuse("successor not a node", (nd, missing[0]))
        if t == DISJ:
            if not out:
                return refuse("clause 2: no disjunct chosen", nd)
        elif t == CONJ:
            if set(out) != legal:
                return refuse("clause 3: missing conjunct successor", nd)
        elif t == DIA:
            if not out:
                return refuse("clause 4: no child chosen", nd)
        elif t == BOX:
            if set(out) != legal:
                return refuse("clause 5: missing child successor", nd)
        else:
            if set(out) != legal:
                return refuse("clause 6: missing unfolding", nd)
    # reachable subgraph
    reach = set()
    todo = [root]
    while todo:
        nd = todo.pop()
        if nd in reach:
            continue
        reach.add(nd)
        todo.extend(succ[nd])
    insig = _insignificant(closure(a))
    g = nx.DiGraph()
    g.add_nodes_from(reach)
    for nd in reach:
        for s in succ[nd]:
            g.add_edge(nd, s)
    bad = _odd_dominated_cycle(g, insig)
    if bad is not None:
        return refuse("cycle dominated by a least fixpoint", bad)
    return ACCEPT


def _odd_dominated_cycle(g: nx.DiGraph, insig: int):
    """A cycle whose minimal priority is odd, or None. Even minima of a
    component cannot dominate a bad cycle, so they are deleted and the
    remainder re-decomposed; an odd minimum in a nontrivial component
    lies on a cycle it dominates."""
    for comp in nx.strongly_connected_components(g):
        if len(comp) == 1:
            nd = next(iter(comp))
            if not g.has_edge(nd, nd):
                continue
        sub = g.subgraph(comp).copy()
        lo = min(_priority_of(nd[0], insig) for nd in sub)
        lonodes = [nd for nd in sub if _priority_of(nd[0], insig) == lo]
        if lo & 1:
            for nd in lonodes:
                cyc = _cycle_through(sub, nd)
                if cyc is not None:
                    return cyc
            continue
        sub.remove_nodes_from(lonodes)
        inner = _odd_dominated_cycle(sub, insig)
        if inner is not None:
            return inner
    return None


def _cycle_through(g: nx.DiGraph, start):
    """A simple cycle through start inside g, as a node list, or None."""
    parent = {start: None}
    queue = deque((start,))
    while queue:
        u = queue.popleft()
        for w in g.successors(u):
            if w == start:
                path = [u]
                while parent[path[-1]] is not None:
                    path.append(parent[path[-1]])
                return list(reversed(path))
            if w not in parent:
                parent[w] = u
                queue.append(w)
    return None
