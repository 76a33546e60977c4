"""Names, annotations, and the orders they induce.

Names are plain integers (printed through show_name as n0, n1, ...).  An
annotation is a finite repeat-free tuple of names; the empty tuple is the
trivial annotation.  Annotated formulas carry annotations on fixpoint
quantifiers, sequents carry a control annotation, and every formula
annotation in a sequent must be a subsequence of the control.

Three orders live here:

* kb_less: the Kleene-Brouwer order on subsequences of a fixed control c.
  a <=_c b iff b is a prefix of a, or a branches left of b inside c.
* ann_less: the lift of the KB order to linearly annotated formulas.
  Formulas with identical plain skeletons compare lexicographically on
  their annotation chains, innermost annotation most significant.
* prefix order on annotations, used for template invariants (plain tuple
  slicing suffices, no helper needed).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

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
    mu_db,
    nu_db,
    var,
    walk,
)
from .util import is_subsequence, subseq_restrict

Annotation = tuple  # of int names, repeat-free


def check_annotation(a) -> tuple:
    a = tuple(a)
    if len(set(a)) != len(a):
        raise ValueError("annotation repeats a name: %r" % (a,))
    return a


def next_name(*groups: Iterable[int]) -> int:
    """Smallest integer name exceeding every name in the given groups."""
    top = -1
    for g in groups:
        for n in g:
            if n > top:
                top = n
    return top + 1


def kb_less(a, b, c) -> bool:
    """The Kleene-Brouwer order: a <=_c b iff b is a prefix of a or a is
    to the left of b in c.  The empty annotation is the maximum.  Raises
    ValueError unless a and b are subsequences of the repeat-free c."""
    a, b, c = tuple(a), tuple(b), check_annotation(c)
    if not is_subsequence(a, c):
        raise ValueError("first annotation is not a subsequence of the control")
    if not is_subsequence(b, c):
        raise ValueError("second annotation is not a subsequence of the control")
    if b == a[: len(b)]:
        return True
    pos = {n: i for i, n in enumerate(c)}
    for x, y in zip(a, b):
        if x != y:
            return pos[x] < pos[y]
    return False  # a is a proper prefix of b


def kb_strict(a, b, c) -> bool:
    return tuple(a) != tuple(b) and kb_less(a, b, c)


def covered(n: int, fs: Iterable[Formula]) -> bool:
    """A name is covered in a group of formulas if it occurs in some
    annotation and is never the last element of any annotation."""
    seen = False
    for f in fs:
        for g in walk(f):
            a = g.ann
            for i, m in enumerate(a):
                if m == n:
                    seen = True
                    if len(a) <= i + 1:
                        return False
    return seen


def restrict_formula(f: Formula, c) -> Formula:
    """Drop every name not in c from every annotation inside f."""
    keep = frozenset(c)
    memo = {}

    def go(g: Formula) -> Formula:
        h = memo.get(g)
        if h is not None:
            return h
        t = g.tag
        if t in (VAR, NEGVAR):
            h = g
        elif t == BOX:
            h = box(go(g.children[0]))
        elif t == DIA:
            h = dia(go(g.children[0]))
        elif t == CONJ:
            h = conj(tuple(go(ch) for ch in g.children))
        elif t == DISJ:
            h = disj(tuple(go(ch) for ch in g.children))
        else:
            a = tuple(n for n in g.ann if n in keep)
            body = go(g.children[0])
            h = mu_db(body, a) if t == MU else nu_db(body, a)
        memo[g] = h
        return h

    return go(f)


def restrict(s, c):
    """Restrict an annotated sequent to the names in c: the control keeps
    its order, every formula annotation is filtered the same way."""
    keep = tuple(c)
    return type(s)(
        subseq_restrict(tuple(s.control), keep),
        tuple(restrict_formula(f, keep) for f in s.ante),
        tuple(restrict_formula(f, keep) for f in s.succ),
    )


# --- linear decomposition ---------------------------------------------------


def _sign_tag(sign) -> int:
    if sign in (MU, NU):
        return sign
    if sign == "mu":
        return MU
    if sign == "nu":
        return NU
    raise ValueError("quantifier must be mu or nu")


def _tops(f: Formula):
    """Distinct maximal annotated subtrees of f, in discovery order."""
    out = []
    found = set()
    seen = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if g in seen:
            continue
        seen.add(g)
        if g.ann:
            if g not in found:
                found.add(g)
                out.append(g)
        else:
            stack.extend(g.children)
    return out


def _contains(t: Formula, u: Formula) -> bool:
    for g in walk(t):
        if g is u:
            return True
    return False


@dataclass(frozen=True)
class LinearDecomposition:
    """Witness that a formula is linearly sign-annotated.

    The formula equals the base with part 1 substituted for its hole, part
    2 substituted into part 1's hole, and so on: parts are listed outermost
    first.  Hole variables are encoded as extra loose de Bruijn indices so
    that decompositions of distinct formulas with equal skeletons produce
    identical base and body objects.  In the base, the hole for part j is
    index j-1 at the root; in the body of part i (the quantifier's body,
    annotation stripped), index 0 is the fixpoint variable and the hole
    for part j is index j-i at the root.

    annotations() lists the chain outermost first; comparisons through
    ann_less weigh the innermost entry most heavily.
    """

    sign: int
    base: Formula
    parts: tuple  # ((body: Formula, ann: tuple[int, ...]), ...)

    def annotations(self) -> tuple:
        return tuple(a for _, a in self.parts)

    def __len__(self) -> int:
        return len(self.parts)


def linear_decompose(f: Formula, sign) -> Optional[LinearDecomposition]:
    """Decompose f as a chain of sign-annotated quantifiers over a plain
    skeleton, or return None when no such chain exists.

    The chain is unique when it exists: its links are the maximal annotated
    subtrees, ordered by containment, each link's body holding the next.
    Every annotated subtree must be a link (so all annotated quantifiers
    carry the requested sign), every link must be closed, and the link
    annotations must be pairwise disjoint.
    """
    sign = _sign_tag(sign)
    if f.loose:
        return None
    chain = []
    level_tops = []
    work = f
    while True:
        ts = _tops(work)
        if not ts:
            break
        mx = None
        for t in ts:
            if all(u is t or _contains(t, u) for u in ts):
                mx = t
                break
        if mx is None or mx.tag != sign or mx.loose:
            return None
        level_tops.append(ts)
        chain.append(mx)
        work = mx.children[0]
    links = set(chain)
    for ts in level_tops:
        for t in ts:
            if t not in links:
                return None
    used = set()
    for g in chain:
        if used & set(g.ann):
            return None
        used |= set(g.ann)

    index = {g: j for j, g in enumerate(chain, start=1)}

    def rebuild(g: Formula, depth: int, bias: int, memo) -> Formula:
        j = index.get(g)
        if j is not None:
            return var(depth + j - bias)
        key = (g, depth)
        h = memo.get(key)
        if h is not None:
            return h
        t = g.tag
        if t in (VAR, NEGVAR):
            h = g
        elif t == BOX:
            h = box(rebuild(g.children[0], depth, bias, memo))
        elif t == DIA:
            h = dia(rebuild(g.children[0], depth, bias, memo))
        elif t == CONJ:
            h = conj(tuple(rebuild(ch, depth, bias, memo) for ch in g.children))
        elif t == DISJ:
            h = disj(tuple(rebuild(ch, depth, bias, memo) for ch in g.children))
        else:
            body = rebuild(g.children[0], depth + 1, bias, memo)
            h = mu_db(body) if t == MU else nu_db(body)
        memo[key] = h
        return h

    base = rebuild(f, 0, 1, {})
    parts = tuple(
        (rebuild(g.children[0], 0, i, {}), g.ann)
        for i, g in enumerate(chain, start=1)
    )
    return LinearDecomposition(sign, base, parts)


def ann_less(x: Formula, y: Formula, c, sign=None) -> bool:
    """Strict comparison of linearly annotated formulas over the control c.

    Both formulas must decompose under a common quantifier with the same
    base and the same part bodies; the annotation chains then compare
    lexicographically by the strict KB order, innermost link first.
    Returns False whenever the decompositions do not match up.
    """
    signs = (MU, NU) if sign is None else (_sign_tag(sign),)
    for s in signs:
        dx = linear_decompose(x, s)
        dy = linear_decompose(y, s)
        if dx is None or dy is None:
            continue
        if dx.base is not dy.base or len(dx.parts) != len(dy.parts):
            continue
        if any(p is not q for (p, _), (q, _) in zip(dx.parts, dy.parts)):
            continue
        for (_, a), (_, b) in zip(reversed(dx.parts), reversed(dy.parts)):
            if a != b:
                return kb_strict(a, b, c)
        return False
    return False


def ann_le(x: Formula, y: Formula, c, sign=None) -> bool:
    return x is y or ann_less(x, y, c, sign)
