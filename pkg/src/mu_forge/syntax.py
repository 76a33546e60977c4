"""Hash-consed syntax of the modal mu-calculus.

Formulas are maximally shared: every constructor interns its result, so
structurally equal formulas (up to alpha-equivalence and reordering of
the conjunction/disjunction sets) are the same Python object and
equality is pointer equality. Binders are de Bruijn indices internally;
the parser and printer exchange named variables.

Surface grammar:

    formula := 'mu' VAR '.' formula | 'nu' VAR '.' formula
             | '[]' formula | '<>' formula
             | '/\\' '{' list? '}' | '\\/' '{' list? '}'
             | '~' VAR | VAR | '(' formula ')'

with sugar T = /\\{}, F = \\/{}, infix '&' and '|' for binary sets
(& binds tighter), and nabla_{lits}(G;D) expanding to the conjunction
of the literals, the <>-images of G and [] of the disjunction of D.
Annotated quantifiers are written mu^{n0,n1} x. ...; names are
nonnegative integers rendered as n0, n1, ...

Prefix operators take the shortest argument ('[]a & b' is '([]a) & b')
except quantifiers, whose body extends as far as possible.
"""

from __future__ import annotations

import random
import threading
from dataclasses import dataclass, field

__all__ = [
    "Formula", "VAR", "NEGVAR", "BOX", "DIA", "CONJ", "DISJ", "MU", "NU",
    "var", "neg_var", "box", "dia", "conj", "disj", "mu", "nu",
    "mu_db", "nu_db", "top", "bot", "with_ann",
    "negate", "substitute", "instantiate", "unfold", "unfold_with",
    "abstract", "rank", "free_names", "plain", "is_plain", "is_literal",
    "walk", "skey",
    "parse_formula", "show", "show_name", "parse_name",
    "ParseError", "PositivityError", "CoverError", "CertificateError",
    "is_quantifier", "immediate_subformulas", "closure", "closure_graph",
    "classify_fragment", "FragmentInfo", "is_guarded", "var_guarded",
    "syntactic_guarded",
    "cover", "decompose_cover",
    "PfCert", "pf_certificate_check", "auto_pf_cert", "pf_fresh_name",
    "random_formula",
]

# ------------------------------------------------------------------ tags

VAR, NEGVAR, BOX, DIA, CONJ, DISJ, MU, NU = range(8)

_TAG_NAME = ("Var", "NegVar", "Box", "Dia", "Conj", "Disj", "Mu", "Nu")


class MuForgeError(Exception):
    pass


class ParseError(MuForgeError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


class PositivityError(MuForgeError):
    """A bound variable occurs under negation."""

    def __init__(self, name: str, binder: str = ""):
        where = f" in binder '{binder}'" if binder else ""
        super().__init__(f"negated occurrence of bound variable '{name}'{where}")
        self.name = name


class CoverError(MuForgeError):
    pass


class CertificateError(MuForgeError):
    def __init__(self, message: str, clause: int):
        super().__init__(f"clause {clause}: {message}")
        self.clause = clause


class Formula:
    """A canonical formula node. Use the module-level constructors.

    payload: de Bruijn index (int) or free-variable name (str) for VAR;
        name (str) for NEGVAR; None otherwise.
    children: canonical tuple of sub-formulas (sorted set for CONJ/DISJ,
        singleton body for BOX/DIA/MU/NU).
    ann: annotation of a quantifier, a tuple of names (ints); () = plain.
    rank: the complexity measure (literals 0, modalities and set
        operators add one over the maximum, quantifiers body+1).
    loose: number of de Bruijn indices visible from outside (max+1).
    """

    __slots__ = ("tag", "payload", "children", "ann", "rank", "loose",
                 "_key", "_neg", "_frees")

    def __init__(self, tag, payload, children, ann):
        self.tag = tag
        self.payload = payload
        self.children = children
        self.ann = ann
        self._key = None
        self._neg = None
        self._frees = None
        if tag in (VAR, NEGVAR):
            self.rank = 0
            self.loose = payload + 1 if isinstance(payload, int) else 0
        elif tag in (BOX, DIA):
            self.rank = children[0].rank + 1
            self.loose = children[0].loose
        elif tag in (CONJ, DISJ):
            self.rank = max((c.rank + 1 for c in children), default=0)
            self.loose = max((c.loose for c in children), default=0)
        else:  # MU, NU
            self.rank = children[0].rank + 1
            self.loose = max(children[0].loose - 1, 0)

    def __repr__(self):
        return f"<{_TAG_NAME[self.tag]} {show(self)}>"


_table: dict = {}
_lock = threading.Lock()


def _mk(tag, payload, children=(), ann=()) -> Formula:
    key = (tag, payload, children, ann)
    f = _table.get(key)
    if f is None:
        with _lock:
            f = _table.get(key)
            if f is None:
                f = Formula(tag, payload, children, ann)
                _table[key] = f
    return f


def skey(f: Formula):
    """Structural total-order key: (rank, tag, annotation, payload/children).

    Orders the members of conjunction/disjunction sets and fixes every
    enumeration that must be deterministic (printing, rule premises,
    principal-formula selection).
    """
    k = f._key
    if k is None:
        if f.tag in (VAR, NEGVAR):
            p = f.payload
            pk = (0, p, "") if isinstance(p, int) else (1, 0, p)
            k = (f.rank, f.tag, f.ann, pk)
        else:
            k = (f.rank, f.tag, f.ann, tuple(skey(c) for c in f.children))
        f._key = k
    return k


# ---------------------------------------------------------- constructors

def var(x) -> Formula:
    """Variable: free when x is a name (str), bound when a de Bruijn index."""
    if not isinstance(x, (int, str)):
        raise TypeError(f"variable must be int index or str name, got {x!r}")
    if isinstance(x, int) and x < 0:
        raise ValueError("negative de Bruijn index")
    return _mk(VAR, x)


def neg_var(x: str) -> Formula:
    if not isinstance(x, str):
        raise PositivityError(str(x))
    return _mk(NEGVAR, x)


def box(a: Formula) -> Formula:
    return _mk(BOX, None, (a,))


def dia(a: Formula) -> Formula:
    return _mk(DIA, None, (a,))


def _set_children(items):
    return tuple(sorted(set(items), key=skey))


def conj(items) -> Formula:
    return _mk(CONJ, None, _set_children(items))


def disj(items) -> Formula:
    return _mk(DISJ, None, _set_children(items))


def top() -> Formula:
    return conj(())


def bot() -> Formula:
    return disj(())


def mu_db(body: Formula, ann=()) -> Formula:
    """Least fixpoint over a de Bruijn body (index 0 is the bound variable)."""
    return _mk(MU, None, (body,), tuple(ann))


def nu_db(body: Formula, ann=()) -> Formula:
    return _mk(NU, None, (body,), tuple(ann))


def mu(x: str, a: Formula, ann=()) -> Formula:
    """Named binder; raises PositivityError if x occurs negated in a."""
    return mu_db(abstract(a, x), ann)


def nu(x: str, a: Formula, ann=()) -> Formula:
    return nu_db(abstract(a, x), ann)


def with_ann(f: Formula, ann) -> Formula:
    if f.tag not in (MU, NU):
        raise ValueError("only quantifiers carry annotations")
    ann = tuple(ann)
    if len(set(ann)) != len(ann):
        raise ValueError(f"repeating annotation {ann}")
    return _mk(f.tag, None, f.children, ann)


def is_literal(f: Formula) -> bool:
    return f.tag in (VAR, NEGVAR)


def is_quantifier(f: Formula) -> bool:
    return f.tag in (MU, NU)


# ------------------------------------------------------- transformations

_DUAL = {VAR: VAR, NEGVAR: NEGVAR, BOX: DIA, DIA: BOX,
         CONJ: DISJ, DISJ: CONJ, MU: NU, NU: MU}


def negate(f: Formula) -> Formula:
    """The negation involution. Bound variables are fixed (bodies stay
    positive); free variables flip polarity; every operator dualizes."""
    n = f._neg
    if n is not None:
        return n
    if f.tag == VAR:
        n = f if isinstance(f.payload, int) else _mk(NEGVAR, f.payload)
    elif f.tag == NEGVAR:
        n = _mk(VAR, f.payload)
    elif f.tag in (BOX, DIA):
        n = _mk(_DUAL[f.tag], None, (negate(f.children[0]),))
    elif f.tag in (CONJ, DISJ):
        n = _mk(_DUAL[f.tag], None, _set_children(negate(c) for c in f.children))
    else:
        n = _mk(_DUAL[f.tag], None, (negate(f.children[0]),), f.ann)
    f._neg = n
    n._neg = f
    return n


def _shift(f: Formula, by: int, cutoff: int) -> Formula:
    if by == 0 or f.loose <= cutoff:
        return f
    t = f.tag
    if t == VAR:
        i = f.payload
        return _mk(VAR, i + by) if i >= cutoff else f
    if t in (BOX, DIA):
        return _mk(t, None, (_shift(f.children[0], by, cutoff),))
    if t in (CONJ, DISJ):
        return _mk(t, None, _set_children(_shift(c, by, cutoff) for c in f.children))
    return _mk(t, None, (_shift(f.children[0], by, cutoff + 1),), f.ann)


def instantiate(f: Formula, value: Formula, k: int = 0) -> Formula:
    """Replace index k by value (shifted), decrementing higher indices."""
    if f.loose <= k:
        return f
    t = f.tag
    if t == VAR:
        i = f.payload
        if i == k:
            return _shift(value, k, 0)
        return _mk(VAR, i - 1) if i > k else f
    if t in (BOX, DIA):
        return _mk(t, None, (instantiate(f.children[0], value, k),))
    if t in (CONJ, DISJ):
        return _mk(t, None, _set_children(instantiate(c, value, k) for c in f.children))
    return _mk(t, None, (instantiate(f.children[0], value, k + 1),), f.ann)


def unfold(f: Formula) -> Formula:
    """One fixpoint unfolding: sigma phi becomes phi(sigma phi)."""
    if f.tag not in (MU, NU):
        raise ValueError(f"cannot unfold {f!r}")
    return instantiate(f.children[0], f)


def unfold_with(f: Formula, inner: Formula) -> Formula:
    """Unfold f's body around a designated inner formula, phi(inner).
    Used by the annotated quantifier rules, where inner extends f's
    annotation."""
    if f.tag not in (MU, NU):
        raise ValueError(f"cannot unfold {f!r}")
    return instantiate(f.children[0], inner)


def abstract(f: Formula, x: str, k: int = 0) -> Formula:
    """Turn free occurrences of name x into de Bruijn index k, shifting
    existing loose indices up to make room."""
    t = f.tag
    if t == VAR:
        if f.payload == x:
            return _mk(VAR, k)
        if isinstance(f.payload, int) and f.payload >= k:
            return _mk(VAR, f.payload + 1)
        return f
    if t == NEGVAR:
        if f.payload == x:
            raise PositivityError(x)
        return f
    if x not in free_names(f) and f.loose <= k:
        return f
    if t in (BOX, DIA):
        return _mk(t, None, (abstract(f.children[0], x, k),))
    if t in (CONJ, DISJ):
        return _mk(t, None, _set_children(abstract(c, x, k) for c in f.children))
    return _mk(t, None, (abstract(f.children[0], x, k + 1),), f.ann)


def free_names(f: Formula) -> frozenset:
    """Free variable names (both polarities)."""
    s = f._frees
    if s is None:
        if f.tag in (VAR, NEGVAR):
            s = frozenset() if isinstance(f.payload, int) else frozenset((f.payload,))
        else:
            s = frozenset().union(*(free_names(c) for c in f.children)) \
                if f.children else frozenset()
        f._frees = s
    return s


def substitute(f: Formula, theta: dict) -> Formula:
    """Simultaneous substitution of formulas for free names.
    Negated occurrences receive the negated value. Values must not
    contain loose de Bruijn indices."""
    if not theta:
        return f
    for v in theta.values():
        if v.loose:
            raise ValueError("substitution value has loose indices")
    return _subst(f, theta)


def _subst(f: Formula, theta: dict) -> Formula:
    if not (free_names(f) & theta.keys()):
        return f
    t = f.tag
    if t == VAR:
        return theta.get(f.payload, f)
    if t == NEGVAR:
        g = theta.get(f.payload)
        return negate(g) if g is not None else f
    if t in (BOX, DIA):
        return _mk(t, None, (_subst(f.children[0], theta),))
    if t in (CONJ, DISJ):
        return _mk(t, None, _set_children(_subst(c, theta) for c in f.children))
    return _mk(t, None, (_subst(f.children[0], theta),), f.ann)


def rank(f: Formula) -> int:
    return f.rank


def is_plain(f: Formula) -> bool:
    if f.ann:
        return False
    return all(is_plain(c) for c in f.children)


def plain(f: Formula) -> Formula:
    """Strip every annotation."""
    t = f.tag
    if t in (VAR, NEGVAR):
        return f
    if t in (BOX, DIA):
        c = plain(f.children[0])
        return f if c is f.children[0] else _mk(t, None, (c,))
    if t in (CONJ, DISJ):
        return _mk(t, None, _set_children(plain(c) for c in f.children))
    c = plain(f.children[0])
    if not f.ann and c is f.children[0]:
        return f
    return _mk(t, None, (c,), ())


def walk(f: Formula):
    """Yield every structural subterm node once (sharing-aware)."""
    seen = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if id(g) in seen:
            continue
        seen.add(id(g))
        yield g
        stack.extend(g.children)


# ------------------------------------------------------------ the parser

_NAME_CHARS = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_'")


class _Lexer:
    SYMBOLS = ("[]", "<>", "/\\", "\\/", "(", ")", "{", "}", ".", ",", ";",
               "&", "|", "~", "^")

    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.tokens = []
        self._lex()
        self.i = 0

    def _lex(self):
        text, n = self.text, len(self.text)
        p = 0
        while p < n:
            ch = text[p]
            if ch.isspace():
                p += 1
                continue
            two = text[p:p + 2]
            if two in ("[]", "<>", "/\\", "\\/"):
                self.tokens.append((two, p))
                p += 2
                continue
            if ch in "(){}.,;&|~^":
                self.tokens.append((ch, p))
                p += 1
                continue
            if ch.isalpha() or ch == "_":
                q = p
                while q < n and text[q] in _NAME_CHARS:
                    q += 1
                self.tokens.append(("ident:" + text[p:q], p))
                p = q
                continue
            if ch.isdigit():
                q = p
                while q < n and text[q].isdigit():
                    q += 1
                self.tokens.append(("num:" + text[p:q], p))
                p = q
                continue
            raise ParseError(f"unexpected character {ch!r}", p)
        self.tokens.append(("$end", n))

    def peek(self):
        return self.tokens[self.i][0]

    def here(self):
        return self.tokens[self.i][1]

    def take(self, expected=None):
        tok, pos = self.tokens[self.i]
        if expected is not None and tok != expected:
            raise ParseError(f"expected {expected!r}, found {_tok_str(tok)}", pos)
        self.i += 1
        return tok, pos


def _tok_str(tok):
    if tok.startswith("ident:"):
        return repr(tok[6:])
    if tok.startswith("num:"):
        return repr(tok[4:])
    return repr(tok) if tok != "$end" else "end of input"


def parse_name(text: str) -> int:
    """A name token: n<digits> or bare digits."""
    t = text.strip()
    if t.startswith("n") and t[1:].isdigit():
        return int(t[1:])
    if t.isdigit():
        return int(t)
    raise ValueError(f"not a name: {text!r}")


def show_name(n: int) -> str:
    return f"n{n}"


class _Parser:
    def __init__(self, text: str):
        self.lx = _Lexer(text)
        self.env = []  # innermost binder last: (surface name, binder kind)

    def parse(self) -> Formula:
        f = self.formula()
        if self.lx.peek() != "$end":
            raise ParseError(f"trailing input {_tok_str(self.lx.peek())}", self.lx.here())
        return f

    def formula(self) -> Formula:
        f = self.and_chain()
        while self.lx.peek() == "|":
            self.lx.take()
            g = self.and_chain()
            f = disj((f, g))
        return f

    def and_chain(self) -> Formula:
        f = self.unary()
        while self.lx.peek() == "&":
            self.lx.take()
            g = self.unary()
            f = conj((f, g))
        return f

    def unary(self) -> Formula:
        tok = self.lx.peek()
        if tok == "[]":
            self.lx.take()
            return box(self.unary())
        if tok == "<>":
            self.lx.take()
            return dia(self.unary())
        if tok == "~":
            _, pos = self.lx.take()
            name = self.ident("variable after '~'")
            for bname, bkind in reversed(self.env):
                if bname == name:
                    raise ParseError(
                        f"positivity violation: bound variable '{name}' of "
                        f"binder '{bkind} {name}' occurs under negation", pos)
            return neg_var(name)
        if tok in ("ident:mu", "ident:nu"):
            kind = tok[6:]
            self.lx.take()
            ann = self.annotation()
            name = self.ident(f"variable after '{kind}'")
            self.lx.take(".")
            self.env.append((name, kind))
            body = self.formula()
            self.env.pop()
            # abstract by hand: occurrences were resolved to de Bruijn
            # indices at the leaves, so only the binder node remains.
            maker = mu_db if kind == "mu" else nu_db
            return maker(body, ann)
        return self.atom()

    def annotation(self):
        if self.lx.peek() != "^":
            return ()
        self.lx.take()
        self.lx.take("{")
        names = []
        while self.lx.peek() != "}":
            tok, pos = self.lx.take()
            if tok.startswith("ident:") or tok.startswith("num:"):
                raw = tok.split(":", 1)[1]
                try:
                    names.append(parse_name(raw))
                except ValueError:
                    raise ParseError(f"bad name {raw!r} in annotation", pos)
            else:
                raise ParseError(f"expected name, found {_tok_str(tok)}", pos)
            if self.lx.peek() == ",":
                self.lx.take()
        self.lx.take("}")
        if len(set(names)) != len(names):
            raise ParseError(f"repeating annotation {names}", self.lx.here())
        return tuple(names)

    def ident(self, what: str) -> str:
        tok, pos = self.lx.take()
        if not tok.startswith("ident:"):
            raise ParseError(f"expected {what}, found {_tok_str(tok)}", pos)
        return tok[6:]

    def atom(self) -> Formula:
        tok, pos = self.lx.take()
        if tok == "(":
            f = self.formula()
            self.lx.take(")")
            return f
        if tok in ("/\\", "\\/"):
            items = self.braced_list()
            return conj(items) if tok == "/\\" else disj(items)
        if tok == "ident:T":
            return top()
        if tok == "ident:F":
            return bot()
        # '_' is a name character, so 'nabla_{...}' lexes as 'nabla_' '{'.
        if tok in ("ident:nabla", "ident:nabla_"):
            lits = self.braced_list() if tok == "ident:nabla_" else ()
            return self.nabla(lits, pos)
        if tok.startswith("ident:"):
            name = tok[6:]
            for depth, (bname, _) in enumerate(reversed(self.env)):
                if bname == name:
                    return var(depth)
            return var(name)
        raise ParseError(f"expected a formula, found {_tok_str(tok)}", pos)

    def braced_list(self):
        self.lx.take("{")
        items = []
        while self.lx.peek() != "}":
            items.append(self.formula())
            if self.lx.peek() == ",":
                self.lx.take()
            elif self.lx.peek() != "}":
                raise ParseError(f"expected ',' or '}}', found "
                                 f"{_tok_str(self.lx.peek())}", self.lx.here())
        self.lx.take("}")
        return items

    def nabla(self, lits, pos0: int) -> Formula:
        self.lx.take("(")
        g = self.braced_list()
        self.lx.take(";")
        d = self.braced_list()
        self.lx.take(")")
        try:
            return cover(lits, g, d)
        except CoverError as e:
            raise ParseError(f"bad cover: {e}", pos0)


def parse_formula(text: str) -> Formula:
    """Parse surface syntax into the canonical Formula."""
    return _Parser(text).parse()


# ----------------------------------------------------------- the printer

_POOL = ("x", "y", "z", "u", "v", "w")


def _binder_names(f: Formula):
    taken = set(free_names(f))
    out = []

    def fresh():
        for name in _POOL:
            if name not in taken:
                return name
        i = 1
        while True:
            for name in _POOL:
                cand = f"{name}{i}"
                if cand not in taken:
                    return cand
            i += 1

    return taken, fresh


def show(f: Formula) -> str:
    """Deterministic surface rendering; parse_formula(show(f)) is f."""
    taken, fresh = _binder_names(f)

    def go(g: Formula, env: tuple) -> str:
        t = g.tag
        if t == VAR:
            p = g.payload
            if isinstance(p, str):
                return p
            if p < len(env):
                return env[-(p + 1)]
            return f"#{p - len(env)}"
        if t == NEGVAR:
            return "~" + g.payload
        if t == BOX or t == DIA:
            op = "[]" if t == BOX else "<>"
            c = g.children[0]
            s = go(c, env)
            if c.tag in (MU, NU):
                s = f"({s})"
            return op + s
        if t == CONJ or t == DISJ:
            cs = g.children
            if not cs:
                return "T" if t == CONJ else "F"
            if len(cs) == 2:
                mid = " & " if t == CONJ else " | "
                left = go(cs[0], env)
                if cs[0].tag in (MU, NU):
                    # a bare quantifier body is maximal and would eat the
                    # infix operator on re-parse
                    left = f"({left})"
                return "(" + left + mid + go(cs[1], env) + ")"
            op = "/\\" if t == CONJ else "\\/"
            return op + "{" + ", ".join(go(c, env) for c in cs) + "}"
        # quantifier
        name = fresh()
        taken.add(name)
        head = "mu" if t == MU else "nu"
        if g.ann:
            head += "^{" + ",".join(show_name(n) for n in g.ann) + "}"
        body = go(g.children[0], env + (name,))
        taken.discard(name)
        return f"{head} {name}. {body}"

    return go(f, ())


# --------------------------------------------------- closure and threads

def immediate_subformulas(f: Formula) -> frozenset:
    """The one-step subformula successors: set members, modal children,
    and the unfolding for quantifiers."""
    t = f.tag
    if t in (VAR, NEGVAR):
        return frozenset()
    if t in (BOX, DIA):
        return frozenset(f.children)
    if t in (CONJ, DISJ):
        return frozenset(f.children)
    return frozenset((unfold(f),))


def closure(f: Formula) -> frozenset:
    """Least set containing f closed under immediate subformulas."""
    if f.loose:
        raise ValueError("closure of a formula with loose indices")
    seen = {f}
    todo = [f]
    while todo:
        g = todo.pop()
        for h in immediate_subformulas(g):
            if h not in seen:
                seen.add(h)
                todo.append(h)
    return frozenset(seen)


def closure_graph(f: Formula) -> dict:
    """Successor map of the closure, edges ordered by skey."""
    out = {}
    todo = [f]
    while todo:
        g = todo.pop()
        if g in out:
            continue
        succ = tuple(sorted(immediate_subformulas(g), key=skey))
        out[g] = succ
        todo.extend(s for s in succ if s not in out)
    return out


def is_guarded(f: Formula) -> bool:
    """Every cycle in the closure graph crosses a modal step; equivalently
    the graph restricted to non-modal edges is acyclic."""
    graph = closure_graph(f)
    # iterative depth-first search for a cycle avoiding edges out of modalities
    WHITE, GREY, BLACK = 0, 1, 2
    color = {g: WHITE for g in graph}
    for start in graph:
        if color[start] != WHITE:
            continue
        stack = [(start, iter(() if start.tag in (BOX, DIA) else graph[start]))]
        color[start] = GREY
        while stack:
            node, it = stack[-1]
            advanced = False
            for nxt in it:
                c = color[nxt]
                if c == GREY:
                    return False
                if c == WHITE:
                    color[nxt] = GREY
                    stack.append(
                        (nxt, iter(() if nxt.tag in (BOX, DIA) else graph[nxt])))
                    advanced = True
                    break
            if not advanced:
                color[node] = BLACK
                stack.pop()
    return True


def var_guarded(body: Formula, idx: int = 0) -> bool:
    """True iff every occurrence of the de Bruijn index idx in body sits
    beneath at least one modality. Syntactic single-binder guardedness."""

    def go(g: Formula, k: int, shielded: bool) -> bool:
        if g.tag == VAR:
            return shielded or g.payload != k
        if g.tag == NEGVAR:
            return True
        if g.loose <= k:
            return True
        if g.tag in (BOX, DIA):
            return go(g.children[0], k, True)
        if g.tag in (CONJ, DISJ):
            return all(go(c, k, shielded) for c in g.children)
        return go(g.children[0], k + 1, shielded)

    return go(body, idx, False)


def syntactic_guarded(f: Formula) -> bool:
    """Cross-check for is_guarded: every binder guards its own variable."""
    return all(g.tag not in (MU, NU) or var_guarded(g.children[0], 0)
               for g in walk(f))


# ----------------------------------------------------------- the cover

def _consistent(lits) -> bool:
    pos = {l.payload for l in lits if l.tag == VAR}
    neg = {l.payload for l in lits if l.tag == NEGVAR}
    return not (pos & neg)


def cover(lits, gamma, delta) -> Formula:
    """Expanded cover modality: the conjunction of the literals, the
    <>-images of gamma and [] of the disjunction of delta. Requires the
    literals consistent and gamma a subset of delta."""
    lits = frozenset(lits)
    gamma = frozenset(gamma)
    delta = frozenset(delta)
    for l in lits:
        if l.tag not in (VAR, NEGVAR):
            raise CoverError(f"not a literal: {show(l)}")
    if not _consistent(lits):
        raise CoverError("inconsistent literal set")
    if not gamma <= delta:
        raise CoverError("diamond set not below the box set")
    parts = list(lits) + [dia(g) for g in gamma] + [box(disj(delta))]
    return conj(parts)


def decompose_cover(f: Formula):
    """Inverse of cover when f has exactly the cover shape; None otherwise."""
    if f.tag != CONJ:
        return None
    lits, gamma, delta = [], [], None
    boxes = 0
    for c in f.children:
        if c.tag in (VAR, NEGVAR):
            lits.append(c)
        elif c.tag == DIA:
            gamma.append(c.children[0])
        elif c.tag == BOX:
            boxes += 1
            if boxes > 1 or c.children[0].tag != DISJ:
                return None
            delta = frozenset(c.children[0].children)
        else:
            return None
    if delta is None:
        return None
    lits = frozenset(lits)
    gamma = frozenset(gamma)
    if not _consistent(lits) or not gamma <= delta:
        return None
    return (lits, gamma, delta)


# ------------------------------------------------------------- fragments

@dataclass(frozen=True)
class FragmentInfo:
    guarded: bool
    disjunctive: bool
    conjunctive: bool
    pi: bool


def _is_disjunctive(f: Formula) -> bool:
    return all(g.tag != CONJ or decompose_cover(g) is not None
               for g in closure(f))


def classify_fragment(f: Formula) -> FragmentInfo:
    """Membership in the four fragments. Disjunctiveness inspects the
    closure, so unfoldings that push a bound variable into the literal
    slot of a cover are caught."""
    return FragmentInfo(
        guarded=is_guarded(f),
        disjunctive=_is_disjunctive(f),
        conjunctive=_is_disjunctive(negate(f)),
        pi=all(g.tag != MU for g in walk(f)),
    )


# -------------------------------------------------------- PF certificates

@dataclass(frozen=True)
class PfCert:
    """Certificate of membership in the Pi-closure of the disjunctive
    fragment. clause 1: literal or disjunctive; 2: set operator over
    certified members; 3: modality; 4: greatest fixpoint over the body
    certified at a fresh variable; 5: positive substitution, with parts
    starting with the template's certificate and subst certifying each
    value."""

    clause: int
    formula: Formula
    parts: tuple = ()
    subst: tuple = ()  # clause 5: ((name, PfCert), ...)


def pf_fresh_name(f: Formula) -> str:
    """Deterministic fresh variable for clause-4 checks: first _x<i> not
    free in f. Producers and the checker must agree on this choice."""
    frees = free_names(f)
    i = 0
    while f"_x{i}" in frees:
        i += 1
    return f"_x{i}"


def pf_certificate_check(a: Formula, cert: PfCert) -> bool:
    try:
        return _pf_check(a, cert)
    except CertificateError:
        raise


def _pf_check(a: Formula, cert: PfCert) -> bool:
    if not isinstance(cert, PfCert):
        raise CertificateError("not a certificate", 0)
    if cert.formula is not a:
        return False
    cl = cert.clause
    if cl == 1:
        return is_literal(a) or _is_disjunctive(a)
    if cl == 2:
        if a.tag not in (CONJ, DISJ):
            return False
        if {p.formula for p in cert.parts} != set(a.children):
            return False
        return all(_pf_check(p.formula, p) for p in cert.parts)
    if cl == 3:
        if a.tag not in (BOX, DIA) or len(cert.parts) != 1:
            return False
        return cert.parts[0].formula is a.children[0] and \
            _pf_check(a.children[0], cert.parts[0])
    if cl == 4:
        if a.tag != NU or len(cert.parts) != 1:
            return False
        inst = instantiate(a.children[0], var(pf_fresh_name(a)))
        return cert.parts[0].formula is inst and _pf_check(inst, cert.parts[0])
    if cl == 5:
        if len(cert.parts) != 1 or not cert.subst:
            return False
        body_cert = cert.parts[0]
        body = body_cert.formula
        theta = {}
        for name, vcert in cert.subst:
            if not isinstance(name, str) or not _pf_check(vcert.formula, vcert):
                return False
            theta[name] = vcert.formula
        # V-positivity: no substituted variable occurs negated in the body
        for g in walk(body):
            if g.tag == NEGVAR and g.payload in theta:
                return False
        if substitute(body, theta) is not a:
            return False
        return _pf_check(body, body_cert)
    raise CertificateError(f"unknown clause {cl}", cl)


def auto_pf_cert(a: Formula):
    """Best-effort certificate builder by structural recursion; None when
    the recursion hits a least fixpoint that is not disjunctive."""
    if is_literal(a) or _is_disjunctive(a):
        return PfCert(1, a)
    t = a.tag
    if t in (CONJ, DISJ):
        parts = []
        for c in a.children:
            p = auto_pf_cert(c)
            if p is None:
                return None
            parts.append(p)
        return PfCert(2, a, tuple(parts))
    if t in (BOX, DIA):
        p = auto_pf_cert(a.children[0])
        return None if p is None else PfCert(3, a, (p,))
    if t == NU:
        inst = instantiate(a.children[0], var(pf_fresh_name(a)))
        p = auto_pf_cert(inst)
        return None if p is None else PfCert(4, a, (p,))
    return None


# ------------------------------------------------- random formulas (tests)

def random_formula(rng: random.Random, max_rank: int, var_pool,
                   env: int = 0) -> Formula:
    """Seeded random closed formula of rank at most max_rank.
    Bound variables are produced positively only; env counts enclosing
    binders available as de Bruijn indices."""
    pool = tuple(var_pool)
    leaves = ["lit"]
    if env:
        leaves.append("idx")
    if max_rank <= 0:
        kind = rng.choice(leaves)
        if kind == "idx":
            return var(rng.randrange(env))
        name = rng.choice(pool)
        return var(name) if rng.random() < 0.5 else neg_var(name)
    kinds = ["lit", "box", "dia", "conj", "disj", "mu", "nu"]
    if env:
        kinds.append("idx")
    kind = rng.choice(kinds)
    if kind == "lit":
        name = rng.choice(pool)
        return var(name) if rng.random() < 0.5 else neg_var(name)
    if kind == "idx":
        return var(rng.randrange(env))
    if kind == "box":
        return box(random_formula(rng, max_rank - 1, pool, env))
    if kind == "dia":
        return dia(random_formula(rng, max_rank - 1, pool, env))
    if kind in ("conj", "disj"):
        width = rng.choice((0, 1, 2, 2, 3))
        items = [random_formula(rng, max_rank - 1, pool, env)
                 for _ in range(width)]
        return conj(items) if kind == "conj" else disj(items)
    body = random_formula(rng, max_rank - 1, pool, env + 1)
    return mu_db(body) if kind == "mu" else nu_db(body)
