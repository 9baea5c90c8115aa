"""Matching dependencies: the data model, the rule parser and the renderer.

Grammar (EBNF)::

    file      = { rule } ;
    rule      = "md" NAME ":" body "->" "ident" "(" VAR "," VAR ")" [ "." | ";" ] ;
    body      = item { "," item } ;
    item      = atom | simatom | equality ;
    atom      = REL "(" VAR { "," VAR } ")" ;
    simatom   = "sim" "(" TAG ":" VAR "," VAR ")" ;
    equality  = VAR "=" VAR ;

The first two relational atoms are the leading atoms; their first variables
stand for the tuple ids. Any later relational atom is context. A variable
written twice means equality of the positions it occupies, and ``_`` is a
fresh variable each time it appears. ``#`` starts a comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple as Tup


class MdError(Exception):
    pass


class MdSyntaxError(MdError):
    def __init__(self, message, position, expected=None, line=None, column=None):
        self.position = position
        self.expected = expected
        self.line = line
        self.column = column
        where = f"line {line}, column {column}" if line else f"offset {position}"
        extra = f" (expected {expected})" if expected else ""
        super().__init__(f"{where}: {message}{extra}")


class UnboundVariable(MdError):
    pass


class IdentityOutsideLeadingAtoms(MdError):
    pass


class DisconnectedContext(MdError):
    pass


class SchemaMismatch(MdError):
    pass


EQ = "="


@dataclass(frozen=True)
class Atom:
    relation: str
    terms: tuple

    def __str__(self):
        return f"{self.relation}({', '.join(self.terms)})"


@dataclass(frozen=True)
class SimAtom:
    """A similarity atom over a domain tag; the tag "=" is plain equality."""
    tag: str
    left: str
    right: str

    @property
    def is_equality(self):
        return self.tag == EQ


@dataclass(frozen=True)
class MatchDependency:
    name: str
    leading: tuple
    context: tuple = ()
    sims: tuple = ()
    identity: tuple = ("", "")

    def __post_init__(self):
        object.__setattr__(self, "leading", tuple(self.leading))
        object.__setattr__(self, "context", tuple(self.context))
        object.__setattr__(self, "sims", tuple(self.sims))
        object.__setattr__(self, "identity", tuple(self.identity))
        _validate(self)

    @property
    def atoms(self) -> tuple:
        return self.leading + self.context

    @property
    def is_classical(self) -> bool:
        return not self.context

    def occurrences(self, var: str) -> list:
        """(atom index, position) pairs where a variable appears."""
        return [(i, p) for i, a in enumerate(self.atoms) for p, v in enumerate(a.terms) if v == var]

    def variables(self) -> set:
        return {v for a in self.atoms for v in a.terms}

    def identity_positions(self) -> tuple:
        """(atom index, position) of the two identified variables."""
        out = []
        for k, var in enumerate(self.identity):
            terms = self.leading[k].terms
            out.append((k, terms.index(var)))
        return tuple(out)

    def repeated_variables(self) -> list:
        """Variables written more than once: the implicit equalities."""
        counts: Dict[str, int] = {}
        for a in self.atoms:
            for v in a.terms:
                counts[v] = counts.get(v, 0) + 1
        return sorted(v for v, c in counts.items() if c > 1)

    def equality_atoms(self) -> list:
        """Implicit equalities from repeated variables plus explicit ones."""
        eqs = [s for s in self.sims if s.is_equality]
        for v in self.repeated_variables():
            eqs.append(SimAtom(EQ, v, v))
        return eqs

    def read_positions(self) -> list:
        """(atom index, position) pairs compared on the left-hand side.

        A position is compared when its variable occurs in a similarity or
        equality atom, or when the variable is shared with another position.
        """
        compared = set(self.repeated_variables())
        for s in self.sims:
            compared.update((s.left, s.right))
        return sorted(p for v in compared for p in self.occurrences(v))

    def __str__(self):
        return render_md(self)


def _validate(md: MatchDependency):
    if len(md.leading) != 2:
        raise MdError(f"{md.name}: exactly two leading atoms are required")
    for a in md.atoms:
        if not a.terms:
            raise MdError(f"{md.name}: atom {a.relation} has no terms")
    bound = md.variables()
    for s in md.sims:
        for v in (s.left, s.right):
            if v not in bound:
                raise UnboundVariable(f"{md.name}: variable {v!r} of a similarity atom is in no relational atom")
    for k, var in enumerate(md.identity):
        if var not in bound:
            raise UnboundVariable(f"{md.name}: identity variable {var!r} is in no relational atom")
        if var not in md.leading[k].terms:
            raise IdentityOutsideLeadingAtoms(
                f"{md.name}: identity variable {var!r} must come from leading atom {k + 1}")
        if md.leading[k].terms[0] == var:
            raise IdentityOutsideLeadingAtoms(f"{md.name}: the tuple id cannot be identified")
    if md.context:
        _check_connected(md)


def _check_connected(md: MatchDependency):
    lead_vars = [set(a.terms) for a in md.leading]
    ctx_vars = set().union(*(set(a.terms) for a in md.context))
    for k, lv in enumerate(lead_vars):
        linked = set(lv)
        for s in md.sims:
            if s.left in lv or s.right in lv:
                linked.update((s.left, s.right))
        if not linked & ctx_vars:
            raise DisconnectedContext(f"{md.name}: context shares no variable with leading atom {k + 1}")
    # every context atom must reach the leading atoms through shared variables
    reach = set().union(*lead_vars)
    pending = list(md.context)
    changed = True
    while pending and changed:
        changed = False
        for a in list(pending):
            terms = set(a.terms)
            via_sim = {s.left for s in md.sims if s.right in reach} | {s.right for s in md.sims if s.left in reach}
            if terms & (reach | via_sim):
                reach |= terms
                pending.remove(a)
                changed = True
    if pending:
        raise DisconnectedContext(f"{md.name}: context atom {pending[0]} is not connected")


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<arrow>->)
  | (?P<name>[A-Za-z_][A-Za-z0-9_.']*)
  | (?P<num>[0-9]+)
  | (?P<punct>[(),:=.;])
""", re.VERBOSE)


def _tokens(text: str):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise _syntax(text, pos, f"unexpected character {text[pos]!r}")
        kind = m.lastgroup
        val = m.group(kind)
        if kind != "ws":
            if kind == "name" and val.endswith("."):
                # a trailing dot ends the statement, it is not part of the name
                stripped = val.rstrip(".")
                out.append(("name", stripped, pos))
                out.append(("punct", ".", pos + len(stripped)))
            else:
                out.append((kind, val, pos))
        pos = m.end()
    out.append(("eof", "", len(text)))
    return out


def _syntax(text, pos, message, expected=None):
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return MdSyntaxError(message, pos, expected, line, col)


class _Parser:
    def __init__(self, text):
        self.text = text
        self.toks = _tokens(text)
        self.i = 0
        self.fresh = 0

    def peek(self):
        return self.toks[self.i]

    def take(self, kind=None, value=None, expected=None):
        tok = self.toks[self.i]
        if (kind and tok[0] != kind) or (value is not None and tok[1] != value):
            want = expected or (repr(value) if value is not None else kind)
            got = tok[1] or "end of input"
            raise _syntax(self.text, tok[2], f"unexpected {got!r}", want)
        self.i += 1
        return tok

    def at(self, kind, value=None):
        tok = self.toks[self.i]
        return tok[0] == kind and (value is None or tok[1] == value)

    def var(self):
        tok = self.take("name", expected="variable")
        if tok[1] == "_":
            self.fresh += 1
            return f"_{self.fresh}"
        return tok[1]

    def rules(self):
        out = []
        while not self.at("eof"):
            out.append(self.rule())
        return out

    def rule(self):
        self.take("name", "md", expected="'md'")
        name = self.take("name", expected="rule name")[1]
        self.take("punct", ":")
        rels, sims = [], []
        while True:
            self.item(rels, sims)
            if self.at("punct", ","):
                self.take()
                continue
            break
        self.take("arrow", expected="',' or '->'")
        self.take("name", "ident", expected="'ident'")
        self.take("punct", "(")
        y1 = self.var()
        self.take("punct", ",")
        y2 = self.var()
        self.take("punct", ")")
        if self.at("punct", ".") or self.at("punct", ";"):
            self.take()
        if len(rels) < 2:
            raise _syntax(self.text, self.peek()[2], f"rule {name} needs two leading atoms", "relational atom")
        self.fresh = 0
        return MatchDependency(name, tuple(rels[:2]), tuple(rels[2:]), tuple(sims), (y1, y2))

    def item(self, rels, sims):
        tok = self.take("name", expected="atom, sim(...) or equality")
        if tok[1] == "sim" and self.at("punct", "("):
            self.take()
            tag = self.take("name", expected="similarity tag")[1]
            self.take("punct", ":")
            a = self.var()
            self.take("punct", ",")
            b = self.var()
            self.take("punct", ")")
            sims.append(SimAtom(tag, a, b))
        elif self.at("punct", "("):
            self.take()
            terms = [self.var()]
            while self.at("punct", ","):
                self.take()
                terms.append(self.var())
            self.take("punct", ")", expected="',' or ')'")
            rels.append(Atom(tok[1], tuple(terms)))
        elif self.at("punct", "="):
            self.take()
            left = tok[1]
            if left == "_":
                raise _syntax(self.text, tok[2], "'_' cannot appear in an equality")
            sims.append(SimAtom(EQ, left, self.var()))
        else:
            nxt = self.peek()
            raise _syntax(self.text, nxt[2], f"unexpected {nxt[1] or 'end of input'!r}", "'(' or '='")


def parse_md(text: str) -> MatchDependency:
    rules = parse_rules(text)
    if len(rules) != 1:
        raise MdError(f"expected one rule, found {len(rules)}")
    return rules[0]


def parse_rules(text: str) -> List[MatchDependency]:
    rules = _Parser(text).rules()
    names = [r.name for r in rules]
    dup = {n for n in names if names.count(n) > 1}
    if dup:
        raise MdError(f"duplicate rule names: {sorted(dup)}")
    return rules


def load_rules(path) -> List[MatchDependency]:
    with open(path, encoding="utf-8") as fh:
        return parse_rules(fh.read())


def render_md(md: MatchDependency) -> str:
    single = {v for v in md.variables() if v.startswith("_") and len(md.occurrences(v)) == 1
              and not any(v in (s.left, s.right) for s in md.sims)}

    def term(v):
        return "_" if v in single else v

    items = [f"{a.relation}({', '.join(term(v) for v in a.terms)})" for a in md.atoms]
    for s in md.sims:
        if s.is_equality:
            items.append(f"{s.left} = {s.right}")
        else:
            items.append(f"sim({s.tag}: {s.left}, {s.right})")
    return f"md {md.name}: {', '.join(items)} -> ident({md.identity[0]}, {md.identity[1]})"


def render_rules(mds: Sequence[MatchDependency]) -> str:
    return "\n".join(render_md(m) for m in mds) + ("\n" if mds else "")


def check_against(md: MatchDependency, schemas: Mapping) -> None:
    """Raise SchemaMismatch when an atom names an unknown relation or has
    the wrong arity."""
    for a in md.atoms:
        sch = schemas.get(a.relation)
        if sch is None:
            raise SchemaMismatch(f"{md.name}: unknown relation {a.relation}")
        if len(a.terms) != sch.arity:
            raise SchemaMismatch(f"{md.name}: {a.relation} has arity {sch.arity}, atom has {len(a.terms)}")
