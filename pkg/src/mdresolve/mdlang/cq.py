"""Conjunctive queries with similarity built-ins, evaluated by backtracking
homomorphism search."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, Iterator, Optional, Sequence

from ..relcore import Instance, SimilarityFactStore
from .model import EQ, Atom, SimAtom


@dataclass(frozen=True)
class Filter:
    """A built-in condition over atom tuples and variable values.

    `test` receives (tids, binding) once every atom is matched.
    """
    description: str
    test: Callable


@dataclass
class ConjunctiveQuery:
    atoms: list
    sims: list = field(default_factory=list)
    filters: list = field(default_factory=list)
    label: str = ""

    def __str__(self):
        parts = [str(a) for a in self.atoms]
        parts += [f"{s.left} = {s.right}" if s.tag == EQ else f"{s.left} ~{s.tag} {s.right}" for s in self.sims]
        parts += [f.description for f in self.filters]
        return " & ".join(parts)


def _holds(sims: SimilarityFactStore, s: SimAtom, a, b) -> bool:
    if s.tag == EQ:
        return a is not None and a == b
    return sims.similar(s.tag, a, b)


def homomorphisms(q: ConjunctiveQuery, inst: Instance, sims: SimilarityFactStore) -> Iterator[tuple]:
    """Yield (tids, binding) for every match; tids[i] is the tuple id that
    atom i maps to."""
    atoms = q.atoms
    for a in atoms:
        if a.relation not in inst.schemas:
            return
        if len(a.terms) != inst.schemas[a.relation].arity:
            raise ValueError(f"atom {a} does not match the arity of {a.relation}")
    counts: Dict[str, int] = {}
    for a in atoms:
        for v in a.terms:
            counts[v] = counts.get(v, 0) + 1
    for s in q.sims:
        counts[s.left] = counts.get(s.left, 0) + 1
        counts[s.right] = counts.get(s.right, 0) + 1
    sims_of: Dict[str, list] = {}
    for s in q.sims:
        sims_of.setdefault(s.left, []).append((s, s.right))
        sims_of.setdefault(s.right, []).append((s, s.left))
    sizes = [len(inst.tuples(a.relation)) for a in atoms]
    tids = [None] * len(atoms)
    binding: Dict[str, object] = {}

    def candidates(i):
        a = atoms[i]
        best = None
        for pos, v in enumerate(a.terms):
            if v in binding:
                hits = inst.index(a.relation, pos).get(binding[v], ())
                if best is None or len(hits) < len(best):
                    best = hits
        if best is not None:
            return best
        for pos, v in enumerate(a.terms):
            for s, other in sims_of.get(v, ()):
                if other in binding:
                    val = binding[other]
                    if val is None:
                        return ()
                    near = {val} if s.tag == EQ else sims.neighbours(s.tag, val)
                    if near is None:
                        continue
                    idx = inst.index(a.relation, pos)
                    out = []
                    for n in near:
                        out.extend(idx.get(n, ()))
                    out.sort(key=lambda t: t.tid)
                    return out
        return inst.tuples(a.relation)

    def score(i):
        a = atoms[i]
        bound = sum(1 for v in a.terms if v in binding)
        linked = sum(1 for v in a.terms for _, o in sims_of.get(v, ()) if o in binding)
        return (-bound, -linked, sizes[i], i)

    def sims_ok(new_vars):
        for v in new_vars:
            for s, other in sims_of.get(v, ()):
                if other in binding and not _holds(sims, s, binding[s.left], binding[s.right]):
                    return False
        return True

    def search(remaining):
        if not remaining:
            if all(f.test(tuple(tids), binding) for f in q.filters):
                yield tuple(tids), dict(binding)
            return
        i = min(remaining, key=score)
        a = atoms[i]
        rest = [j for j in remaining if j != i]
        for t in candidates(i):
            new = []
            ok = True
            for pos, v in enumerate(a.terms):
                val = t.at(pos)
                if v in binding:
                    if binding[v] != val or val is None:
                        ok = False
                        break
                else:
                    if val is None and counts[v] > 1:
                        ok = False
                        break
                    binding[v] = val
                    new.append(v)
            if ok and sims_ok(new):
                tids[i] = t.tid
                yield from search(rest)
            for v in new:
                del binding[v]
        tids[i] = None

    yield from search(list(range(len(atoms))))


def evaluate(q: ConjunctiveQuery, inst: Instance, sims: SimilarityFactStore):
    """First match as (tids, binding), or None when the query is false."""
    for hit in homomorphisms(q, inst, sims):
        return hit
    return None
