"""Static and instance-dependent analyses of MD sets: interaction-freeness
and the similarity-free attribute intersection test.

Attributes are (relation, position) pairs. An MD reads an attribute when the
attribute's position is compared on the left-hand side, through a similarity
atom, an equality atom or a shared variable. It writes the two attributes of
its identity atom.

The instance test asks, for every writer/reader pair sharing an attribute
R[A], whether the writer can fire on some R-tuple while the reader compares
that same tuple's A-value with a different position. Firing means the
writer's left-hand side holds with its two identified cells distinct; a
comparison of a cell with itself is vacuous. If no such pair of matches
exists in the initial instance the combination is accepted.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Dict, List, Mapping, Optional, Sequence

from ..relcore import Instance, SimilarityFactStore
from .cq import ConjunctiveQuery, Filter, evaluate
from .model import EQ, Atom, MatchDependency, SimAtom


def alhs(md: MatchDependency) -> set:
    return {(md.atoms[i].relation, p) for i, p in md.read_positions()}


def arhs(md: MatchDependency) -> set:
    return {(md.leading[k].relation, p) for k, p in md.identity_positions()}


@dataclass
class MDAnalysis:
    name: str
    alhs: set
    arhs: set

    def labels(self, schemas: Optional[Mapping] = None):
        def lab(rp):
            r, p = rp
            if schemas and r in schemas:
                return schemas[r].label(p)
            return f"{r}[{p}]"
        return sorted(map(lab, self.alhs)), sorted(map(lab, self.arhs))


def analyze(mds: Sequence[MatchDependency]) -> List[MDAnalysis]:
    return [MDAnalysis(m.name, alhs(m), arhs(m)) for m in mds]


def interactions(mds: Sequence[MatchDependency]) -> list:
    """(writer, reader, attribute) triples with the attribute written by the
    writer and read by the reader; writer and reader may coincide."""
    out = []
    for w in mds:
        written = arhs(w)
        for r in mds:
            for attr in sorted(written & alhs(r)):
                out.append((w, r, attr))
    return out


def is_interaction_free(mds: Sequence[MatchDependency]) -> bool:
    return not interactions(mds)


# ---------------------------------------------------------------- BCQ route

@dataclass
class SfaiQuery:
    writer: str
    reader: str
    attribute: tuple
    disjuncts: list = field(default_factory=list)

    def __str__(self):
        body = "\n   OR ".join(str(q) for q in self.disjuncts)
        return f"Q[{self.writer},{self.reader}] on {self.attribute[0]}[{self.attribute[1]}]:\n   {body}"


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def _fires_filter(w_atoms, w_ident):
    (ia, pa), (ib, pb) = w_ident

    def test(tids, binding):
        return (tids[w_atoms[ia]], pa) != (tids[w_atoms[ib]], pb)
    return test


def _reads_filter(r_atoms, j, pos, partners):
    def test(tids, binding):
        here = (tids[r_atoms[j]], pos)
        return any((tids[r_atoms[k]], q) != here for k, q in partners)
    return test


def _partners(md: MatchDependency, j: int, pos: int) -> list:
    """Positions compared with (atom j, pos) inside md."""
    var = md.atoms[j].terms[pos]
    out = [o for o in md.occurrences(var) if o != (j, pos)]
    for s in md.sims:
        if s.left == var:
            out += md.occurrences(s.right)
        if s.right == var:
            out += md.occurrences(s.left)
    return [o for o in out if o != (j, pos)]


def build_sfai_queries(mds: Sequence[MatchDependency]) -> List[SfaiQuery]:
    queries = []
    for w, r, attr in interactions(mds):
        rel, pos = attr
        q = SfaiQuery(w.name, r.name, attr)
        w_ident = w.identity_positions()
        for k, (ia, pa) in enumerate(w_ident):
            if (w.leading[ia].relation, pa) != attr:
                continue
            for j, a in enumerate(r.atoms):
                if a.relation != rel or (j, pos) not in r.read_positions():
                    continue
                q.disjuncts.append(_disjunct(w, r, ia, j, pos))
        queries.append(q)
    return queries


def _disjunct(w: MatchDependency, r: MatchDependency, ia: int, j: int, pos: int) -> ConjunctiveQuery:
    uf = _UnionFind()
    wa, ra = w.leading[ia], r.atoms[j]
    for tw, tr in zip(wa.terms, ra.terms):
        uf.union("w." + tw, "r." + tr)

    def ren(prefix, v):
        return uf.find(prefix + v)

    atoms, sims = [], []
    for a in w.atoms:
        atoms.append(Atom(a.relation, tuple(ren("w.", v) for v in a.terms)))
    for a in r.atoms:
        atoms.append(Atom(a.relation, tuple(ren("r.", v) for v in a.terms)))
    for s in w.sims:
        sims.append(SimAtom(s.tag, ren("w.", s.left), ren("w.", s.right)))
    for s in r.sims:
        sims.append(SimAtom(s.tag, ren("r.", s.left), ren("r.", s.right)))
    nw = len(w.atoms)
    w_atoms = list(range(nw))
    r_atoms = list(range(nw, nw + len(r.atoms)))
    filters = [
        Filter(f"{w.name} fires", _fires_filter(w_atoms, w.identity_positions())),
        Filter(f"{r.name} compares {ra.relation}[{pos}] with another cell",
               _reads_filter(r_atoms, j, pos, _partners(r, j, pos))),
    ]
    label = f"{w.name}.{'lead%d' % (ia + 1)} = {r.name}.atom{j + 1}"
    return ConjunctiveQuery(atoms, sims, filters, label)


@dataclass
class SfaiVerdict:
    is_sfai: bool
    witnesses: list = field(default_factory=list)

    def __bool__(self):
        return self.is_sfai


def is_sfai(mds: Sequence[MatchDependency], inst: Instance, sims: SimilarityFactStore) -> SfaiVerdict:
    """Witnesses are (writer, reader, S1 tids, S2 tids) quadruples."""
    by_name = {m.name: m for m in mds}
    witnesses = []
    for q in build_sfai_queries(mds):
        n_w = len(by_name[q.writer].atoms)
        for d in q.disjuncts:
            hit = evaluate(d, inst, sims)
            if hit is not None:
                tids = hit[0]
                witnesses.append((q.writer, q.reader, tuple(sorted(set(tids[:n_w]))),
                                  tuple(sorted(set(tids[n_w:])))))
                break
    return SfaiVerdict(not witnesses, witnesses)


# ---------------------------------------------------------------- enumeration route

def _lhs_matches(md: MatchDependency, subset: Sequence, sims: SimilarityFactStore):
    """Every assignment of md's atoms to tuples of `subset` (pairs of
    (relation, Tuple)) under which the left-hand side holds."""
    pools = [[t for rel, t in subset if rel == a.relation] for a in md.atoms]
    for choice in product(*pools):
        env = {}
        ok = True
        for a, t in zip(md.atoms, choice):
            if len(a.terms) != len(t.values) + 1:
                ok = False
                break
            for pos, v in enumerate(a.terms):
                val = t.at(pos)
                if v in env:
                    if val is None or env[v] != val:
                        ok = False
                        break
                else:
                    env[v] = val
            if not ok:
                break
        if not ok:
            continue
        for s in md.sims:
            x, y = env[s.left], env[s.right]
            if s.tag == EQ:
                if x is None or x != y:
                    ok = False
            elif not sims.similar(s.tag, x, y):
                ok = False
            if not ok:
                break
        if ok and any(env[v] is None and len(md.occurrences(v)) > 1 for v in env):
            ok = False
        if ok:
            yield choice


def sfai_by_enumeration(mds: Sequence[MatchDependency], inst: Instance, sims: SimilarityFactStore) -> bool:
    """Reference check that walks subsets of the instance directly.

    For each interaction case it collects the R-tuples the writer can fire on
    and the R-tuples whose A-cell the reader compares with another cell, over
    all subsets no larger than the MD's atom count.
    """
    tuples = [(rel, t) for rel, ts in inst.relations.items() for t in ts]
    for w in mds:
        for r in mds:
            for rel, pos in sorted(arhs(w) & alhs(r)):
                fired = set()
                for s1 in _subsets(tuples, len(w.atoms)):
                    for choice in _lhs_matches(w, s1, sims):
                        cells = [(choice[k].tid, p) for k, p in w.identity_positions()]
                        if cells[0] == cells[1]:
                            continue
                        for k, p in w.identity_positions():
                            if w.leading[k].relation == rel and p == pos:
                                fired.add(choice[k].tid)
                if not fired:
                    continue
                read = set()
                for s2 in _subsets(tuples, len(r.atoms)):
                    for choice in _lhs_matches(r, s2, sims):
                        for j, a in enumerate(r.atoms):
                            if a.relation != rel:
                                continue
                            if _compares_other(r, choice, j, pos):
                                read.add(choice[j].tid)
                if fired & read:
                    return False
    return True


def _compares_other(md, choice, j, pos) -> bool:
    var = md.atoms[j].terms[pos]
    here = (choice[j].tid, pos)
    others = []
    for k, a in enumerate(md.atoms):
        for q, v in enumerate(a.terms):
            if v == var and (k, q) != (j, pos):
                others.append((choice[k].tid, q))
    for s in md.sims:
        mates = []
        if s.left == var:
            mates.append(s.right)
        if s.right == var:
            mates.append(s.left)
        for m in mates:
            for k, a in enumerate(md.atoms):
                for q, v in enumerate(a.terms):
                    if v == m:
                        others.append((choice[k].tid, q))
    return any(o != here for o in others)


def _subsets(items, max_size):
    for k in range(1, min(max_size, len(items)) + 1):
        yield from combinations(items, k)
