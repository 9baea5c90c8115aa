"""Relational data model: schemas, identified tuples, values, instances and
the similarity-fact store the matching rules consult."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, Iterable, Iterator, Mapping, Optional, Sequence, Union

KINDS = ("short-string", "long-text", "numeric-string", "reference-id", "block-number")


class RelcoreError(Exception):
    pass


class SchemaError(RelcoreError):
    pass


class MalformedRow(RelcoreError):
    pass


class DuplicateTid(RelcoreError):
    pass


class NonNullableNull(RelcoreError):
    pass


class TidMismatch(RelcoreError):
    pass


class ObjectSet:
    """Immutable mapping key -> set of texts.

    A key normally holds one text; a merge that meets two different texts under
    the same key keeps both, which makes the entry multi-valued.
    """

    __slots__ = ("_items", "_hash")

    def __init__(self, entries: Union[Mapping, Iterable, None] = None):
        acc: Dict[str, set] = {}
        if entries is None:
            entries = ()
        if isinstance(entries, Mapping):
            entries = entries.items()
        for key, val in entries:
            bucket = acc.setdefault(str(key), set())
            if isinstance(val, (set, frozenset, list, tuple)):
                bucket.update(str(v) for v in val)
            else:
                bucket.add(str(val))
        self._items = tuple(sorted((k, frozenset(v)) for k, v in acc.items()))
        self._hash = hash(self._items)

    def keys(self):
        return [k for k, _ in self._items]

    def items(self):
        return list(self._items)

    def get(self, key, default=None):
        for k, v in self._items:
            if k == key:
                return v
        return default

    def __getitem__(self, key):
        found = self.get(key)
        if found is None:
            raise KeyError(key)
        return found

    def __contains__(self, key):
        return self.get(key) is not None

    def __len__(self):
        return len(self._items)

    def __iter__(self):
        return iter(self.keys())

    def __eq__(self, other):
        return isinstance(other, ObjectSet) and self._items == other._items

    def __hash__(self):
        return self._hash

    def union(self, other: "ObjectSet") -> "ObjectSet":
        merged = [(k, v) for k, v in self._items] + [(k, v) for k, v in other._items]
        return ObjectSet(merged)

    def text(self, key, sep="|") -> str:
        return sep.join(sorted(self[key]))

    def render(self) -> str:
        return ";".join(f"{k}={'|'.join(sorted(v))}" for k, v in self._items)

    def __repr__(self):
        return f"ObjectSet({self.render()!r})"


Value = Union[str, ObjectSet, None]


def value_text(v: Value) -> str:
    """Text form used in CSV exports and traces."""
    if v is None:
        return ""
    if isinstance(v, ObjectSet):
        return v.render()
    return str(v)


def _value_sort_key(v: Value):
    if v is None:
        return (0, "")
    if isinstance(v, ObjectSet):
        return (2, v.render())
    return (1, v)


@dataclass(frozen=True)
class AttributeSpec:
    name: str
    kind: str = "short-string"
    nullable: bool = False
    domain: Optional[str] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown attribute kind {self.kind!r}")
        if not self.name.isidentifier():
            raise SchemaError(f"bad attribute name {self.name!r}")


@dataclass(frozen=True)
class RelationSchema:
    name: str
    attributes: tuple

    def __post_init__(self):
        attrs = tuple(self.attributes)
        object.__setattr__(self, "attributes", attrs)
        if not attrs or attrs[0].kind != "reference-id":
            raise SchemaError(f"{self.name}: position 0 must be the reference-id")
        if any(a.kind == "reference-id" for a in attrs[1:]):
            raise SchemaError(f"{self.name}: more than one reference-id attribute")
        blocks = [i for i, a in enumerate(attrs) if a.kind == "block-number"]
        if len(blocks) > 1 or (blocks and blocks[0] != len(attrs) - 1):
            raise SchemaError(f"{self.name}: block-number must be a single last attribute")
        names = [a.name for a in attrs]
        if len(set(names)) != len(names):
            raise SchemaError(f"{self.name}: duplicate attribute names")

    @property
    def arity(self) -> int:
        return len(self.attributes)

    @property
    def names(self):
        return [a.name for a in self.attributes]

    def position(self, attr: str) -> int:
        for i, a in enumerate(self.attributes):
            if a.name == attr:
                return i
        raise SchemaError(f"{self.name} has no attribute {attr!r}")

    @property
    def block_position(self) -> Optional[int]:
        last = self.attributes[-1]
        return self.arity - 1 if last.kind == "block-number" and self.arity > 1 else None

    def tag(self, pos: int) -> str:
        """Attribute-domain tag of a position."""
        a = self.attributes[pos]
        if a.domain:
            return a.domain
        if a.kind in ("block-number", "reference-id"):
            return f"{self.name}.{a.name}"
        return a.name

    def label(self, pos: int) -> str:
        return f"{self.name}.{self.attributes[pos].name}"


def schema(name: str, *attrs, **kinds) -> RelationSchema:
    """Shorthand: schema("R", "T", "A", "B", Bl="block-number").

    The first attribute becomes the reference-id. Trailing "?" marks nullable.
    """
    specs = []
    for i, raw in enumerate(attrs):
        nullable = raw.endswith("?")
        nm = raw.rstrip("?")
        kind = "reference-id" if i == 0 else kinds.get(nm, "short-string")
        specs.append(AttributeSpec(nm, kind, nullable))
    return RelationSchema(name, tuple(specs))


@dataclass(frozen=True)
class Tuple:
    tid: int
    values: tuple

    def at(self, pos: int) -> Value:
        """Value at a schema position; position 0 is the tid as text."""
        return str(self.tid) if pos == 0 else self.values[pos - 1]


class Instance:
    """An immutable snapshot of a database; chase steps produce new versions."""

    __slots__ = ("schemas", "relations", "version", "_where", "_index", "_key")

    def __init__(self, schemas: Mapping[str, RelationSchema], relations: Mapping[str, Iterable[Tuple]] = None,
                 version: int = 0, _checked: bool = False):
        self.schemas = dict(schemas)
        rels = {name: () for name in self.schemas}
        for name, tuples in (relations or {}).items():
            if name not in self.schemas:
                raise SchemaError(f"no schema for relation {name!r}")
            rels[name] = tuple(sorted(tuples, key=lambda t: t.tid))
        self.relations = rels
        self.version = version
        self._where: Dict[int, tuple] = {}
        for name, tuples in rels.items():
            sch = self.schemas[name]
            for i, t in enumerate(tuples):
                if t.tid in self._where:
                    raise DuplicateTid(f"tid {t.tid} occurs twice")
                self._where[t.tid] = (name, i)
                if not _checked:
                    _check_tuple(sch, t)
        self._index = {}
        self._key = None

    def tuples(self, relation: str):
        return self.relations[relation]

    def tids(self, relation: Optional[str] = None):
        if relation is None:
            return sorted(self._where)
        return [t.tid for t in self.relations[relation]]

    def lookup(self, tid: int):
        """Return (relation name, Tuple) for a tid."""
        name, i = self._where[tid]
        return name, self.relations[name][i]

    def __contains__(self, tid):
        return tid in self._where

    def value(self, tid: int, pos: int) -> Value:
        return self.lookup(tid)[1].at(pos)

    def size(self) -> int:
        return len(self._where)

    def index(self, relation: str, pos: int) -> Dict:
        """Value -> tuples at one position, built lazily per version."""
        key = (relation, pos)
        idx = self._index.get(key)
        if idx is None:
            idx = {}
            for t in self.relations[relation]:
                idx.setdefault(t.at(pos), []).append(t)
            self._index[key] = idx
        return idx

    def updated(self, changes: Mapping[tuple, Value]) -> "Instance":
        """New version with (tid, pos) -> value replacements; pos >= 1."""
        rels = {k: list(v) for k, v in self.relations.items()}
        for (tid, pos), val in changes.items():
            if pos < 1:
                raise RelcoreError("the tid position is immutable")
            name, i = self._where[tid]
            t = rels[name][i]
            vals = list(t.values)
            vals[pos - 1] = val
            nt = Tuple(tid, tuple(vals))
            _check_tuple(self.schemas[name], nt)
            rels[name][i] = nt
        return Instance(self.schemas, rels, self.version + 1, _checked=True)

    def key(self):
        if self._key is None:
            self._key = tuple((name, tuple((t.tid, t.values) for t in ts))
                              for name, ts in sorted(self.relations.items()))
        return self._key

    def __eq__(self, other):
        return isinstance(other, Instance) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"Instance(v{self.version}, {self.size()} tuples)"

    def restrict(self, keep: Iterable[int]) -> "Instance":
        keep = set(keep)
        rels = {n: [t for t in ts if t.tid in keep] for n, ts in self.relations.items()}
        return Instance(self.schemas, rels, self.version + 1, _checked=True)


def _check_tuple(sch: RelationSchema, t: Tuple):
    if not isinstance(t.tid, int) or t.tid <= 0:
        raise MalformedRow(f"{sch.name}: tid must be a positive integer, got {t.tid!r}")
    if len(t.values) != sch.arity - 1:
        raise MalformedRow(f"{sch.name}({t.tid}): expected {sch.arity - 1} values, got {len(t.values)}")
    for a, v in zip(sch.attributes[1:], t.values):
        if v is None and not a.nullable:
            raise NonNullableNull(f"{sch.name}({t.tid}).{a.name} is not nullable")


def make_instance(schemas: Iterable[RelationSchema], rows: Mapping[str, Iterable[Sequence]]) -> Instance:
    """Build an instance from plain rows whose first cell is the tid."""
    schemas = {s.name: s for s in schemas}
    rels = {}
    for name, rs in rows.items():
        rels[name] = [Tuple(int(r[0]), tuple(r[1:])) for r in rs]
    return Instance(schemas, rels)


def load_csv(path, sch: RelationSchema) -> list:
    """Read one relation from CSV. A missing block-number column is filled
    with the tid."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedRow(f"{path}: missing header row")
        header = [h.strip() for h in header]
        names = sch.names
        bpos = sch.block_position
        synth_block = bpos is not None and header == names[:-1]
        if header != names and not synth_block:
            raise MalformedRow(f"{path}: header {header} does not match {names}")
        out, seen = [], set()
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise MalformedRow(f"{path}:{lineno}: expected {len(header)} cells, got {len(row)}")
            try:
                tid = int(row[0])
            except ValueError:
                raise MalformedRow(f"{path}:{lineno}: id {row[0]!r} is not an integer")
            if tid <= 0:
                raise MalformedRow(f"{path}:{lineno}: id must be positive")
            if tid in seen:
                raise DuplicateTid(f"{path}:{lineno}: duplicate id {tid}")
            seen.add(tid)
            vals = [c if c != "" else None for c in row[1:]]
            if synth_block:
                vals.append(str(tid))
            t = Tuple(tid, tuple(vals))
            _check_tuple(sch, t)
            out.append(t)
    return out


def write_csv(path, inst: Instance, relation: str):
    sch = inst.schemas[relation]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(sch.names)
        for t in inst.tuples(relation):
            w.writerow([t.tid] + [value_text(v) for v in t.values])


def active_domain(inst: Instance) -> Dict[str, set]:
    """Values per attribute domain, tids and Nulls excluded."""
    dom: Dict[str, set] = {}
    for name, tuples in inst.relations.items():
        sch = inst.schemas[name]
        for t in tuples:
            for pos in range(1, sch.arity):
                v = t.values[pos - 1]
                if v is not None:
                    dom.setdefault(sch.tag(pos), set()).add(v)
    return dom


def value_leq(a: Value, b: Value, mf) -> bool:
    """a precedes b when merging them yields b. Null is the bottom."""
    if a == b:
        return True
    if a is None:
        return True
    if b is None or mf is None:
        return False
    return mf.merge(a, b) == b


def instance_leq(d1: Instance, d2: Instance, mfs: Mapping) -> bool:
    if sorted(d1.schemas) != sorted(d2.schemas):
        raise TidMismatch("instances have different relations")
    for name in d1.relations:
        if d1.tids(name) != d2.tids(name):
            raise TidMismatch(f"tids of {name} differ")
        sch = d1.schemas[name]
        for t1, t2 in zip(d1.tuples(name), d2.tuples(name)):
            for pos in range(1, sch.arity):
                if not value_leq(t1.at(pos), t2.at(pos), mfs.get(sch.tag(pos))):
                    return False
    return True


def _pair(a, b):
    return (a, b) if _value_sort_key(a) <= _value_sort_key(b) else (b, a)


class SimilarityFactStore:
    """Similarity facts per attribute domain.

    Reflexivity and symmetry are built into the lookup: equal non-null values
    are always similar and pairs are stored unordered. A domain may also carry
    a predicate that decides similarity intensionally.
    """

    def __init__(self, facts: Iterable = (), predicates: Optional[Mapping[str, Callable]] = None):
        self._facts: Dict[str, set] = {}
        self._neigh: Dict[str, Dict] = {}
        self.predicates = dict(predicates or {})
        for tag, a, b in facts:
            self._add(tag, a, b)

    def _add(self, tag, a, b):
        if a is None or b is None:
            return
        self._facts.setdefault(tag, set()).add(_pair(a, b))
        nb = self._neigh.setdefault(tag, {})
        nb.setdefault(a, {a}).add(b)
        nb.setdefault(b, {b}).add(a)

    def with_facts(self, facts: Iterable) -> "SimilarityFactStore":
        new = SimilarityFactStore(self.triples(), self.predicates)
        for tag, a, b in facts:
            new._add(tag, a, b)
        return new

    def similar(self, tag: str, a: Value, b: Value) -> bool:
        if a is None or b is None:
            return False
        if a == b:
            return True
        if _pair(a, b) in self._facts.get(tag, ()):
            return True
        pred = self.predicates.get(tag)
        return bool(pred and pred(a, b))

    __call__ = similar

    def __contains__(self, fact):
        tag, a, b = fact
        return self.similar(tag, a, b)

    def neighbours(self, tag: str, a: Value):
        """Values known to be similar to a, a included; None if a predicate
        makes the set open-ended."""
        if tag in self.predicates:
            return None
        return self._neigh.get(tag, {}).get(a, {a})

    def tags(self):
        return sorted(self._facts)

    def values(self, tag: str):
        return set(self._neigh.get(tag, {}))

    def triples(self) -> list:
        """Stored non-reflexive facts, one orientation each, sorted."""
        out = []
        for tag in sorted(self._facts):
            for a, b in sorted(self._facts[tag], key=lambda p: (_value_sort_key(p[0]), _value_sort_key(p[1]))):
                if a != b:
                    out.append((tag, a, b))
        return out

    def closure(self) -> Iterator:
        """All facts with the reflexive and symmetric closure spelled out."""
        for tag in sorted(self._neigh):
            for a, nb in self._neigh[tag].items():
                for b in nb:
                    yield (tag, a, b)

    def __len__(self):
        return len(self.triples())
