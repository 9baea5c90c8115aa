import pytest

from mdresolve.fixtures import (MAS_AUTHOR, R_SCHEMA, chain_instance, chain_mfs, chain_rows, mas_instance)
from mdresolve.relcore import (AttributeSpec, DuplicateTid, Instance, MalformedRow, NonNullableNull, ObjectSet,
                               RelationSchema, SchemaError, SimilarityFactStore, TidMismatch, Tuple, active_domain,
                               instance_leq, load_csv, make_instance, schema, value_text, write_csv)


def write(tmp_path, text, name="r.csv"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return str(p)


class TestSchema:
    def test_reference_id_first(self):
        with pytest.raises(SchemaError):
            RelationSchema("R", (AttributeSpec("A"), AttributeSpec("T", "reference-id")))

    def test_single_reference_id(self):
        with pytest.raises(SchemaError):
            RelationSchema("R", (AttributeSpec("T", "reference-id"), AttributeSpec("U", "reference-id")))

    def test_block_number_last(self):
        with pytest.raises(SchemaError):
            RelationSchema("R", (AttributeSpec("T", "reference-id"), AttributeSpec("Bl", "block-number"),
                                 AttributeSpec("A")))

    def test_unique_names(self):
        with pytest.raises(SchemaError):
            schema("R", "T", "A", "A")

    def test_unknown_kind(self):
        with pytest.raises(SchemaError):
            AttributeSpec("A", "blob")

    def test_tags(self):
        assert MAS_AUTHOR.tag(1) == "Name"
        assert MAS_AUTHOR.tag(3) == "Author.Bl"
        assert MAS_AUTHOR.block_position == 3
        assert R_SCHEMA.block_position is None

    def test_shorthand(self):
        s = schema("R", "T", "A?", "Bl", Bl="block-number")
        assert s.attributes[1].nullable and s.block_position == 2


class TestLoadCsv:
    def test_synthesizes_block_numbers(self, tmp_path):
        text = ("AID,Name,Affiliation\n659,Jean-Pierre Olivier de,Ecole des Hautes\n"
                "2546,Olivier de Sardan,Recherche Scientifique\n612,Matthias Roeckl,German Aerospace Center\n"
                "4994,Matthias Roeckl,Institute of Communications\n")
        tuples = load_csv(write(tmp_path, text), MAS_AUTHOR)
        assert [t.tid for t in tuples] == [659, 2546, 612, 4994]
        assert [t.values[-1] for t in tuples] == ["659", "2546", "612", "4994"]

    def test_header_only(self, tmp_path):
        assert load_csv(write(tmp_path, "AID,Name,Affiliation,Bl\n"), MAS_AUTHOR) == []

    def test_arity_mismatch(self, tmp_path):
        with pytest.raises(MalformedRow):
            load_csv(write(tmp_path, "AID,Name,Affiliation,Bl\n1,a,b\n"), MAS_AUTHOR)

    def test_duplicate_tid(self, tmp_path):
        with pytest.raises(DuplicateTid):
            load_csv(write(tmp_path, "AID,Name,Affiliation\n1,a,b\n1,c,d\n"), MAS_AUTHOR)

    def test_null_in_required(self, tmp_path):
        with pytest.raises(NonNullableNull):
            load_csv(write(tmp_path, "AID,Name,Affiliation\n1,,b\n"), MAS_AUTHOR)

    def test_nullable_empty_cell(self, tmp_path):
        (t,) = load_csv(write(tmp_path, "AID,Name,Affiliation\n1,a,\n"), MAS_AUTHOR)
        assert t.values == ("a", None, "1")

    def test_bad_header(self, tmp_path):
        with pytest.raises(MalformedRow):
            load_csv(write(tmp_path, "X,Name,Affiliation\n"), MAS_AUTHOR)

    def test_non_integer_id(self, tmp_path):
        with pytest.raises(MalformedRow):
            load_csv(write(tmp_path, "AID,Name,Affiliation\nx,a,b\n"), MAS_AUTHOR)

    def test_round_trip(self, tmp_path):
        inst = mas_instance()
        p = str(tmp_path / "a.csv")
        write_csv(p, inst, "Author")
        assert [t for t in load_csv(p, MAS_AUTHOR)] == list(inst.tuples("Author"))


class TestInstance:
    def test_duplicate_tid_across_relations(self):
        a = schema("A", "T", "X")
        b = schema("B", "T", "Y")
        with pytest.raises(DuplicateTid):
            make_instance([a, b], {"A": [(1, "x")], "B": [(1, "y")]})

    def test_updated_is_new_version(self):
        inst = chain_instance()
        new = inst.updated({(1, 2): "b12"})
        assert inst.value(1, 2) == "b1" and new.value(1, 2) == "b12"
        assert new.version == inst.version + 1
        assert new.tids() == inst.tids()

    def test_tid_immutable(self):
        with pytest.raises(Exception):
            chain_instance().updated({(1, 0): "9"})

    def test_update_checks_nulls(self):
        with pytest.raises(NonNullableNull):
            chain_instance().updated({(1, 1): None})

    def test_equality_and_hash(self):
        assert chain_instance() == chain_instance()
        assert len({chain_instance(), chain_instance()}) == 1

    def test_restrict(self):
        assert chain_instance().restrict([1, 3]).tids() == [1, 3]

    def test_tid_positive(self):
        with pytest.raises(MalformedRow):
            Instance({"R": R_SCHEMA}, {"R": [Tuple(0, ("a", "b", "c"))]})


class TestActiveDomain:
    def test_empty(self):
        assert active_domain(make_instance([R_SCHEMA], {})) == {}

    def test_chain_instance(self):
        assert active_domain(chain_instance()) == {"A": {"a1", "a2", "a3"}, "B": {"b1", "b2", "b3"},
                                                   "C": {"c1", "c2", "c3"}}

    def test_shared_domain_counts_once(self):
        s = RelationSchema("R", (AttributeSpec("T", "reference-id"), AttributeSpec("X", domain="D"),
                                 AttributeSpec("Y", domain="D")))
        assert active_domain(make_instance([s], {"R": [(1, "x", "x")]})) == {"D": {"x"}}

    def test_nulls_excluded(self):
        inst = make_instance([MAS_AUTHOR], {"Author": [(1, "n", None, "1")]})
        assert "Affiliation" not in active_domain(inst)


class TestOrder:
    def test_reflexive(self):
        assert instance_leq(chain_instance(), chain_instance(), chain_mfs())

    def test_initial_below_final(self):
        d6 = chain_rows(*[("b123", "c123")] * 3)
        assert instance_leq(chain_instance(), d6, chain_mfs())
        assert not instance_leq(d6, chain_instance(), chain_mfs())

    def test_tid_mismatch(self):
        with pytest.raises(TidMismatch):
            instance_leq(chain_instance(), chain_instance().restrict([1]), chain_mfs())


class TestObjectSet:
    def test_union_keeps_both_values(self):
        u = ObjectSet({"k": "a"}).union(ObjectSet({"k": "b", "j": "c"}))
        assert u["k"] == {"a", "b"} and u.text("j") == "c"
        assert u.render() == "j=c;k=a|b"

    def test_value_text(self):
        assert value_text(None) == "" and value_text("x") == "x"


class TestSimilarityStore:
    def test_closure(self):
        s = SimilarityFactStore([("A", "x", "y")])
        assert s.similar("A", "y", "x") and s.similar("A", "x", "x")
        assert ("A", "y", "x") in s
        assert not s.similar("B", "x", "y")
        assert set(s.closure()) == {("A", "x", "x"), ("A", "y", "y"), ("A", "x", "y"), ("A", "y", "x")}

    def test_null_never_similar(self):
        s = SimilarityFactStore([("A", None, "y")])
        assert not s.similar("A", None, None) and len(s) == 0

    def test_predicate(self):
        s = SimilarityFactStore(predicates={"N": lambda a, b: a[0] == b[0]})
        assert s.similar("N", "ab", "ac") and s.neighbours("N", "ab") is None

    def test_with_facts(self):
        s = SimilarityFactStore([("A", "x", "y")]).with_facts([("A", "y", "z")])
        assert s.triples() == [("A", "x", "y"), ("A", "y", "z")]
