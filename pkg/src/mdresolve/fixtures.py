"""Small worked instances used by the tests, the docs and `mdresolve check`."""

from __future__ import annotations

from .mdlang.mfs import MFRegistry, subset_lattice_mf
from .mdlang.model import parse_rules
from .relcore import AttributeSpec as A
from .relcore import RelationSchema, SimilarityFactStore, make_instance

# --------------------------------------------------------------- three-tuple R(A, B, C)

R_SCHEMA = RelationSchema("R", (A("T", "reference-id"), A("A"), A("B"), A("C")))

CHAIN_RULES = """
md phi1: R(t1, a1, b1, c1), R(t2, a2, b2, c2), sim(A: a1, a2) -> ident(b1, b2)
md phi2: R(t1, a1, b1, c1), R(t2, a2, b2, c2), sim(B: b1, b2) -> ident(c1, c2)
"""


def chain_instance():
    return make_instance([R_SCHEMA], {"R": [(1, "a1", "b1", "c1"), (2, "a2", "b2", "c2"), (3, "a3", "b3", "c3")]})


def chain_rules():
    return parse_rules(CHAIN_RULES)


def chain_sims():
    # b4 is not in the instance; the fact is there to show it does not matter
    return SimilarityFactStore([("A", "a1", "a2"), ("A", "a1", "a3"), ("B", "b3", "b4")])


def chain_mfs():
    return MFRegistry.of(subset_lattice_mf("B", "b", "123"), subset_lattice_mf("C", "c", "123"))


def chain_rows(*rows):
    """Instance from (B, C) pairs for tuples 1..3, with A fixed."""
    data = [(i + 1, f"a{i + 1}", b, c) for i, (b, c) in enumerate(rows)]
    return make_instance([R_SCHEMA], {"R": data})


# the two printed enforcement orders, as (rule, tuple pair) steps
CHAIN_ORDER_ONE = [("phi1", (1, 2)), ("phi2", (1, 2)), ("phi1", (1, 3)),
                   ("phi1", (1, 2)), ("phi2", (2, 3)), ("phi2", (1, 2))]
CHAIN_ORDER_ONE_STATES = [
    [("b12", "c1"), ("b12", "c2"), ("b3", "c3")],
    [("b12", "c12"), ("b12", "c12"), ("b3", "c3")],
    [("b123", "c12"), ("b12", "c12"), ("b123", "c3")],
    [("b123", "c12"), ("b123", "c12"), ("b123", "c3")],
    [("b123", "c12"), ("b123", "c123"), ("b123", "c123")],
    [("b123", "c123"), ("b123", "c123"), ("b123", "c123")],
]
CHAIN_ORDER_TWO = [("phi1", (1, 3)), ("phi1", (1, 2)), ("phi1", (1, 3)),
                   ("phi2", (2, 3)), ("phi2", (1, 3)), ("phi2", (1, 2))]
CHAIN_ORDER_TWO_STATES = [
    [("b13", "c1"), ("b2", "c2"), ("b13", "c3")],
    [("b123", "c1"), ("b123", "c2"), ("b13", "c3")],
    [("b123", "c1"), ("b123", "c2"), ("b123", "c3")],
    [("b123", "c1"), ("b123", "c23"), ("b123", "c23")],
    [("b123", "c123"), ("b123", "c23"), ("b123", "c123")],
    [("b123", "c123"), ("b123", "c123"), ("b123", "c123")],
]

# --------------------------------------------------------------- Author / Paper with shared block numbers

AUTHOR = RelationSchema("Author", (A("T", "reference-id"), A("Name"), A("Aff"), A("PID", "numeric-string"),
                                   A("Bl", "block-number")))
PAPER = RelationSchema("Paper", (A("T", "reference-id"), A("PID", "numeric-string"), A("Title"), A("Key"),
                                 A("Bl", "block-number")))

COLLECTIVE_RULES = """
md phi1: Author(t1, x1, y1, p1, bl1), Author(t2, x2, y2, p2, bl2), sim(Name: x1, x2),
         Paper(t3, p1, z1, w1, bl4), Paper(t4, p2, z2, w2, bl4) -> ident(bl1, bl2)
md phi2: Paper(t1, p1, z1, w1, bl1), Paper(t2, p2, z2, w2, bl2), sim(Title: z1, z2),
         Author(t3, x1, y1, p1, bl3), Author(t4, x2, y2, p2, bl3) -> ident(bl1, bl2)
"""


def collective_rules():
    return parse_rules(COLLECTIVE_RULES)


def collective_sims():
    return SimilarityFactStore([("Name", "n2", "n3"), ("Title", "title1", "title3")])


def collective_d0():
    return make_instance([AUTHOR, PAPER], {
        "Author": [(1, "n1", "a1", "120", "250"), (2, "n2", "a2", "121", "251"), (3, "n3", "a3", "122", "252")],
        "Paper": [(4, "120", "title1", "k1", "302"), (5, "122", "title2", "k2", "300"),
                  (6, "121", "title3", "k3", "300")],
    })


def collective_d1():
    return make_instance([AUTHOR, PAPER], {
        "Author": [(1, "n1", "a1", "120", "250"), (2, "n2", "a2", "121", "250"), (3, "n3", "a3", "122", "252"),
                   (4, "n4", "a4", "121", "253")],
        "Paper": [(5, "120", "title1", "k1", "302"), (6, "122", "title2", "k2", "300"),
                  (7, "121", "title3", "k3", "300")],
    })


# --------------------------------------------------------------- bibliographic sample

MAS_AUTHOR = RelationSchema("Author", (A("AID", "reference-id"), A("Name"), A("Affiliation", nullable=True),
                                       A("Bl", "block-number")))
MAS_PAPER = RelationSchema("Paper", (A("PID", "reference-id"), A("Title", "long-text"),
                                     A("Year", "numeric-string", True), A("CID", "numeric-string", True),
                                     A("JID", "numeric-string", True), A("Keyword", "long-text", True),
                                     A("Bl", "block-number")))
MAS_PAPER_AUTHOR = RelationSchema("PaperAuthor", (A("PAID", "reference-id"), A("PID", "numeric-string"),
                                                  A("AID", "numeric-string"), A("Name"),
                                                  A("Affiliation", nullable=True)))
MAS_SCHEMAS = (MAS_AUTHOR, MAS_PAPER, MAS_PAPER_AUTHOR)

MAS_AUTHORS = [
    (659, "Jean-Pierre Olivier de", "Ecole des Hautes", "659"),
    (2546, "Olivier de Sardan", "Recherche Scientifique", "2546"),
    (612, "Matthias Roeckl", "German Aerospace Center", "612"),
    (4994, "Matthias Roeckl", "Institute of Communications", "4994"),
]
MAS_PAPERS = [
    (123, "Illness entities in West Africa", "1998", "179", None, "West Africa, Illness", "123"),
    (205, "Illness entities in Africa", "1998", "179", None, "Africa, Illness", "205"),
    (769, "DLR Simulation Environment m3", "2007", "146", None, "Simulation m3", "769"),
    (195, "DLR Simulation Environment", "2007", "146", None, "Simulation", "195"),
]
MAS_PAPER_AUTHORS = [
    (9001, "123", "659", "Jean-Pierre Olivier de", "Ecole des Hautes"),
    (9002, "205", "2546", "Olivier de Sardan", "Recherche Scientifique"),
    (9003, "769", "612", "Matthias Roeckl", "German Aerospace Center"),
    (9004, "195", "4994", "Matthias Roeckl", "Institute of Communications"),
]

MAS_BLOCKING_RULES = """
# papers with similar titles, same year and same conference
md paper_title: Paper(p1, x1, y, z, _, _, bl1), Paper(p2, x2, y, z, _, _, bl2),
                sim(Title: x1, x2) -> ident(bl1, bl2)

# authors with similar names and affiliations
md author_name_aff: Author(a1, x1, y1, bl1), Author(a2, x2, y2, bl2),
                    sim(Name: x1, x2), sim(Affiliation: y1, y2) -> ident(bl1, bl2)

# papers with similar titles whose authors share a block
md paper_by_authors: Paper(p1, x1, _, _, _, _, bl1), Paper(p2, x2, _, _, _, _, bl2),
                     PaperAuthor(_, p1, a1, n1, f1), PaperAuthor(_, p2, a2, n2, f2),
                     Author(a1, n1, f1, bl3), Author(a2, n2, f2, bl3),
                     sim(Title: x1, x2) -> ident(bl1, bl2)

# authors with similar names whose papers share a block
md author_by_papers: Author(a1, x1, y1, bl1), Author(a2, x2, y2, bl2), sim(Name: x1, x2),
                     PaperAuthor(_, p1, a1, x1, y1), PaperAuthor(_, p2, a2, x2, y2),
                     Paper(p1, _, _, _, _, _, bl3), Paper(p2, _, _, _, _, _, bl3) -> ident(bl1, bl2)
"""


def mas_instance():
    return make_instance(MAS_SCHEMAS, {"Author": MAS_AUTHORS, "Paper": MAS_PAPERS,
                                       "PaperAuthor": MAS_PAPER_AUTHORS})


def mas_rules():
    return parse_rules(MAS_BLOCKING_RULES)


def mas_title_sims():
    return SimilarityFactStore([
        ("Title", "Illness entities in West Africa", "Illness entities in Africa"),
        ("Title", "DLR Simulation Environment m3", "DLR Simulation Environment"),
    ])


# --------------------------------------------------------------- order-dependent results

# one self-interacting rule: merging t1,t2 first leaves t3 apart and vice versa
SPLIT_RULES = "md psi: R(t1, a1, b1, c1), R(t2, a2, b2, c2), sim(A: a1, a2) -> ident(a1, a2)\n"


def split_instance():
    return make_instance([R_SCHEMA], {"R": [(1, "a1", "b1", "c1"), (2, "a2", "b2", "c2"), (3, "a3", "b3", "c3")]})


def split_rules():
    return parse_rules(SPLIT_RULES)


def split_sims():
    return SimilarityFactStore([("A", "a1", "a2"), ("A", "a2", "a3")])


def split_mfs():
    return MFRegistry.of(subset_lattice_mf("A", "a", "123"))


# the two stable results, as A-columns for tuples 1..3
SPLIT_FINALS = (("a12", "a12", "a3"), ("a1", "a23", "a23"))

# rules and data that pass the initial-instance SFAI test yet have two clean
# results: merging B values makes them equal, which switches on phi2 late
LATE_RULES = """
md phi1: R(t1, a1, b1, c1), R(t2, a2, b2, c2), sim(A: a1, a2) -> ident(b1, b2)
md phi2: R(t1, a1, b1, c1), R(t2, a2, b2, c2), sim(B: b1, b2), sim(C: c1, c2) -> ident(a1, a2)
"""


def late_instance():
    return make_instance([R_SCHEMA], {"R": [(1, "a1", "b3", "c2"), (2, "a2", "b1", "c1"), (3, "a2", "b2", "c3")]})


def late_rules():
    return parse_rules(LATE_RULES)


def late_sims():
    return SimilarityFactStore([("A", "a1", "a2"), ("B", "b2", "b3"), ("C", "c1", "c2")])


def late_mfs():
    return MFRegistry.of(*(subset_lattice_mf(t, t.lower(), "123") for t in "ABC"))
