import random

import pytest

from mdresolve.blocking import (BlockAssignment, BlockingError, NonBlockRhs, SimilarityOnBlock, apply_blocking,
                                block_mf, candidate_pairs, mdsb_from_keys, reduction_ratio, sb_blocking,
                                validate_blocking_md)
from mdresolve.chase import seeded
from mdresolve.fixtures import MAS_PAPER, MAS_SCHEMAS, mas_instance, mas_rules, mas_title_sims
from mdresolve.mdlang import is_sfai, parse_md
from mdresolve.relcore import SimilarityFactStore

SCHEMAS = {s.name: s for s in MAS_SCHEMAS}


class TestPrimitives:
    def test_block_mf(self):
        assert block_mf("5", "3") == "5" and block_mf("3", "5") == "5" and block_mf("4", "4") == "4"

    def test_reduction_ratio(self):
        assert reduction_ratio(3, 3) == pytest.approx(1 - 3 / 9)
        assert reduction_ratio(0, 5) == 1.0
        with pytest.raises(ValueError):
            reduction_ratio(1, 0)

    def test_candidate_pairs(self):
        c = candidate_pairs({1: 9, 2: 9, 3: 9, 4: 4}, "R")
        assert list(c) == [(1, 2), (1, 3), (2, 3)]
        assert (3, 1) in c and (1, 4) not in c and c.count == 3

    def test_singletons_give_no_pairs(self):
        assert candidate_pairs({1: 1, 2: 2}).count == 0


class TestMasBlocking:
    def test_paper_blocks(self):
        _, asg, _ = apply_blocking(mas_instance(), mas_rules(), mas_title_sims())
        assert set(asg.blocks("Paper")) == {frozenset({123, 205}), frozenset({195, 769})}

    def test_author_blocks_through_papers(self):
        _, asg, _ = apply_blocking(mas_instance(), mas_rules(), mas_title_sims())
        assert frozenset({612, 4994}) in asg.blocks("Author")
        assert frozenset({659}) in asg.blocks("Author")

    def test_single_relation_rules_leave_authors_apart(self):
        rules = [m for m in mas_rules() if m.name in ("paper_title", "author_name_aff")]
        _, asg, _ = apply_blocking(mas_instance(), rules, mas_title_sims())
        assert all(len(b) == 1 for b in asg.blocks("Author"))

    def test_no_facts_singletons(self):
        _, asg, _ = apply_blocking(mas_instance(), mas_rules()[:1], SimilarityFactStore())
        assert all(len(b) == 1 for b in asg.blocks("Paper"))

    def test_order_independent(self):
        base = apply_blocking(mas_instance(), mas_rules(), mas_title_sims())[1]
        for seed in range(5):
            assert apply_blocking(mas_instance(), mas_rules(), mas_title_sims(), pick=seeded(seed))[1] == base

    def test_block_mf_picks_larger(self):
        _, asg, _ = apply_blocking(mas_instance(), mas_rules(), mas_title_sims())
        assert asg["Paper"][123] == asg["Paper"][205] == 205
        assert asg["Paper"][195] == asg["Paper"][769] == 769

    def test_report(self):
        asg = BlockAssignment({"Paper": {205: 205, 123: 205}})
        assert asg.report() == "relation,tid,block\nPaper,123,205\nPaper,205,205\n"


class TestValidation:
    def test_rhs_must_be_block(self):
        md = parse_md("md m: Paper(p1, x1, y1, c1, j1, k1, bl1), Paper(p2, x2, y2, c2, j2, k2, bl2), "
                      "sim(Title: x1, x2) -> ident(y1, y2)")
        with pytest.raises(NonBlockRhs):
            validate_blocking_md(md, SCHEMAS)

    def test_no_similarity_on_block(self):
        md = parse_md("md m: Paper(p1, x1, y1, c1, j1, k1, bl1), Paper(p2, x2, y2, c2, j2, k2, bl2), "
                      "sim(Paper.Bl: bl1, bl2) -> ident(bl1, bl2)")
        with pytest.raises(SimilarityOnBlock):
            validate_blocking_md(md, SCHEMAS)


class TestStandardBlocking:
    def test_exact_keys_split_near_titles(self):
        asg = sb_blocking(mas_instance(), "Paper", ["Title", "Year"])
        assert asg[123] != asg[205]

    def test_year_conference_key(self):
        asg = sb_blocking(mas_instance(), "Paper", ["Year", "CID"])
        assert asg == {123: 123, 195: 195, 205: 123, 769: 195}

    def test_null_key_is_singleton(self):
        asg = sb_blocking(mas_instance(), "Paper", ["JID"])
        assert asg == {t: t for t in (123, 195, 205, 769)}

    def test_bad_keys(self):
        with pytest.raises(BlockingError):
            sb_blocking(mas_instance(), "Paper", [])
        with pytest.raises(BlockingError):
            sb_blocking(mas_instance(), "Paper", ["Bl"])

    def test_mdsb_from_keys(self):
        md = mdsb_from_keys(MAS_PAPER, ["Title", "Year", "CID"], {"Title": "Title"}, "paper_title")
        validate_blocking_md(md, SCHEMAS)
        _, asg, _ = apply_blocking(mas_instance(), [md], mas_title_sims())
        assert set(asg.blocks("Paper")) == {frozenset({123, 205}), frozenset({195, 769})}


class TestBlockingUniqueness:
    def test_blocking_rules_sfai_on_mas(self):
        assert is_sfai(mas_rules(), mas_instance(), mas_title_sims()).is_sfai

    def test_random_titles_order_independent(self):
        rng = random.Random(3)
        inst = mas_instance()
        titles = [t.values[0] for t in inst.tuples("Paper")]
        for _ in range(10):
            facts = [("Title", a, b) for i, a in enumerate(titles) for b in titles[i + 1:] if rng.random() < 0.5]
            sims = SimilarityFactStore(facts)
            base = apply_blocking(inst, mas_rules(), sims)[1]
            for seed in range(3):
                assert apply_blocking(inst, mas_rules(), sims, pick=seeded(seed))[1] == base
