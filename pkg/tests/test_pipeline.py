import csv
import os

import pytest

from mdresolve.cli import main
from mdresolve.config import ConfigError, load_config
from mdresolve.fixtures import CHAIN_RULES
from mdresolve.pipeline import MetricsReport, metrics_csv, precision_recall, run_pipeline


def rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


def replace(path, old, new):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text.replace(old, new))


class TestMetrics:
    def test_precision_recall(self):
        assert precision_recall([(1, 2), (3, 4)], [(2, 1), (5, 6)]) == (0.5, 0.5)
        assert precision_recall([], [(1, 2)]) == (1.0, 0.0)
        assert precision_recall([(1, 2)], []) == (0.0, 1.0)

    def test_report(self):
        r = MetricsReport("MDCB", "Paper", 4, 2, 2, 0, 0)
        assert r.N == 16 and r.reduction_ratio == pytest.approx(1 - 2 / 16)
        assert metrics_csv([r]).splitlines()[1] == "MDCB,Paper,4,2,16,0.875000,2,0,0,1.000000,1.000000"


class TestMiniMas:
    def test_run(self, mini_mas, tmp_path):
        out = str(tmp_path / "o")
        assert main(["run", "-c", mini_mas, "-o", out]) == 0
        dups = [r for r in rows(os.path.join(out, "duplicates.csv"))[1:] if r[3] == "1"]
        assert sorted(dups) == [["Author", "612", "4994", "1"], ["Paper", "123", "205", "1"],
                                ["Paper", "195", "769", "1"]]
        papers = rows(os.path.join(out, "resolved_Paper.csv"))
        assert sorted(r[0] for r in papers[1:]) == ["123", "195"]
        authors = rows(os.path.join(out, "resolved_Author.csv"))
        assert sorted(r[0] for r in authors[1:]) == ["2546", "612", "659"]

    def test_blocks(self, mini_mas, tmp_path):
        out = str(tmp_path / "o")
        assert main(["block", "-c", mini_mas, "-o", out]) == 0
        blocks = rows(os.path.join(out, "blocks.csv"))
        paper = {int(r[1]): r[2] for r in blocks[1:] if r[0] == "Paper"}
        assert paper[123] == paper[205] and paper[195] == paper[769] and paper[123] != paper[195]

    def test_deterministic(self, mini_mas, tmp_path):
        a, b = str(tmp_path / "a"), str(tmp_path / "b")
        assert main(["run", "-c", mini_mas, "-o", a]) == 0
        assert main(["run", "-c", mini_mas, "-o", b]) == 0
        assert sorted(os.listdir(a)) == sorted(os.listdir(b))
        for name in os.listdir(a):
            with open(os.path.join(a, name), "rb") as x, open(os.path.join(b, name), "rb") as y:
                assert x.read() == y.read(), name

    def test_compare_writes_chart(self, mini_mas, tmp_path):
        out = str(tmp_path / "c")
        assert main(["compare", "-c", mini_mas, "-o", out]) == 0
        with open(os.path.join(out, "compare.png"), "rb") as fh:
            assert fh.read(8) == b"\x89PNG\r\n\x1a\n"
        assert [r[0] for r in rows(os.path.join(out, "compare.csv"))[1:]] == ["SB"] * 2 + ["MDSB"] * 2 + ["MDCB"] * 2

    def test_empty_dataset(self, mini_mas, tmp_path):
        d = os.path.dirname(mini_mas)
        for name, header in (("author.csv", "AID,Name,Affiliation\n"),
                             ("paper.csv", "PID,Title,Year,CID,JID,Keyword\n"),
                             ("paperauthor.csv", "PAID,PID,AID,Name,Affiliation\n")):
            with open(os.path.join(d, name), "w") as fh:
                fh.write(header)
        res = run_pipeline(load_config(mini_mas), out_dir=str(tmp_path / "e"))
        assert res.metrics == []
        assert rows(str(tmp_path / "e" / "metrics.csv")) == [MetricsReport.HEADER]

    def test_merge_from_file(self, mini_mas, tmp_path):
        dup = tmp_path / "d.csv"
        dup.write_text("relation,tid1,tid2,label\nPaper,123,205,1\nPaper,195,769,0\n")
        out = str(tmp_path / "m")
        assert main(["merge", "-c", mini_mas, "--duplicates", str(dup), "-o", out]) == 0
        assert sorted(r[0] for r in rows(os.path.join(out, "resolved_Paper.csv"))[1:]) == ["123", "195", "769"]


class TestExitCodes:
    def test_missing_config(self, tmp_path):
        assert main(["run", "-c", str(tmp_path / "nope.ini")]) == 2

    def test_missing_rule_file(self, mini_mas, tmp_path):
        os.remove(os.path.join(os.path.dirname(mini_mas), "mdcb.md"))
        out = tmp_path / "o"
        assert main(["run", "-c", mini_mas, "-o", str(out)]) == 2
        assert not out.exists()
        with pytest.raises(ConfigError):
            load_config(mini_mas)

    def test_bad_header(self, mini_mas):
        replace(os.path.join(os.path.dirname(mini_mas), "author.csv"), "AID,Name", "ID,Name")
        assert main(["run", "-c", mini_mas]) == 3

    def test_bad_rule_syntax(self, mini_mas):
        replace(os.path.join(os.path.dirname(mini_mas), "mdcb.md"), "-> ident(bl1, bl2)", "ident(bl1, bl2)")
        assert main(["run", "-c", mini_mas]) == 2

    def test_strict_check_on_interacting_rules(self, tmp_path, capsys):
        p = tmp_path / "chain.md"
        p.write_text(CHAIN_RULES)
        assert main(["check", "-r", str(p)]) == 0
        assert main(["--strict", "check", "-r", str(p)]) == 4
        assert "interaction\tphi1 -> phi2" in capsys.readouterr().out

    def test_check_mini_mas(self, mini_mas, capsys):
        assert main(["--strict", "check", "-c", mini_mas]) == 0
        out = capsys.readouterr().out
        assert "sfai\tyes" in out and "blocking-shape\tyes" in out and "violated" not in out


class TestDatalog:
    def test_blocking_program(self, mini_mas, capsys):
        assert main(["emit-datalog", "-c", mini_mas]) == 0
        text = capsys.readouterr().out
        assert "% paper_title" in text and "Title-Sim(X1, X2), Bl1 < Bl2." in text
        assert "not Paper-OldVer(" in text

    def test_merging_program(self, mini_mas, tmp_path):
        out = tmp_path / "m.dl"
        assert main(["emit-datalog", "-c", mini_mas, "--mode", "merging", "-o", str(out)]) == 0
        assert "merge_Paper_Title" in out.read_text()
