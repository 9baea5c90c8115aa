import os
import sys
import time
from contextlib import contextmanager

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", deadline=None)
settings.load_profile("default")

from mdresolve.classify import SvmModel, SvmParams  # noqa: E402
from mdresolve.fixtures import MAS_PAPER_AUTHORS, MAS_PAPERS, MAS_AUTHORS, MAS_BLOCKING_RULES  # noqa: E402


# ------------------------------------------------------------------ acceptance bookkeeping

def pytest_configure(config):
    config._criteria = {}


@pytest.fixture
def criterion(request):
    """Context manager that times a criterion, enforces its limit and
    records one pass/fail line for the terminal summary."""
    results = request.config._criteria

    @contextmanager
    def run(number, title, limit):
        start = time.perf_counter()
        ok = False
        try:
            yield
            ok = True
        finally:
            elapsed = time.perf_counter() - start
            within = elapsed < limit
            results[number] = (ok and within, title, elapsed, limit)
            line = f"criterion {number}: {'PASS' if ok and within else 'FAIL'} ({elapsed:.2f} s, limit {limit} s) {title}"
            print(line)
        assert within, f"criterion {number} took {elapsed:.2f} s, limit {limit} s"
    return run


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = getattr(config, "_criteria", {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results, key=lambda k: (int(str(k).rstrip("ab")), str(k))):
        ok, title, elapsed, limit = results[n]
        terminalreporter.write_line(
            f"criterion {str(n):>3}: {'PASS' if ok else 'FAIL'}  {elapsed:7.2f} s / {limit} s  {title}")


# ------------------------------------------------------------------ workspaces

def _csv(path, header, rows):
    import csv
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow(["" if c is None else c for c in r])


MAS_CONFIG = """[data]
Author = author.csv
Paper = paper.csv
PaperAuthor = paperauthor.csv

[schemas]
Author = AID:reference-id, Name, Affiliation?, Bl:block-number
Paper = PID:reference-id, Title:long-text, Year:numeric-string?, CID:numeric-string?, JID:numeric-string?, Keyword:long-text?, Bl:block-number
PaperAuthor = PAID:reference-id, PID:numeric-string, AID:numeric-string, Name, Affiliation?

[similarity]
Title = jaro-winkler 0.9
Name = jaro-winkler 0.95
Affiliation = jaro-winkler 0.95

[features]
Paper = Title:jaro-winkler, Year:levenshtein, CID:equality
Author = Name:jaro-winkler

[blocking]
mode = MDCB
keys.Paper = Title, Year, CID
keys.Author = Name, Affiliation
mdsb_rules = mdsb.md
mdcb_rules = mdcb.md

[svm]
model.Paper = model_paper.txt
model.Author = model_author.txt

[merge]
relations = Paper, Author

[output]
dir = out
"""


def write_mini_mas(directory):
    """The bibliographic sample as CSV files, rule files, fixed models and a config."""
    os.makedirs(directory, exist_ok=True)
    _csv(os.path.join(directory, "author.csv"), ["AID", "Name", "Affiliation"], [r[:3] for r in MAS_AUTHORS])
    _csv(os.path.join(directory, "paper.csv"), ["PID", "Title", "Year", "CID", "JID", "Keyword"],
         [r[:6] for r in MAS_PAPERS])
    _csv(os.path.join(directory, "paperauthor.csv"), ["PAID", "PID", "AID", "Name", "Affiliation"],
         MAS_PAPER_AUTHORS)
    rules = MAS_BLOCKING_RULES.split("# papers with similar titles whose authors")
    with open(os.path.join(directory, "mdsb.md"), "w") as fh:
        fh.write(rules[0])
    with open(os.path.join(directory, "mdcb.md"), "w") as fh:
        fh.write(MAS_BLOCKING_RULES)
    # duplicates need a close title, the same year and the same conference
    SvmModel(np.array([1.0, 1.0, 1.0]), -2.8, SvmParams(), ("Title", "Year", "CID")).save(
        os.path.join(directory, "model_paper.txt"))
    SvmModel(np.array([1.0]), -0.95, SvmParams(), ("Name",)).save(os.path.join(directory, "model_author.txt"))
    path = os.path.join(directory, "config.ini")
    with open(path, "w") as fh:
        fh.write(MAS_CONFIG)
    return path


@pytest.fixture
def mini_mas(tmp_path):
    return write_mini_mas(str(tmp_path / "mas"))


@pytest.fixture(scope="session")
def synth_dir(tmp_path_factory):
    from mdresolve.synth import SynthParams, generate, write_corpus
    d = str(tmp_path_factory.mktemp("synth"))
    write_corpus(generate(SynthParams(seed=7)), d, 7)
    return d
