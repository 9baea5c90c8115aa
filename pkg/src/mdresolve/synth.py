"""Seeded synthetic bibliographic corpus with injected duplicates and ground truth."""

from __future__ import annotations

import csv
import os
import random
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, List

from .fixtures import MAS_SCHEMAS

WORDS = """adaptive agent algebra analysis approximate architecture bayesian benchmark bounded cache
calculus causal channel clustering code cognitive compact compiler complexity concurrent constraint
control convex cooperative data database decision deep dependency design detection distributed
dynamic efficient embedded energy engine entity estimation evaluation evolution explicit fault
federated filter flow formal framework fuzzy game generative genetic graph grid heuristic hybrid
image incremental index inference integration interactive kernel knowledge language latent layered
learning linear logic matching memory mining mobile model monitoring network neural noise online
optimal parallel pattern planning policy probabilistic program protocol quantum query random
reasoning recognition recursive regression relational resource robust routing rule scalable
scheduling search secure semantic sensor sequence signal simulation social sparse spatial spectral
statistical storage stream structure symbolic synthesis system temporal theory topology tracking
transfer tree uncertain verification virtual visual wireless workflow""".split()

FIRST = """Ada Alan Alice Amir Ana Boris Carla Chen Daniel Diego Elena Emil Farah Felix Grace Hana Hugo
Ines Ivan Jamal Julia Karim Lara Leon Lucia Marco Maria Mehdi Nadia Nora Omar Paula Pedro Rosa Sami
Sara Tariq Tomas Vera Yuki Zeinab""".split()

LAST = """Abbasi Almeida Bauer Becker Castro Costa Duarte Ek Fischer Garcia Hansen Ito Jensen Kato
Kowalski Larsen Lopez Moreau Nakamura Novak Okafor Petrov Quinn Rahman Rossi Sato Schmidt Silva
Tanaka Torres Uribe Vargas Weber Xu Yilmaz Zhang""".split()

PLACES = """Aarhus Bologna Coimbra Delft Edinburgh Freiburg Ghent Helsinki Innsbruck Jena Kyoto Leiden
Lyon Madrid Nagoya Ottawa Porto Quebec Riga Seville Tartu Uppsala Valencia Warsaw Zurich""".split()

AFF_KINDS = ["University of {}", "{} Institute of Technology", "{} Research Centre", "Polytechnic of {}"]


@dataclass
class SynthParams:
    papers: int = 300
    authors: int = 180
    duplicate_rate: float = 0.3
    seed: int = 7


@dataclass
class Corpus:
    authors: list = field(default_factory=list)
    papers: list = field(default_factory=list)
    paper_authors: list = field(default_factory=list)
    truth: list = field(default_factory=list)
    training: list = field(default_factory=list)

    @property
    def record_count(self) -> int:
        return len(self.authors) + len(self.papers)


def _typo(rng: random.Random, word: str) -> str:
    if len(word) < 4:
        return word + word[-1]
    i = rng.randrange(1, len(word) - 1)
    op = rng.randrange(3)
    if op == 0:
        return word[:i] + word[i + 1] + word[i] + word[i + 2:]
    if op == 1:
        return word[:i] + word[i + 1:]
    return word[:i] + rng.choice("aeiourst") + word[i + 1:]


def _perturb_title(rng, title: str) -> str:
    words = title.split()
    i = rng.randrange(len(words))
    words[i] = _typo(rng, words[i])
    return " ".join(words)


def _perturb_name(rng, name: str) -> str:
    first, last = name.split(" ", 1)
    if rng.random() < 0.5:
        return f"{first} {_typo(rng, last)}"
    return f"{first[0]}. {last}"


def _cluster_pairs(clusters: Dict[int, list]) -> list:
    out = []
    for members in clusters.values():
        out.extend(combinations(sorted(members), 2))
    return out


def generate(params: SynthParams = SynthParams()) -> Corpus:
    rng = random.Random(params.seed)
    ids = iter(range(1, 10 ** 9))
    corpus = Corpus()

    author_pool = []
    author_cluster: Dict[int, list] = {}
    names = set()
    while len(author_pool) < params.authors:
        name = f"{rng.choice(FIRST)} {rng.choice(LAST)}"
        if name in names:
            continue
        names.add(name)
        aff = rng.choice(AFF_KINDS).format(rng.choice(PLACES))
        aid = next(ids)
        author_pool.append((aid, name, aff))
        author_cluster[aid] = [aid]
    corpus.authors.extend((aid, name, aff) for aid, name, aff in author_pool)

    titles = set()
    paper_cluster: Dict[int, list] = {}
    originals = []
    while len(originals) < params.papers:
        title = " ".join(w.capitalize() if i == 0 else w for i, w in enumerate(rng.sample(WORDS, rng.randint(5, 8))))
        if title in titles:
            continue
        titles.add(title)
        year = str(rng.randint(1995, 2015))
        cid = str(rng.randint(100, 140))
        keyword = ", ".join(rng.sample(WORDS, 2))
        authors = rng.sample(author_pool, rng.randint(1, 3))
        pid = next(ids)
        originals.append((pid, title, year, cid, keyword, authors))
        paper_cluster[pid] = [pid]

    def add_paper(pid, title, year, cid, keyword, authors):
        corpus.papers.append((pid, title, year, cid, None, keyword))
        for aid, name, aff in authors:
            corpus.paper_authors.append((next(ids), str(pid), str(aid), name, aff))

    for p in originals:
        add_paper(*p)

    for pid, title, year, cid, keyword, authors in originals:
        if rng.random() >= params.duplicate_rate:
            continue
        mode = rng.choices(["exact", "typo", "shifted"], weights=[3, 4, 3])[0]
        if mode == "exact":
            dup_authors = authors
            d_title, d_year = title, year
        else:
            d_title = _perturb_title(rng, title)
            d_year = year if mode == "typo" else str(int(year) + 1)
            dup_authors = []
            for aid, name, aff in authors:
                kind = rng.choices(["same", "name", "moved"], weights=[2, 5, 3])[0]
                if kind == "same":
                    dup_authors.append((aid, name, aff))
                    continue
                d_name = _perturb_name(rng, name)
                d_aff = aff if kind == "name" else rng.choice(AFF_KINDS).format(rng.choice(PLACES))
                d_aid = next(ids)
                corpus.authors.append((d_aid, d_name, d_aff))
                author_cluster[aid].append(d_aid)
                dup_authors.append((d_aid, d_name, d_aff))
        d_pid = next(ids)
        paper_cluster[pid].append(d_pid)
        add_paper(d_pid, d_title, d_year, cid, keyword, dup_authors)

    truth = [("Paper", a, b) for a, b in _cluster_pairs(paper_cluster)]
    truth += [("Author", a, b) for a, b in _cluster_pairs(author_cluster)]
    corpus.truth = sorted(truth)

    # labelled pairs: every true pair plus as many seeded non-duplicate pairs
    train = [(rel, a, b, 1) for rel, a, b in corpus.truth]
    for rel, recs, cluster in (("Paper", corpus.papers, paper_cluster), ("Author", corpus.authors, author_cluster)):
        owner = {m: c for c, ms in cluster.items() for m in ms}
        tids = sorted(r[0] for r in recs)
        want = sum(1 for t in corpus.truth if t[0] == rel)
        # half near misses that share a first field token, half random pairs
        by_token: Dict[str, list] = {}
        for r in recs:
            by_token.setdefault(r[1].split()[0], []).append(r[0])
        near = sorted((a, b) for ms in by_token.values() for a, b in combinations(sorted(ms), 2)
                      if owner[a] != owner[b])
        negs = set(rng.sample(near, min(len(near), want // 2)))
        while len(negs) < want:
            a, b = sorted(rng.sample(tids, 2))
            if owner[a] != owner[b]:
                negs.add((a, b))
        train += [(rel, a, b, 0) for a, b in sorted(negs)]
    corpus.training = sorted(train)
    return corpus


MDSB_RULES = """# single-relation blocking rules
md paper_title: Paper(p1, x1, y, z, _, _, bl1), Paper(p2, x2, y, z, _, _, bl2),
                sim(Title: x1, x2) -> ident(bl1, bl2)
md author_name_aff: Author(a1, x1, y1, bl1), Author(a2, x2, y2, bl2),
                    sim(Name: x1, x2), sim(Affiliation: y1, y2) -> ident(bl1, bl2)
"""

MDCB_EXTRA = """
# collective rules: blocks propagate across authorship
md paper_by_authors: Paper(p1, x1, _, _, _, _, bl1), Paper(p2, x2, _, _, _, _, bl2),
                     PaperAuthor(_, p1, a1, n1, f1), PaperAuthor(_, p2, a2, n2, f2),
                     Author(a1, n1, f1, bl3), Author(a2, n2, f2, bl3),
                     sim(Title: x1, x2) -> ident(bl1, bl2)
md author_by_papers: Author(a1, x1, y1, bl1), Author(a2, x2, y2, bl2), sim(Name: x1, x2),
                     PaperAuthor(_, p1, a1, x1, y1), PaperAuthor(_, p2, a2, x2, y2),
                     Paper(p1, _, _, _, _, _, bl3), Paper(p2, _, _, _, _, _, bl3) -> ident(bl1, bl2)
"""

CONFIG_TEMPLATE = """[data]
Author = author.csv
Paper = paper.csv
PaperAuthor = paperauthor.csv
training = training.csv
normalize = false

[schemas]
Author = AID:reference-id, Name, Affiliation?, Bl:block-number
Paper = PID:reference-id, Title:long-text, Year:numeric-string?, CID:numeric-string?, JID:numeric-string?, Keyword:long-text?, Bl:block-number
PaperAuthor = PAID:reference-id, PID:numeric-string, AID:numeric-string, Name, Affiliation?

[similarity]
Title = tfidf-cosine 0.6
Name = jaro-winkler 0.8
Affiliation = tfidf-cosine 0.6

[features]
Paper = Title:tfidf-cosine, Year:levenshtein, CID:equality, Keyword:tfidf-cosine
Author = Name:jaro-winkler, Affiliation:tfidf-cosine

[blocking]
mode = MDCB
keys.Paper = Title, Year, CID
keys.Author = Name, Affiliation
mdsb_rules = mdsb.md
mdcb_rules = mdcb.md

[training]
seed = {seed}

[svm]
C = 1.0
max_epochs = 2000
tol = 1e-4
seed = {seed}

[merge]
relations = Paper, Author

[evaluation]
truth = truth.csv

[output]
dir = out
"""


def write_corpus(corpus: Corpus, directory, seed: int = 7):
    os.makedirs(directory, exist_ok=True)
    schemas = {s.name: s for s in MAS_SCHEMAS}

    def dump(name, header, rows):
        with open(os.path.join(directory, name), "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for r in rows:
                w.writerow(["" if c is None else c for c in r])

    # block columns are left out so ingestion seeds them with the rid
    dump("author.csv", schemas["Author"].names[:-1], sorted(corpus.authors))
    dump("paper.csv", schemas["Paper"].names[:-1], sorted(corpus.papers))
    dump("paperauthor.csv", schemas["PaperAuthor"].names, sorted(corpus.paper_authors))
    dump("truth.csv", ["relation", "tid1", "tid2"], corpus.truth)
    dump("training.csv", ["relation", "tid1", "tid2", "label"], corpus.training)
    with open(os.path.join(directory, "mdsb.md"), "w", encoding="utf-8") as fh:
        fh.write(MDSB_RULES)
    with open(os.path.join(directory, "mdcb.md"), "w", encoding="utf-8") as fh:
        fh.write(MDSB_RULES + MDCB_EXTRA)
    with open(os.path.join(directory, "config.ini"), "w", encoding="utf-8") as fh:
        fh.write(CONFIG_TEMPLATE.format(seed=seed))
