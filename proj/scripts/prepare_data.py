#!/usr/bin/env python3
"""Build the pinned lexicon and tagger snapshots under data/.

Every input is fetched from PyPI with `pip download`, so the snapshots can be
rebuilt on a machine that only has access to a package index:

  afinn==0.1                 AFINN-111.txt
  convokit==4.1.2            Bing Liu opinion lexicon (positive/negative lists)
  sentiment_classifier==0.6  SentiWordNet 3.0 scores keyed by WordNet synset name
  wn==0.0.23                 WordNet 3.0 database (synset offsets, terms, glosses)
  textblob-aptagger==0.2.0   pretrained averaged-perceptron POS tagger weights

SentiWordNet is written back out in its published TSV layout
(POS, ID, PosScore, NegScore, SynsetTerms, Gloss).
"""

import argparse
import pathlib
import pickle
import subprocess
import sys
import tarfile
import tempfile
import zipfile

PACKAGES = [
    "afinn==0.1",
    "convokit==4.1.2",
    "sentiment_classifier==0.6",
    "wn==0.0.23",
    "textblob-aptagger==0.2.0",
]


def fetch(work: pathlib.Path, cache: pathlib.Path | None) -> None:
    for requirement in PACKAGES:
        name, version = requirement.split("==")
        stem = name.replace("-", "_") + "-" + version
        cached = sorted(cache.glob(stem + "*")) if cache else []
        if cached:
            (work / cached[0].name).write_bytes(cached[0].read_bytes())
            continue
        subprocess.run(
            [sys.executable, "-m", "pip", "download", requirement, "--no-deps",
             "--no-binary", ":all:" if "aptagger" not in requirement else ":none:",
             "-d", str(work)],
            check=True, stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL)
    for archive in sorted(work.iterdir()):
        if archive.suffix == ".gz":
            with tarfile.open(archive) as tf:
                tf.extractall(work / "x")
        elif archive.suffix == ".whl":
            zipfile.ZipFile(archive).extractall(work / "x")


def find(root: pathlib.Path, name: str) -> pathlib.Path:
    hits = sorted(root.rglob(name))
    if not hits:
        raise SystemExit(f"missing {name} in downloaded packages")
    return hits[0]


def write_afinn(root, out):
    src = find(root, "AFINN-111.txt")
    (out / "lexicons" / "AFINN-111.txt").write_bytes(src.read_bytes())


def write_bingliu(root, out):
    for polarity in ("positive", "negative"):
        src = find(root, f"liu-{polarity}-words.txt")
        words = [w.strip() for w in src.read_text(encoding="latin-1").splitlines()]
        header = [
            ";;; Opinion Lexicon: " + polarity.capitalize(),
            ";;; Minqing Hu and Bing Liu, KDD-2004 / WWW-2005.",
            ";;; Snapshot taken from convokit 4.1.2 (convokit/data/liu-%s-words.txt)." % polarity,
            ";",
        ]
        body = [w for w in words if w and not w.startswith(";")]
        (out / "lexicons" / f"bingliu-{polarity}-words.txt").write_text(
            "\n".join(header + body) + "\n", encoding="utf-8")


def read_wordnet(wn_dir):
    """Yield (ss_type, offset, lemmas, gloss) per synset and the lemma sense index."""
    senses = {}
    for pos in ("adj", "adv", "noun", "verb"):
        for line in (wn_dir / f"index.{pos}").read_text(encoding="latin-1").splitlines():
            if line.startswith(" "):
                continue
            f = line.split()
            lemma, p = f[0], f[1]
            n_synsets, n_ptrs = int(f[2]), int(f[3])
            offsets = [int(x) for x in f[6 + n_ptrs:6 + n_ptrs + n_synsets]]
            senses[(lemma, p)] = offsets
    synsets = []
    for pos in ("adj", "adv", "noun", "verb"):
        for line in (wn_dir / f"data.{pos}").read_text(encoding="latin-1").splitlines():
            if line.startswith(" "):
                continue
            head, _, gloss = line.partition(" | ")
            f = head.split()
            offset, ss_type, w_cnt = int(f[0]), f[2], int(f[3], 16)
            lemmas = []
            for i in range(w_cnt):
                word = f[4 + 2 * i]
                if ss_type in ("a", "s") and word.endswith(")"):
                    word = word[:word.rindex("(")]
                lemmas.append(word)
            synsets.append((ss_type, offset, lemmas, gloss.strip()))
    return synsets, senses


def write_sentiwordnet(root, out):
    synsets, senses = read_wordnet(find(root, "wordnet-3.0"))
    with open(find(root, "SentiWn.p"), "rb") as fh:
        scores = pickle.load(fh, encoding="latin1")

    rows = []
    missing = 0
    for ss_type, offset, lemmas, gloss in synsets:
        index_pos = "a" if ss_type == "s" else ss_type
        first = lemmas[0].lower()
        rank = senses[(first, index_pos)].index(offset) + 1
        sc = scores.get(f"{first}.{ss_type}.{rank:02d}")
        if sc is None:
            missing += 1
            continue
        terms = []
        for lemma in lemmas:
            key = lemma.lower()
            terms.append(f"{key}#{senses[(key, index_pos)].index(offset) + 1}")
        rows.append((index_pos, offset, sc.get("pos", 0.0), sc.get("neg", 0.0),
                     " ".join(terms), gloss))
    if missing:
        print(f"warning: {missing} synsets without SentiWordNet scores", file=sys.stderr)
    order = {"a": 0, "n": 1, "r": 2, "v": 3}
    rows.sort(key=lambda r: (order[r[0]], r[1]))

    def fmt(x):
        s = repr(float(x))
        return s[:-2] if s.endswith(".0") else s

    with open(out / "lexicons" / "SentiWordNet_3.0.0.txt", "w", encoding="utf-8") as fh:
        fh.write("# SentiWordNet v3.0.0 scores, WordNet 3.0 synsets\n")
        fh.write("# Rebuilt from sentiment_classifier 0.6 (SentiWn.p) and wn 0.0.23 (WordNet 3.0)\n")
        fh.write("# POS\tID\tPosScore\tNegScore\tSynsetTerms\tGloss\n")
        for pos, off, p, n, terms, gloss in rows:
            fh.write(f"{pos}\t{off:08d}\t{fmt(p)}\t{fmt(n)}\t{terms}\t{gloss}\n")


def write_tagger(root, out):
    with open(find(root, "trontagger-0.1.0.pickle"), "rb") as fh:
        weights, tagdict, classes = pickle.load(fh, encoding="latin1")
    with open(out / "tagger" / "perceptron-en-0.1.txt", "w", encoding="utf-8") as fh:
        fh.write("averaged-perceptron\t1\n")
        fh.write("classes\t" + " ".join(sorted(classes)) + "\n")
        for word in sorted(tagdict):
            fh.write(f"T\t{word}\t{tagdict[word]}\n")
        for feat in sorted(weights):
            row = weights[feat]
            if not row:
                continue
            cells = " ".join(f"{c}:{row[c]:g}" for c in sorted(row))
            fh.write(f"W\t{feat}\t{cells}\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data"))
    ap.add_argument("--cache", help="directory holding already-downloaded package archives")
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    (out / "lexicons").mkdir(parents=True, exist_ok=True)
    (out / "tagger").mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        work = pathlib.Path(tmp)
        fetch(work, pathlib.Path(args.cache) if args.cache else None)
        root = work / "x"
        write_afinn(root, out)
        write_bingliu(root, out)
        write_sentiwordnet(root, out)
        write_tagger(root, out)


if __name__ == "__main__":
    main()
