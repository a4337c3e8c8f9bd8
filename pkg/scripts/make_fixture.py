#!/usr/bin/env python3
"""Generate the committed synthetic corpus fixture and its expected tables.

The expected values are computed here with standalone textbook formulas
(no package imports), then frozen into tests/data/fixture_expected.json.
The acceptance suite compares package output against these frozen numbers,
so the fixture doubles as an independent oracle for the reference-table
pipeline.  Deterministic: fixed seed, sorted output.
"""

import json
import math
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "tests" / "data"

PUB_YEAR = 2016
YEARS = list(range(2016, 2024))
EARLY_YEAR = PUB_YEAR + 1
FUTURE_YEAR = PUB_YEAR + 4

VENUES = [
    # (venue, source, n_papers, quality_mean)
    ("TopJournal", "PubMed", 60, 2.2),
    ("MedArchive", "PubMed", 90, 1.2),
    ("NLPConf", "ACL", 50, 1.8),
    ("NLPWorkshop", "ACL", 70, 0.8),
    ("Preprints", "ArXiv", 80, 1.5),
]


def generate_corpus(rng):
    papers = []
    serial = 0
    for venue, source, n, quality_mean in VENUES:
        for _ in range(n):
            # heavy-tailed paper quality gives the strong year-to-year
            # correlations and sigma >> mu typical of citation counts
            quality = rng.lognormvariate(math.log(quality_mean), 1.1)
            counts = {}
            for year in YEARS:
                age = year - PUB_YEAR
                # ramp up over ~3 years, then plateau; Poisson year counts
                # around a per-paper level so years correlate strongly
                level = quality * min(age + 0.3, 3.0)
                lam = max(level, 0.0)
                counts[year] = poisson(rng, lam)
            papers.append({
                "id": f"s{serial:05d}",
                "source": source,
                "venue": venue,
                "year": PUB_YEAR,
                "counts": {str(y): c for y, c in counts.items() if c > 0},
            })
            serial += 1
    papers.sort(key=lambda p: p["id"])
    return papers


def poisson(rng, lam):
    if lam <= 0:
        return 0
    # Knuth's method; lam stays small here
    limit = math.exp(-lam)
    k, p = 0, 1.0
    while True:
        p *= rng.random()
        if p <= limit:
            return k
        k += 1


# --- oracle statistics (textbook formulas, plain Python) ---

def count_at(paper, year):
    return paper["counts"].get(str(year), 0)


def pearson(x, y):
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    if sxx == 0 or syy == 0:
        return None
    return sxy / math.sqrt(sxx * syy)


def h_index(counts):
    best = 0
    for h in range(len(counts) + 1):
        if sum(1 for c in counts if c >= h) >= h:
            best = h
    return best


def median(values):
    s = sorted(values)
    n = len(s)
    mid = n // 2
    return float(s[mid]) if n % 2 else (s[mid - 1] + s[mid]) / 2.0


def summarize(group):
    counts = [count_at(p, FUTURE_YEAR) for p in group]
    n = len(counts)
    mu = sum(counts) / n
    sigma = math.sqrt(sum((c - mu) ** 2 for c in counts) / n)
    return {"h": h_index(counts), "median": median(counts), "mu": mu,
            "sigma": sigma, "N": n}


def expected_tables(papers):
    by_source = {}
    for p in papers:
        by_source.setdefault(p["source"], []).append(p)

    correlations = {}
    for source, group in sorted(by_source.items()):
        x = [count_at(p, 2016) for p in group]
        y = [count_at(p, 2017) for p in group]
        correlations[source] = pearson(x, y)
    correlations["all"] = pearson(
        [count_at(p, 2016) for p in papers],
        [count_at(p, 2017) for p in papers])

    thresholds = [1, 2, 3, 10, 20]
    threshold_rows = {}
    zero = [p for p in papers if count_at(p, EARLY_YEAR) == 0]
    if zero:
        threshold_rows["0 citations"] = summarize(zero)
    for t in thresholds:
        members = [p for p in papers if count_at(p, EARLY_YEAR) >= t]
        if members:
            threshold_rows[f"{t}+ citations"] = summarize(members)

    venue_rows = {}
    by_venue = {}
    for p in papers:
        by_venue.setdefault(p["venue"], []).append(p)
    for venue, group in sorted(by_venue.items()):
        venue_rows[venue] = summarize(group)

    return {
        "pub_year": PUB_YEAR,
        "early_year": EARLY_YEAR,
        "future_year": FUTURE_YEAR,
        "corr_2016_2017": correlations,
        "threshold_groups": threshold_rows,
        "venue_groups": venue_rows,
    }


def main():
    rng = random.Random(20160701)
    papers = generate_corpus(rng)
    corpus_path = DATA / "fixture_corpus.jsonl"
    with open(corpus_path, "w", encoding="utf-8") as handle:
        for p in papers:
            handle.write(json.dumps(p, separators=(",", ":"),
                                    sort_keys=True) + "\n")
    expected = expected_tables(papers)
    with open(DATA / "fixture_expected.json", "w", encoding="utf-8") as handle:
        json.dump(expected, handle, indent=2, sort_keys=True)
        handle.write("\n")
    print(f"wrote {len(papers)} papers -> {corpus_path}")
    print(json.dumps(expected["corr_2016_2017"], indent=2))


if __name__ == "__main__":
    main()
