import random
from pathlib import Path

import pytest

from citegauge.corpus import Cohort, PaperRecord, Source, filter_cohort

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture
def table1_path():
    return DATA_DIR / "table1.csv"


@pytest.fixture
def fixture_corpus_path():
    return DATA_DIR / "fixture_corpus.jsonl"


@pytest.fixture
def fixture_expected_path():
    return DATA_DIR / "fixture_expected.json"


def make_record(paper_id, pub_year=2016, counts=None, venue="V",
                source=Source.ACL):
    return PaperRecord(id=str(paper_id), source=source, venue=venue,
                       pub_year=pub_year, counts=dict(counts or {}))


def make_cohort(count_rows, pub_year=2016, venues=None):
    """Build a cohort from a list of {year: count} maps (one per paper)."""
    papers = []
    for i, counts in enumerate(count_rows):
        venue = venues[i] if venues else "V"
        papers.append(make_record(f"p{i:04d}", pub_year, counts, venue))
    return filter_cohort(papers, pub_year)


def random_cohort(rng: random.Random, size, pub_year=2016, years=None,
                  venues=("A", "B", "C"), max_count=100):
    years = years or range(pub_year, pub_year + 5)
    rows = []
    chosen = []
    for _ in range(size):
        rows.append({y: rng.randint(0, max_count) for y in years})
        chosen.append(rng.choice(venues))
    return make_cohort(rows, pub_year, venues=chosen)
