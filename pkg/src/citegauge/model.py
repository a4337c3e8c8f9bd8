"""Percentile-regression forecaster.

Pipeline: rank-based percentile transform of future-year counts, clipping
of early-citation counts to T factor levels, dummy-coded design matrix
(venue + early-level factors), QR least-squares fit, sequential ANOVA
variance attribution, and boxplot aggregation of predictions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.linalg import solve_triangular
from scipy.stats import rankdata

from .corpus import Cohort, PaperRecord
from .errors import (
    DimensionMismatch,
    EmptyCohort,
    RankDeficient,
    TooFewRows,
)
from .metrics import DEFAULT_EARLY_OFFSET, DEFAULT_FUTURE_OFFSET

MISC_VENUE = "misc"
DEFAULT_MIN_VENUE_SIZE = 40
DEFAULT_T = 10


@dataclass(frozen=True)
class PercentileFrame:
    """Per-paper percentile (Hazen, tie-averaged) of future-year counts."""

    pub_year: int
    future_year: int
    paper_ids: tuple[str, ...]
    percentiles: tuple[float, ...]


@dataclass(frozen=True)
class DesignMatrix:
    """Dummy-coded design: intercept + venue levels + early levels up to T.

    Reference levels carry no column: one venue (default the most populous)
    and early level 0.  Early levels with no member rows also get no column
    (same treatment as a venue with no papers that year).
    """

    X: np.ndarray
    column_names: tuple[str, ...]
    venue_levels: tuple[str, ...]       # levels with a column (reference excluded)
    reference_venue: str
    T: int
    early_levels: tuple[int, ...]       # populated levels 1..T with a column
    row_venues: tuple[str, ...]         # resolved venue level per row
    row_early: tuple[int, ...]          # clipped early level per row
    paper_ids: tuple[str, ...]

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]


@dataclass(frozen=True)
class FittedModel:
    """Least-squares coefficients plus fit diagnostics."""

    pub_year: int
    T: int
    reference_venue: str
    intercept: float
    venue_coefs: Mapping[str, float]
    early_coefs: Mapping[int, float]    # levels 1..T
    rss: float
    r_squared: float

    def predict(self, venue: str, early_count: int) -> float:
        """intercept + venue coefficient + clipped-early-level coefficient.

        Unknown venues resolve to misc when the model has a misc level,
        otherwise to the reference (contribution 0).
        """
        value = self.intercept
        if venue != self.reference_venue:
            if venue in self.venue_coefs:
                value += self.venue_coefs[venue]
            elif MISC_VENUE in self.venue_coefs:
                value += self.venue_coefs[MISC_VENUE]
        level = clip_early(early_count, self.T)
        if level > 0:
            if level in self.early_coefs:
                value += self.early_coefs[level]
            else:
                # level unseen at fit time: nearest populated level below
                lower = [k for k in self.early_coefs if k < level]
                if lower:
                    value += self.early_coefs[max(lower)]
        return value

    def to_dict(self) -> dict:
        return {
            "pub_year": self.pub_year,
            "T": self.T,
            "reference_venue": self.reference_venue,
            "intercept": self.intercept,
            "venue_coefs": dict(self.venue_coefs),
            "early_coefs": {str(k): v for k, v in self.early_coefs.items()},
            "rss": self.rss,
            "r_squared": self.r_squared,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FittedModel":
        return cls(
            pub_year=d["pub_year"],
            T=d["T"],
            reference_venue=d["reference_venue"],
            intercept=d["intercept"],
            venue_coefs=dict(d["venue_coefs"]),
            early_coefs={int(k): v for k, v in d["early_coefs"].items()},
            rss=d["rss"],
            r_squared=d["r_squared"],
        )


@dataclass(frozen=True)
class AnovaRow:
    factor: str
    ss: float
    eta_squared: float


@dataclass(frozen=True)
class AnovaTable:
    """Sequential (Type I) sums of squares for both factor orderings."""

    ss_total: float
    venue_first: tuple[AnovaRow, ...]   # venue, early, residual
    early_first: tuple[AnovaRow, ...]   # early, venue, residual


@dataclass(frozen=True)
class BoxplotRow:
    label: str
    minimum: float
    q1: float
    median: float
    q3: float
    maximum: float
    n: int


def percentile_transform(cohort: Cohort,
                         future_year: int | None = None) -> PercentileFrame:
    """Hazen percentiles 100*(r - 0.5)/N of counts at future_year, average
    rank over ties."""
    if len(cohort) == 0:
        raise EmptyCohort("cannot compute percentiles of an empty cohort")
    if future_year is None:
        future_year = cohort.pub_year + DEFAULT_FUTURE_OFFSET
    counts = np.array([p.citations_in(future_year) for p in cohort], dtype=float)
    ranks = rankdata(counts, method="average")
    percentiles = 100.0 * (ranks - 0.5) / len(counts)
    return PercentileFrame(
        pub_year=cohort.pub_year,
        future_year=future_year,
        paper_ids=tuple(p.id for p in cohort),
        percentiles=tuple(float(v) for v in percentiles),
    )


def clip_early(count: int, T: int) -> int:
    """min(count, T); caps the early-citation factor at T levels."""
    if T < 1:
        raise ValueError("T must be >= 1")
    if count < 0:
        raise ValueError("count must be non-negative")
    return min(count, T)


def build_design_matrix(cohort: Cohort, T: int = DEFAULT_T,
                        early_offset: int = DEFAULT_EARLY_OFFSET,
                        min_venue_size: int = DEFAULT_MIN_VENUE_SIZE,
                        reference_venue: str | None = None) -> DesignMatrix:
    """Dummy-code the cohort.

    Venues with >= min_venue_size members keep their name; the rest fold
    into the misc level.  The reference venue (default: most populous
    level) and early level 0 get no column.
    """
    if len(cohort) == 0:
        raise EmptyCohort("cannot build a design matrix for an empty cohort")
    early_year = cohort.pub_year + early_offset

    venue_sizes: dict[str, int] = {}
    for p in cohort:
        venue_sizes[p.venue] = venue_sizes.get(p.venue, 0) + 1
    keep = {v for v, n in venue_sizes.items() if n >= min_venue_size}

    row_venues = tuple(
        p.venue if p.venue in keep else MISC_VENUE for p in cohort
    )
    level_sizes: dict[str, int] = {}
    for v in row_venues:
        level_sizes[v] = level_sizes.get(v, 0) + 1

    if reference_venue is None:
        # most populous level; name breaks ties deterministically
        reference_venue = min(level_sizes, key=lambda v: (-level_sizes[v], v))
    elif reference_venue not in level_sizes:
        raise ValueError(f"reference venue {reference_venue!r} not a level "
                         f"of this cohort (levels: {sorted(level_sizes)})")

    venue_levels = tuple(sorted(v for v in level_sizes if v != reference_venue))
    row_early = tuple(clip_early(p.citations_in(early_year), T) for p in cohort)
    early_levels = tuple(sorted({lvl for lvl in row_early if lvl > 0}))

    columns = ["intercept"]
    columns += [f"venue:{v}" for v in venue_levels]
    columns += [f"early:{k}" for k in early_levels]
    n, k = len(cohort), len(columns)
    if n < k:
        raise TooFewRows(f"{n} rows < {k} columns")

    X = np.zeros((n, k))
    X[:, 0] = 1.0
    venue_col = {v: 1 + i for i, v in enumerate(venue_levels)}
    early_col = {lvl: 1 + len(venue_levels) + i
                 for i, lvl in enumerate(early_levels)}
    for i in range(n):
        if row_venues[i] != reference_venue:
            X[i, venue_col[row_venues[i]]] = 1.0
        if row_early[i] > 0:
            X[i, early_col[row_early[i]]] = 1.0

    return DesignMatrix(
        X=X,
        column_names=tuple(columns),
        venue_levels=venue_levels,
        reference_venue=reference_venue,
        T=T,
        early_levels=early_levels,
        row_venues=row_venues,
        row_early=row_early,
        paper_ids=tuple(p.id for p in cohort),
    )


_RANK_TOL = 1e-10


def _qr_solve(X: np.ndarray, y: np.ndarray, column_names: Sequence[str]) -> np.ndarray:
    """Least squares via Householder QR; raises RankDeficient with the
    offending columns."""
    q, r = np.linalg.qr(X)
    diag = np.abs(np.diag(r))
    scale = diag.max() if diag.size else 0.0
    bad = [column_names[j] for j in range(len(diag)) if diag[j] <= _RANK_TOL * scale]
    if bad or scale == 0.0:
        raise RankDeficient(bad or list(column_names))
    return solve_triangular(r, q.T @ y, lower=False)


def fit_ols(design: DesignMatrix, frame: PercentileFrame) -> FittedModel:
    """Fit percentiles on the design matrix by QR least squares."""
    y = np.asarray(frame.percentiles, dtype=float)
    if y.shape[0] != design.n_rows:
        raise DimensionMismatch(
            f"{design.n_rows} design rows vs {y.shape[0]} percentiles")
    beta = _qr_solve(design.X, y, design.column_names)

    fitted = design.X @ beta
    residuals = y - fitted
    rss = float(residuals @ residuals)
    tss = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 - rss / tss if tss > 0 else 1.0

    n_venue = len(design.venue_levels)
    venue_coefs = {v: float(beta[1 + i]) for i, v in enumerate(design.venue_levels)}
    early_coefs = {lvl: float(beta[1 + n_venue + i])
                   for i, lvl in enumerate(design.early_levels)}
    return FittedModel(
        pub_year=frame.pub_year,
        T=design.T,
        reference_venue=design.reference_venue,
        intercept=float(beta[0]),
        venue_coefs=venue_coefs,
        early_coefs=early_coefs,
        rss=rss,
        r_squared=r_squared,
    )


def _rss_of(X: np.ndarray, y: np.ndarray) -> float:
    beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ beta
    return float(resid @ resid)


def anova_decompose(design: DesignMatrix, frame: PercentileFrame) -> AnovaTable:
    """Sequential (Type I) sums of squares for venue-first and early-first
    orderings, with eta^2 = SS / SS_total per factor."""
    y = np.asarray(frame.percentiles, dtype=float)
    if y.shape[0] != design.n_rows:
        raise DimensionMismatch(
            f"{design.n_rows} design rows vs {y.shape[0]} percentiles")
    n_venue = len(design.venue_levels)
    intercept = design.X[:, :1]
    venue_block = design.X[:, 1:1 + n_venue]
    early_block = design.X[:, 1 + n_venue:]

    ss_total = float(np.sum((y - y.mean()) ** 2))
    rss_null = _rss_of(intercept, y)
    rss_full = _rss_of(design.X, y)

    def ordering(first_block, first_name, second_name):
        rss_first = _rss_of(np.hstack([intercept, first_block]), y)
        ss_first = rss_null - rss_first
        ss_second = rss_first - rss_full
        rows = (
            AnovaRow(first_name, ss_first, ss_first / ss_total if ss_total else 0.0),
            AnovaRow(second_name, ss_second, ss_second / ss_total if ss_total else 0.0),
            AnovaRow("residual", rss_full, rss_full / ss_total if ss_total else 0.0),
        )
        return rows

    venue_first = ordering(venue_block, "venue", "early")
    early_first = ordering(early_block, "early", "venue")
    return AnovaTable(ss_total=ss_total, venue_first=venue_first,
                      early_first=early_first)


def predict_cohort(model: FittedModel, design: DesignMatrix) -> np.ndarray:
    """Model predictions for every design row."""
    return np.array([
        model.predict(
            design.row_venues[i] if design.row_venues[i] != design.reference_venue
            else model.reference_venue,
            design.row_early[i],
        )
        for i in range(design.n_rows)
    ])


def boxplot_aggregate(values: Sequence[float], groups: Sequence,
                      sort_by_median: bool = False) -> list[BoxplotRow]:
    """Five-number summary (linear-interpolation quartiles) per group.

    With sort_by_median the rows come out median-descending (venue plots);
    otherwise rows are in sorted group-key order (early-level plots).
    """
    if len(values) == 0:
        raise ValueError("no values to aggregate")
    if len(values) != len(groups):
        raise DimensionMismatch("values and groups differ in length")
    buckets: dict = {}
    for v, g in zip(values, groups):
        buckets.setdefault(g, []).append(float(v))
    rows = []
    for key in sorted(buckets, key=str):
        data = np.array(buckets[key])
        q1, med, q3 = np.percentile(data, [25, 50, 75])
        rows.append(BoxplotRow(
            label=str(key),
            minimum=float(data.min()),
            q1=float(q1),
            median=float(med),
            q3=float(q3),
            maximum=float(data.max()),
            n=len(data),
        ))
    if sort_by_median:
        rows.sort(key=lambda r: (-r.median, r.label))
    return rows


def save_model(model: FittedModel, path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(model.to_dict(), handle, indent=2, sort_keys=True)
        handle.write("\n")


def load_model(path) -> FittedModel:
    with open(path, encoding="utf-8") as handle:
        return FittedModel.from_dict(json.load(handle))
