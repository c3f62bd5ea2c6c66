"""Hamming-ranking retrieval metrics: AP/mAP, Precision@K, mAP-curve AUC.

Queries are ranked against a database by ascending Hamming distance with
ties broken by ascending database index, which makes every metric here
fully deterministic.  Relevance is shared class label.  Average
precision is the non-interpolated form

    AP = (1/R) * sum over relevant ranks k of  (relevant in top k) / k

with R the number of relevant items, clipped to the cutoff K when one is
given (so AP@K <= 1 always).  Queries with no relevant item in the
database are skipped and counted, not scored as zero.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .codec import BinaryCode, BinaryCodeSet, hamming_to_set
from .errors import DimensionError, UndefinedAPError

_QUERY_CHUNK = 64  # queries ranked per distance-matrix block


def rank(query: BinaryCode, database: BinaryCodeSet) -> np.ndarray:
    """Database indices by ascending Hamming distance, ties by index."""
    distances = hamming_to_set(query, database)
    return np.argsort(distances, kind="stable")


def average_precision(ranking: np.ndarray, relevance: np.ndarray,
                      cutoff: int = None) -> float:
    """Non-interpolated AP of one ranked list, optionally truncated at cutoff."""
    ranking = np.asarray(ranking)
    relevance = np.asarray(relevance, dtype=bool)
    if ranking.shape[0] != relevance.shape[0]:
        raise DimensionError(
            f"ranking has {ranking.shape[0]} entries, relevance has "
            f"{relevance.shape[0]}")
    total_relevant = int(relevance.sum())
    if cutoff is None:
        denom = total_relevant
        if denom == 0:
            raise UndefinedAPError("no relevant items and no cutoff given")
        ranked_rel = relevance[ranking]
    else:
        if cutoff < 1:
            raise ValueError(f"cutoff must be positive, got {cutoff}")
        denom = min(total_relevant, cutoff)
        if denom == 0:
            return 0.0
        ranked_rel = relevance[ranking[:cutoff]]
    hits = np.flatnonzero(ranked_rel)
    precisions = np.cumsum(ranked_rel)[hits] / (hits + 1.0)
    return float(precisions.sum() / denom)


def precision_at_k(ranking: np.ndarray, relevance: np.ndarray, k: int) -> float:
    """Fraction of relevant items among the top k of the ranking."""
    ranking = np.asarray(ranking)
    relevance = np.asarray(relevance, dtype=bool)
    if not 1 <= k <= ranking.shape[0]:
        raise ValueError(
            f"k must be in [1, {ranking.shape[0]}], got {k}")
    return float(relevance[ranking[:k]].mean())


@dataclass
class EvalReport:
    """Aggregated retrieval quality for a query set against a database."""

    map: float
    precision_at_k: float
    k_prec: int
    map_at_k: float = None
    k_map: int = None
    per_query_ap: np.ndarray = None
    n_queries: int = 0
    n_database: int = 0
    n_skipped: int = 0

    def to_record(self) -> dict:
        rec = {
            "map": self.map,
            "precision_at_k": self.precision_at_k,
            "k_prec": self.k_prec,
            "n_queries": self.n_queries,
            "n_database": self.n_database,
            "n_skipped": self.n_skipped,
        }
        if self.k_map is not None:
            rec["map_at_k"] = self.map_at_k
            rec["k_map"] = self.k_map
        return rec


def _score_chunk(queries, database, db_labels, lo, hi, k_prec, k_map,
                 ap_full, ap_cut, prec, scored):
    xor_counts = np.bitwise_count(
        database.words[None, :, :] ^ queries.words[lo:hi, None, :])
    distances = xor_counts.sum(axis=2, dtype=np.uint32)
    for row, qi in enumerate(range(lo, hi)):
        ranking = np.argsort(distances[row], kind="stable")
        relevance = db_labels == queries.labels[qi]
        if not relevance.any():
            continue
        scored[qi] = True
        ap_full[qi] = average_precision(ranking, relevance)
        if k_map is not None:
            ap_cut[qi] = average_precision(ranking, relevance, cutoff=k_map)
        prec[qi] = precision_at_k(ranking, relevance, k_prec)


def evaluate(queries: BinaryCodeSet, database: BinaryCodeSet, k_prec: int,
             k_map: int = None, n_threads: int = 1) -> EvalReport:
    """Score every query against the database; aggregate means.

    ``n_threads`` > 1 ranks query chunks on a thread pool; per-query
    results land in preallocated slots, so the report is identical
    whatever the execution order.
    """
    if queries.length != database.length:
        raise DimensionError(
            f"code lengths differ: queries {queries.length}, "
            f"database {database.length}")
    n_q, n_db = len(queries), len(database)
    if not 1 <= k_prec <= n_db:
        raise ValueError(f"k_prec must be in [1, {n_db}], got {k_prec}")
    db_labels = database.labels
    ap_full = np.zeros(n_q)
    ap_cut = np.zeros(n_q)
    prec = np.zeros(n_q)
    scored = np.zeros(n_q, dtype=bool)

    bounds = [(lo, min(lo + _QUERY_CHUNK, n_q))
              for lo in range(0, n_q, _QUERY_CHUNK)]
    args = (queries, database, db_labels)
    out = (ap_full, ap_cut, prec, scored)
    if n_threads > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            futures = [pool.submit(_score_chunk, *args, lo, hi, k_prec, k_map, *out)
                       for lo, hi in bounds]
            for fut in futures:
                fut.result()
    else:
        for lo, hi in bounds:
            _score_chunk(*args, lo, hi, k_prec, k_map, *out)

    n_scored = int(scored.sum())
    if n_scored == 0:
        raise UndefinedAPError("no query has any relevant database item")
    report = EvalReport(
        map=float(ap_full[scored].mean()),
        precision_at_k=float(prec[scored].mean()),
        k_prec=k_prec,
        per_query_ap=ap_full[scored],
        n_queries=n_q,
        n_database=n_db,
        n_skipped=n_q - n_scored,
    )
    if k_map is not None:
        report.map_at_k = float(ap_cut[scored].mean())
        report.k_map = k_map
    return report


@dataclass
class MapCurve:
    """mAP sampled at increasing training-instance counts, plus its AUC."""

    points: list
    auc: float = field(init=False)

    def __post_init__(self):
        self.auc = map_curve_auc(self.points)


def map_curve_auc(points) -> float:
    """Trapezoidal area under (instances_seen, mAP), normalized by x-range.

    Normalization keeps the value in [0, 1] and comparable across
    datasets; multiply by (x_max - x_min) to recover the raw area.
    """
    points = list(points)
    if len(points) < 2:
        raise ValueError(f"need at least 2 curve points, got {len(points)}")
    xs = np.asarray([p[0] for p in points], dtype=np.float64)
    ys = np.asarray([p[1] for p in points], dtype=np.float64)
    if not (np.diff(xs) > 0).all():
        raise ValueError("curve points must be strictly increasing in x")
    return float(np.trapezoid(ys, xs) / (xs[-1] - xs[0]))
