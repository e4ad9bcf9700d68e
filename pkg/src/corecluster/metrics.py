"""Cluster validity indices, partition agreement, and enrichment testing.

Internal indices (Dunn, silhouette, FOM, modularity) skip nodes carrying the
unclustered label 0. The adjusted Rand index can either drop label-0 nodes
(default) or treat label 0 as a class of its own.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Partition
from .expression import ExpressionMatrix
from .graph import SimilarityMatrix

__all__ = [
    "DissimilarityMatrix",
    "AnnotationSet",
    "EnrichmentRow",
    "dissimilarity_from_similarity",
    "dunn",
    "silhouette",
    "fom",
    "modularity",
    "adjusted_rand",
    "hypergeom_tail",
    "hypergeom_enrich",
]


@dataclass(frozen=True)
class DissimilarityMatrix:
    """Symmetric non-negative p x p dissimilarities with zero diagonal."""

    entries: np.ndarray

    def __post_init__(self) -> None:
        a = np.array(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"dissimilarity matrix must be square, got {a.shape}")
        if not np.array_equal(a, a.T):
            raise ValueError("dissimilarity matrix must be symmetric")
        if np.any(np.diagonal(a) != 0):
            raise ValueError("dissimilarity matrix must have zero diagonal")
        if np.any(a < 0) or not np.all(np.isfinite(a)):
            raise ValueError("dissimilarities must be finite and non-negative")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def p(self) -> int:
        return self.entries.shape[0]


def dissimilarity_from_similarity(w: SimilarityMatrix) -> DissimilarityMatrix:
    """d(i, j) = 1 - w_ij off the diagonal, 0 on it."""
    d = 1.0 - w.entries
    np.fill_diagonal(d, 0.0)
    return DissimilarityMatrix(d)


def _clustered_groups(partition: Partition) -> list[np.ndarray]:
    return [partition.members(k) for k in range(1, partition.k + 1)]


def dunn(d: DissimilarityMatrix, partition: Partition) -> float:
    """Minimum single-linkage inter-cluster gap over maximum cluster diameter.

    Unclustered (label 0) nodes are excluded. Requires at least two clusters;
    raises if every cluster has zero diameter (the ratio is undefined).
    """
    if partition.p != d.p:
        raise ValueError("partition and dissimilarity matrix sizes differ")
    groups = _clustered_groups(partition)
    if len(groups) < 2:
        raise ValueError("Dunn index needs at least 2 clusters")
    a = d.entries
    max_diam = 0.0
    for g in groups:
        if g.size > 1:
            max_diam = max(max_diam, float(a[np.ix_(g, g)].max()))
    if max_diam == 0.0:
        raise ZeroDivisionError(
            "all intra-cluster diameters are zero; Dunn index undefined"
        )
    min_gap = math.inf
    for x in range(len(groups)):
        for y in range(x + 1, len(groups)):
            min_gap = min(min_gap, float(a[np.ix_(groups[x], groups[y])].min()))
    return min_gap / max_diam


def silhouette(d: DissimilarityMatrix, partition: Partition) -> tuple[np.ndarray, float]:
    """Per-node silhouette values and their mean over clustered nodes.

    Singleton clusters get value 0 by convention; unclustered nodes get NaN
    and do not enter the mean.
    """
    if partition.p != d.p:
        raise ValueError("partition and dissimilarity matrix sizes differ")
    groups = _clustered_groups(partition)
    if len(groups) < 2:
        raise ValueError("silhouette needs at least 2 clusters")
    a = d.entries
    values = np.full(partition.p, np.nan)
    for gi, g in enumerate(groups):
        for i in g:
            if g.size == 1:
                values[i] = 0.0
                continue
            ai = float(a[i, g].sum()) / (g.size - 1)
            bi = math.inf
            for gj, h in enumerate(groups):
                if gj == gi:
                    continue
                bi = min(bi, float(a[i, h].mean()))
            m = max(ai, bi)
            values[i] = 0.0 if m == 0.0 else (bi - ai) / m
    clustered = ~np.isnan(values)
    values.setflags(write=False)
    return values, float(values[clustered].mean())


def fom(x: ExpressionMatrix, partition: Partition) -> float:
    """Figure of merit: per-sample RMS deviation from within-cluster means,
    summed over samples. Lower is better; 0 means cluster means predict
    every value exactly.
    """
    if x.mask.any():
        raise ValueError("expression matrix has missing values; impute first")
    if partition.p != x.p:
        raise ValueError("partition and expression matrix sizes differ")
    clustered = np.nonzero(partition.labels > 0)[0]
    if clustered.size == 0:
        raise ValueError("no clustered variables")
    vals = x.values
    total = 0.0
    sq = np.zeros(x.n)
    for k in range(1, partition.k + 1):
        g = partition.members(k)
        block = vals[:, g]
        mu = block.mean(axis=1, keepdims=True)
        sq += ((block - mu) ** 2).sum(axis=1)
    total = float(np.sqrt(sq / clustered.size).sum())
    return total


def modularity(w: SimilarityMatrix, partition: Partition) -> float:
    """Weighted modularity: intra-cluster weight fraction minus the expected
    fraction under the degree-matched null, summed over clusters.

    Computed on the subgraph induced by clustered (label > 0) nodes.
    """
    if partition.p != w.p:
        raise ValueError("partition and similarity matrix sizes differ")
    clustered = np.nonzero(partition.labels > 0)[0]
    sub = w.entries[np.ix_(clustered, clustered)]
    labels = partition.labels[clustered]
    m = float(sub.sum()) / 2.0
    if m <= 0.0:
        raise ValueError("graph has no edge weight; modularity undefined")
    degrees = sub.sum(axis=1)
    q = 0.0
    for k in range(1, partition.k + 1):
        idx = np.nonzero(labels == k)[0]
        l_k = float(sub[np.ix_(idx, idx)].sum()) / 2.0
        d_k = float(degrees[idx].sum())
        q += l_k / m - (d_k / (2.0 * m)) ** 2
    return q


def _pair_count(counts: np.ndarray) -> int:
    return int(sum(int(c) * (int(c) - 1) // 2 for c in counts))


def adjusted_rand(p1: Partition, p2: Partition, unclustered: str = "drop") -> float:
    """Chance-corrected agreement between two partitions of the same nodes.

    ``unclustered="drop"`` removes nodes labeled 0 in either partition before
    comparing (the default); ``unclustered="class"`` keeps label 0 as a class
    of its own. Identical partitions score 1; worse-than-chance agreement can
    be negative.
    """
    if p1.p != p2.p:
        raise ValueError("partitions cover different node sets")
    if unclustered not in ("drop", "class"):
        raise ValueError(f"unknown unclustered mode {unclustered!r}")
    a = np.asarray(p1.labels)
    b = np.asarray(p2.labels)
    if unclustered == "drop":
        keep = (a > 0) & (b > 0)
        a = a[keep]
        b = b[keep]
        if a.size == 0:
            raise ValueError("no nodes left after dropping unclustered labels")
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    n_a = ai.max() + 1
    n_b = bi.max() + 1
    table = np.zeros((n_a, n_b), dtype=np.int64)
    np.add.at(table, (ai, bi), 1)
    sum_ij = _pair_count(table.ravel())
    sum_a = _pair_count(table.sum(axis=1))
    sum_b = _pair_count(table.sum(axis=0))
    n_pairs = int(a.size) * (int(a.size) - 1) // 2
    if n_pairs == 0:
        return 1.0
    expected = sum_a * sum_b / n_pairs
    maximum = (sum_a + sum_b) / 2.0
    if maximum == expected:
        return 1.0
    return (sum_ij - expected) / (maximum - expected)


def _log_comb(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def hypergeom_tail(overlap: int, universe: int, term: int, cluster: int) -> float:
    """P[X >= overlap] for X hypergeometric(universe, term, cluster).

    Accumulated in log space so large counts cannot overflow.
    """
    if universe <= 0:
        raise ValueError("universe must be non-empty")
    if not (0 <= term <= universe and 0 <= cluster <= universe):
        raise ValueError("term and cluster sizes must lie within the universe")
    lo = max(0, term + cluster - universe)
    hi = min(term, cluster)
    if overlap <= lo:
        return 1.0
    if overlap > hi:
        return 0.0
    denom = _log_comb(universe, cluster)
    logs = [
        _log_comb(term, k) + _log_comb(universe - term, cluster - k) - denom
        for k in range(overlap, hi + 1)
    ]
    peak = max(logs)
    return float(min(1.0, math.exp(peak) * math.fsum(math.exp(v - peak) for v in logs)))


@dataclass(frozen=True)
class AnnotationSet:
    """Universe of variable ids plus term -> annotated-id sets."""

    universe: frozenset[str]
    terms: dict[str, frozenset[str]]
    names: dict[str, str] | None = None

    def __post_init__(self) -> None:
        for term, ids in self.terms.items():
            extra = ids - self.universe
            if extra:
                raise ValueError(
                    f"term {term} annotates ids outside the universe: {sorted(extra)[:5]}"
                )


@dataclass(frozen=True)
class EnrichmentRow:
    cluster_id: int
    term_id: str
    overlap: int
    cluster_size: int
    term_size: int
    universe_size: int
    p_raw: float
    p_adjusted: float
    significant: bool


def hypergeom_enrich(
    partition: Partition,
    node_ids: list[str],
    annotations: AnnotationSet,
    alpha: float = 0.05,
) -> list[EnrichmentRow]:
    """Over-representation test of every (cluster, term) pair.

    Raw tail probabilities are Bonferroni-adjusted over all tests performed
    (terms with at least one annotated id). Rows are ordered per cluster by
    ascending raw p-value, so the most enriched terms come first; rows with
    adjusted p <= alpha are flagged significant.
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    if len(node_ids) != partition.p:
        raise ValueError("node_ids length must match the partition")
    missing = [i for i in node_ids if i not in annotations.universe]
    if missing:
        raise ValueError(
            f"{len(missing)} partition ids missing from the annotation universe "
            f"(first few: {missing[:5]})"
        )
    universe_size = len(annotations.universe)
    tested_terms = sorted(t for t, ids in annotations.terms.items() if ids)
    if not tested_terms:
        raise ValueError("no annotated terms to test")
    clusters = {
        k: frozenset(node_ids[i] for i in partition.members(k))
        for k in range(1, partition.k + 1)
    }
    n_tests = len(tested_terms) * len(clusters)
    rows: list[EnrichmentRow] = []
    for k in sorted(clusters):
        members = clusters[k]
        cluster_rows = []
        for term in tested_terms:
            ids = annotations.terms[term]
            overlap = len(members & ids)
            p_raw = hypergeom_tail(overlap, universe_size, len(ids), len(members))
            p_adj = min(1.0, p_raw * n_tests)
            cluster_rows.append(
                EnrichmentRow(
                    cluster_id=k,
                    term_id=term,
                    overlap=overlap,
                    cluster_size=len(members),
                    term_size=len(ids),
                    universe_size=universe_size,
                    p_raw=p_raw,
                    p_adjusted=p_adj,
                    significant=p_adj <= alpha,
                )
            )
        cluster_rows.sort(key=lambda r: (r.p_raw, r.term_id))
        rows.extend(cluster_rows)
    return rows
