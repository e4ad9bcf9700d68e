"""Comparison clusterers: spectral clustering on the random-walk Laplacian,
and a WGCNA-style pipeline (power adjacency, scale-free fit, topological
overlap, average-linkage clustering with a static cut).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .core import Partition
from .graph import SimilarityMatrix
from .ioutils import fmt_float, write_text_atomic

__all__ = [
    "SpectralEmbedding",
    "Dendrogram",
    "SoftThresholdFit",
    "WgcnaResult",
    "normalized_laplacian",
    "spectral_embed",
    "kmeans",
    "spectral_clustering",
    "select_k_by_dunn",
    "power_adjacency",
    "pick_soft_threshold",
    "tom_similarity",
    "hierarchical_average_linkage",
    "cut_dendrogram",
    "wgcna_lite",
    "write_dendrogram",
    "write_fit_report",
]


@dataclass(frozen=True)
class SpectralEmbedding:
    """Rows are node coordinates on the first K Laplacian eigenvectors."""

    points: np.ndarray
    eigenvalues: np.ndarray

    def __post_init__(self) -> None:
        pts = np.array(self.points, dtype=float)
        ev = np.array(self.eigenvalues, dtype=float)
        if pts.ndim != 2 or ev.ndim != 1 or pts.shape[1] != ev.size:
            raise ValueError("points must be p x K with K eigenvalues")
        pts.setflags(write=False)
        ev.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "eigenvalues", ev)


@dataclass(frozen=True)
class Dendrogram:
    """Agglomerative merge history.

    ``merges[t]`` is (left, right, height) for step t+1; negative references
    -(i+1) denote leaf i, positive references s denote the cluster created at
    step s. ``leaf_order`` is the left-to-right leaf sequence of the tree.
    """

    n_leaves: int
    merges: tuple[tuple[int, int, float], ...]
    leaf_order: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.merges) != self.n_leaves - 1:
            raise ValueError("a full dendrogram has n_leaves - 1 merges")
        if sorted(self.leaf_order) != list(range(self.n_leaves)):
            raise ValueError("leaf_order must be a permutation of the leaves")


def _degrees(w: SimilarityMatrix) -> np.ndarray:
    d = w.entries.sum(axis=1)
    dead = np.nonzero(d <= 0)[0]
    if dead.size:
        raise ValueError(f"node {int(dead[0])} has zero degree")
    return d


def normalized_laplacian(w: SimilarityMatrix) -> np.ndarray:
    """Random-walk normalized Laplacian D^-1 (D - W)."""
    d = _degrees(w)
    lap = np.diag(d) - w.entries
    return lap / d[:, None]


def spectral_embed(w: SimilarityMatrix, k: int) -> SpectralEmbedding:
    """Coordinates on the K eigenvectors with the smallest eigenvalues.

    Solved on the symmetric normalization D^-1/2 (D - W) D^-1/2 and
    back-transformed by D^-1/2, which gives the random-walk eigenvectors
    exactly. Each eigenvector is unit-normalized with its first nonzero
    coordinate made positive, so the embedding is deterministic.
    """
    if k < 2:
        raise ValueError(f"embedding dimension must be >= 2, got {k}")
    if k > w.p:
        raise ValueError(f"embedding dimension {k} exceeds node count {w.p}")
    d = _degrees(w)
    inv_sqrt = 1.0 / np.sqrt(d)
    sym = -(w.entries * inv_sqrt[:, None] * inv_sqrt[None, :])
    np.fill_diagonal(sym, 1.0)
    eigvals, eigvecs = np.linalg.eigh(sym)
    eigvals = eigvals[:k]
    vecs = inv_sqrt[:, None] * eigvecs[:, :k]
    for c in range(k):
        col = vecs[:, c]
        norm = np.linalg.norm(col)
        if norm == 0:
            raise ArithmeticError(f"eigenvector {c} has zero norm")
        col /= norm
        nz = np.nonzero(np.abs(col) > 1e-12)[0]
        if nz.size and col[nz[0]] < 0:
            col *= -1.0
    lap = normalized_laplacian(w)
    residual = np.linalg.norm(lap @ vecs - vecs * eigvals[None, :])
    if residual > 1e-6:
        raise ArithmeticError(
            f"eigensolver failed: residual norm {residual:.3e}"
        )
    return SpectralEmbedding(vecs, eigvals)


def _kmeanspp_seed(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    p = points.shape[0]
    centers = np.empty((k, points.shape[1]))
    first = int(rng.integers(p))
    centers[0] = points[first]
    d2 = ((points - centers[0]) ** 2).sum(axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total <= 0:
            idx = int(rng.integers(p))
        else:
            idx = int(rng.choice(p, p=d2 / total))
        centers[c] = points[idx]
        d2 = np.minimum(d2, ((points - centers[c]) ** 2).sum(axis=1))
    return centers


def _lloyd(points: np.ndarray, centers: np.ndarray, max_iter: int = 100):
    p, k = points.shape[0], centers.shape[0]
    assign = np.full(p, -1)
    prev_cost = np.inf
    for _ in range(max_iter):
        d2 = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_assign = d2.argmin(axis=1)
        cost = float(d2[np.arange(p), new_assign].sum())
        assert cost <= prev_cost + 1e-9 * max(1.0, abs(prev_cost)), \
            "k-means cost increased"
        prev_cost = cost
        if np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for c in range(k):
            sel = assign == c
            if sel.any():
                centers[c] = points[sel].mean(axis=0)
            else:
                # re-seed an empty cluster at the worst-served point
                far = int(d2[np.arange(p), assign].argmax())
                centers[c] = points[far]
    return assign, prev_cost


def kmeans(points: np.ndarray, k: int, restarts: int, seed: int) -> Partition:
    """Best-of-restarts Lloyd k-means with distance-weighted seeding.

    Deterministic given ``seed``: restart r draws from a generator derived
    from (seed, r). Returns the lowest-cost partition, labels renumbered
    1..k by smallest member index.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[0] == 0:
        raise ValueError("points must be a non-empty 2-d array")
    if restarts < 1:
        raise ValueError(f"restarts must be >= 1, got {restarts}")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    n_distinct = np.unique(points, axis=0).shape[0]
    if k > n_distinct:
        raise ValueError(
            f"k={k} exceeds the number of distinct points ({n_distinct})"
        )
    best_assign, best_cost = None, np.inf
    for r in range(restarts):
        rng = np.random.default_rng([seed, r])
        centers = _kmeanspp_seed(points, k, rng)
        assign, cost = _lloyd(points, centers)
        if cost < best_cost:
            best_assign, best_cost = assign, cost
    labels = np.zeros(points.shape[0], dtype=np.int64)
    next_label = 0
    mapping: dict[int, int] = {}
    for i, c in enumerate(best_assign):
        c = int(c)
        if c not in mapping:
            next_label += 1
            mapping[c] = next_label
        labels[i] = mapping[c]
    return Partition(labels, next_label)


def spectral_clustering(
    w: SimilarityMatrix, k: int, restarts: int, seed: int
) -> Partition:
    """Spectral embedding followed by k-means into k clusters."""
    emb = spectral_embed(w, k)
    return kmeans(emb.points, k, restarts, seed)


def select_k_by_dunn(
    w: SimilarityMatrix, k_min: int, k_max: int, restarts: int, seed: int
) -> tuple[int, Partition]:
    """Cluster for every K in [k_min, k_max]; keep the best Dunn index.

    Dissimilarity for the index is 1 - w. Ties pick the smallest K.
    """
    from .metrics import dissimilarity_from_similarity, dunn

    if not 2 <= k_min <= k_max <= w.p - 1:
        raise ValueError(
            f"need 2 <= k_min <= k_max <= p-1, got [{k_min}, {k_max}] with p={w.p}"
        )
    d = dissimilarity_from_similarity(w)
    best: tuple[float, int, Partition] | None = None
    for k in range(k_min, k_max + 1):
        part = spectral_clustering(w, k, restarts, seed)
        score = dunn(d, part)
        if best is None or score > best[0]:
            best = (score, k, part)
    return best[1], best[2]


def power_adjacency(s: SimilarityMatrix, beta: float) -> SimilarityMatrix:
    """Soft threshold: raise every similarity to the power beta (>= 1)."""
    if beta < 1:
        raise ValueError(f"beta must be >= 1, got {beta}")
    a = s.entries**beta
    a = (a + a.T) / 2.0
    np.fill_diagonal(a, 0.0)
    return SimilarityMatrix(a, s.labels)


@dataclass(frozen=True)
class SoftThresholdFit:
    beta: float
    r_squared: float  # signed: positive when the log-log slope is negative
    slope: float
    mean_connectivity: float


def _scale_free_fit(connectivity: np.ndarray, n_bins: int = 10) -> tuple[float, float]:
    k = connectivity[connectivity > 0]
    if k.size < 2 or float(k.min()) == float(k.max()):
        raise ValueError("degenerate connectivity: no variation across nodes")
    edges = np.linspace(k.min(), k.max(), n_bins + 1)
    edges[-1] *= 1 + 1e-12
    which = np.clip(np.digitize(k, edges) - 1, 0, n_bins - 1)
    log_k, log_f = [], []
    for b in range(n_bins):
        sel = which == b
        if not sel.any():
            continue
        log_k.append(np.log10(k[sel].mean()))
        log_f.append(np.log10(sel.sum() / k.size))
    if len(log_k) < 2:
        raise ValueError("degenerate connectivity: all nodes fall in one bin")
    log_k = np.array(log_k)
    log_f = np.array(log_f)
    slope, _ = np.polyfit(log_k, log_f, 1)
    if log_f.std() == 0 or log_k.std() == 0:
        r2 = 0.0
    else:
        r2 = float(np.corrcoef(log_k, log_f)[0, 1] ** 2)
    signed = r2 if slope < 0 else -r2
    return signed, float(slope)


def pick_soft_threshold(
    s: SimilarityMatrix,
    beta_grid: list[float],
    target_r2: float = 0.8,
    n_bins: int = 10,
) -> tuple[float, list[SoftThresholdFit]]:
    """Scan powers for approximate scale-free topology.

    For each beta the node connectivities k_i = sum_j s_ij^beta are binned
    into ``n_bins`` equal-width bins and log10(bin frequency) is regressed on
    log10(mean bin connectivity); the fit R^2 is signed by the slope (positive
    only for a decaying degree distribution). Returns the smallest beta whose
    signed R^2 reaches ``target_r2``, else the beta maximizing it, along with
    the full report.
    """
    if not beta_grid:
        raise ValueError("beta_grid must be non-empty")
    report = []
    for beta in beta_grid:
        adj = power_adjacency(s, beta)
        k = adj.entries.sum(axis=1)
        signed, slope = _scale_free_fit(k, n_bins)
        report.append(SoftThresholdFit(beta, signed, slope, float(k.mean())))
    for fit in report:
        if fit.r_squared >= target_r2:
            return fit.beta, report
    best = max(report, key=lambda f: (f.r_squared, -f.beta))
    return best.beta, report


def tom_similarity(w: SimilarityMatrix) -> SimilarityMatrix:
    """Topological overlap: shared-neighborhood similarity of node pairs.

    TOM_ij = (sum_u w_iu w_uj + w_ij) / (min(k_i, k_j) + 1 - w_ij) with
    k_i the weighted degree; the diagonal is 0 by convention. Entries whose
    denominator falls below 1e-12 are set to 0 (counted and warned once).
    """
    a = w.entries
    numer = a @ a + a
    k = a.sum(axis=1)
    denom = np.minimum.outer(k, k) + 1.0 - a
    bad = denom < 1e-12
    n_bad = int(bad.sum() - np.trace(bad))
    safe = np.where(bad, 1.0, denom)
    tom = np.where(bad, 0.0, numer / safe)
    tom = (tom + tom.T) / 2.0
    tom = np.clip(tom, 0.0, 1.0)
    np.fill_diagonal(tom, 0.0)
    if n_bad:
        warnings.warn(
            f"{n_bad} topological-overlap entries had near-zero denominators "
            "and were set to 0",
            RuntimeWarning,
            stacklevel=2,
        )
    return SimilarityMatrix(tom, w.labels)


def hierarchical_average_linkage(d: np.ndarray) -> Dendrogram:
    """Agglomerative average-linkage merge sequence of a dissimilarity matrix.

    Ties pick the pair with the smallest slot indices, so the result is
    deterministic. Merge heights are non-decreasing.
    """
    d = np.array(d, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ValueError("dissimilarity matrix must be square")
    if not np.array_equal(d, d.T) or np.any(np.diagonal(d) != 0) or np.any(d < 0):
        raise ValueError(
            "dissimilarity matrix must be symmetric, non-negative, zero-diagonal"
        )
    p = d.shape[0]
    if p < 2:
        raise ValueError("need at least 2 leaves")
    work = d.copy()
    np.fill_diagonal(work, np.inf)
    sizes = np.ones(p, dtype=np.int64)
    refs = [-(i + 1) for i in range(p)]
    merges: list[tuple[int, int, float]] = []
    children: dict[int, tuple[int, int]] = {}
    for step in range(1, p):
        flat = int(np.argmin(work))
        i, j = divmod(flat, p)
        if i > j:
            i, j = j, i
        h = float(work[i, j])
        merges.append((refs[i], refs[j], h))
        children[step] = (refs[i], refs[j])
        # average linkage update into slot i
        ni, nj = sizes[i], sizes[j]
        merged_row = (ni * work[i] + nj * work[j]) / (ni + nj)
        work[i] = merged_row
        work[:, i] = merged_row
        work[i, i] = np.inf
        work[j, :] = np.inf
        work[:, j] = np.inf
        sizes[i] = ni + nj
        refs[i] = step

    def _leaves(ref: int) -> list[int]:
        if ref < 0:
            return [-ref - 1]
        left, right = children[ref]
        return _leaves(left) + _leaves(right)

    leaf_order = tuple(_leaves(p - 1)) if p > 1 else (0,)
    return Dendrogram(p, tuple(merges), leaf_order)


def cut_dendrogram(dend: Dendrogram, height: float, min_size: int) -> Partition:
    """Static cut: apply merges strictly below ``height``; the resulting
    groups become clusters, except those smaller than ``min_size`` which are
    relabeled 0 (unclustered). Cluster ids are ordered by smallest member.
    """
    if height < 0:
        raise ValueError("cut height must be non-negative")
    if min_size < 1:
        raise ValueError("min_size must be >= 1")
    parent = list(range(dend.n_leaves))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    rep: dict[int, int] = {-(i + 1): i for i in range(dend.n_leaves)}
    for step, (left, right, h) in enumerate(dend.merges, start=1):
        la, ra = rep[left], rep[right]
        if h < height:
            parent[find(la)] = find(ra)
        rep[step] = ra
    groups: dict[int, list[int]] = {}
    for leaf in range(dend.n_leaves):
        groups.setdefault(find(leaf), []).append(leaf)
    clusters = sorted((min(g), g) for g in groups.values())
    labels = np.zeros(dend.n_leaves, dtype=np.int64)
    k = 0
    for _, g in clusters:
        if len(g) >= min_size:
            k += 1
            labels[g] = k
    return Partition(labels, k)


@dataclass(frozen=True)
class WgcnaResult:
    partition: Partition
    beta: float
    fit_report: tuple[SoftThresholdFit, ...]
    dendrogram: Dendrogram


def wgcna_lite(
    s: SimilarityMatrix,
    beta_grid: list[float],
    cut_height: float = 0.99,
    min_size: int = 40,
) -> WgcnaResult:
    """Full pipeline: scale-free power pick, TOM, 1 - TOM dissimilarity,
    average linkage, static cut."""
    beta, report = pick_soft_threshold(s, beta_grid)
    adj = power_adjacency(s, beta)
    tom = tom_similarity(adj)
    dis = 1.0 - tom.entries
    np.fill_diagonal(dis, 0.0)
    dend = hierarchical_average_linkage(dis)
    part = cut_dendrogram(dend, cut_height, min_size)
    return WgcnaResult(part, beta, tuple(report), dend)


def write_dendrogram(dend: Dendrogram, path) -> None:
    """Merge-list TSV: step, left, right, height (negative refs are leaves)."""
    lines = ["step\tleft\tright\theight"]
    for step, (left, right, h) in enumerate(dend.merges, start=1):
        lines.append(f"{step}\t{left}\t{right}\t{fmt_float(h)}")
    write_text_atomic(path, "\n".join(lines) + "\n")


def write_fit_report(report: list[SoftThresholdFit] | tuple, path) -> None:
    lines = ["beta\tr_squared\tslope\tmean_connectivity"]
    for f in report:
        lines.append(
            f"{fmt_float(f.beta)}\t{fmt_float(f.r_squared)}\t"
            f"{fmt_float(f.slope)}\t{fmt_float(f.mean_connectivity)}"
        )
    write_text_atomic(path, "\n".join(lines) + "\n")
