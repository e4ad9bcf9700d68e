"""Weighted-graph foundations: similarity matrices, hard-threshold graphs,
connected components, and maximum spanning trees.

The maximum spanning tree built here carries the bottleneck guarantee: for any
two nodes, the minimum edge weight along the unique tree path equals the best
achievable path minimum (maximum-capacity path) in the full graph. Everything
downstream that walks threshold graphs relies on that property.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ioutils import fmt_float, write_text_atomic

__all__ = [
    "SimilarityMatrix",
    "WeightedGraph",
    "SpanningTree",
    "threshold_graph",
    "connected_components",
    "component_of",
    "maximum_spanning_tree",
    "load_similarity",
    "save_similarity",
]


@dataclass(frozen=True)
class SimilarityMatrix:
    """Dense symmetric p x p matrix of pairwise similarities in [0, 1].

    Doubles as the weighted adjacency of a fully connected graph: entry (i, j)
    is the weight of edge (i, j), the diagonal is zero (a node does not
    interact with itself). Instances are immutable after construction.
    """

    entries: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        a = np.array(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"similarity matrix must be square, got shape {a.shape}")
        bad = np.argwhere(a != a.T)
        if bad.size:
            i, j = bad[0]
            raise ValueError(f"similarity matrix not symmetric at row {i}, column {j}")
        nz = np.nonzero(np.diagonal(a))[0]
        if nz.size:
            raise ValueError(f"similarity matrix has nonzero diagonal at row {nz[0]}")
        out = np.argwhere((a < 0.0) | (a > 1.0) | ~np.isfinite(a))
        if out.size:
            i, j = out[0]
            raise ValueError(
                f"similarity entry out of range [0, 1] at row {i}, column {j}"
            )
        if self.labels is not None:
            labels = tuple(str(x) for x in self.labels)
            if len(labels) != a.shape[0]:
                raise ValueError(
                    f"{len(labels)} labels for {a.shape[0]} nodes"
                )
            if len(set(labels)) != len(labels):
                raise ValueError("duplicate node labels")
            object.__setattr__(self, "labels", labels)
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def p(self) -> int:
        return self.entries.shape[0]

    def node_labels(self) -> tuple[str, ...]:
        """Labels if present, else 1-based node indices as strings."""
        if self.labels is not None:
            return self.labels
        return tuple(str(i + 1) for i in range(self.p))


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected weighted graph: node set {0..p-1} plus edges (i, j, w).

    Edges are stored with i < j and strictly positive weight; a zero weight
    means the edge is absent.
    """

    p: int
    edges: tuple[tuple[int, int, float], ...]

    def __post_init__(self) -> None:
        seen = set()
        for i, j, w in self.edges:
            if not (0 <= i < j < self.p):
                raise ValueError(f"bad edge endpoints ({i}, {j}) for p={self.p}")
            if not w > 0:
                raise ValueError(f"edge ({i}, {j}) has non-positive weight {w}")
            if (i, j) in seen:
                raise ValueError(f"duplicate edge ({i}, {j})")
            seen.add((i, j))

    def adjacency(self) -> list[list[tuple[int, int]]]:
        """Per-node list of (neighbor, edge index) pairs."""
        adj: list[list[tuple[int, int]]] = [[] for _ in range(self.p)]
        for eid, (i, j, _) in enumerate(self.edges):
            adj[i].append((j, eid))
            adj[j].append((i, eid))
        return adj

    def to_similarity(self, labels: tuple[str, ...] | None = None) -> SimilarityMatrix:
        """Dense similarity view of this graph (absent edges become 0)."""
        a = np.zeros((self.p, self.p))
        for i, j, w in self.edges:
            a[i, j] = w
            a[j, i] = w
        return SimilarityMatrix(a, labels)


class SpanningTree(WeightedGraph):
    """A connected, acyclic WeightedGraph with exactly p-1 edges."""

    def __post_init__(self) -> None:
        super().__post_init__()
        if len(self.edges) != self.p - 1:
            raise ValueError(
                f"spanning tree on {self.p} nodes needs {self.p - 1} edges, "
                f"got {len(self.edges)}"
            )
        if len(connected_components(self)) != 1:
            raise ValueError("spanning tree must be connected")


def threshold_graph(w: SimilarityMatrix, lam: float) -> WeightedGraph:
    """Hard-threshold graph: keep edge (i, j) iff w_ij >= lam and w_ij > 0."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"threshold must lie in [0, 1], got {lam}")
    iu, ju = np.triu_indices(w.p, k=1)
    vals = w.entries[iu, ju]
    keep = (vals >= lam) & (vals > 0.0)
    edges = tuple(
        (int(i), int(j), float(v)) for i, j, v in zip(iu[keep], ju[keep], vals[keep])
    )
    return WeightedGraph(w.p, edges)


def _bfs(adj: list[list[tuple[int, int]]], start: int, seen: bytearray) -> frozenset[int]:
    comp = [start]
    seen[start] = 1
    stack = [start]
    while stack:
        u = stack.pop()
        for v, _ in adj[u]:
            if not seen[v]:
                seen[v] = 1
                comp.append(v)
                stack.append(v)
    return frozenset(comp)


def connected_components(g: WeightedGraph) -> list[frozenset[int]]:
    """Maximal connected node sets, ordered by their smallest member."""
    adj = g.adjacency()
    seen = bytearray(g.p)
    comps = []
    for s in range(g.p):
        if not seen[s]:
            comps.append(_bfs(adj, s, seen))
    return comps


def component_of(g: WeightedGraph, i: int) -> frozenset[int]:
    """The connected component containing node i."""
    if not 0 <= i < g.p:
        raise ValueError(f"node index {i} out of range for p={g.p}")
    return _bfs(g.adjacency(), i, bytearray(g.p))


def maximum_spanning_tree(w: SimilarityMatrix) -> SpanningTree:
    """Maximum-weight spanning tree of the positive-weight graph of w.

    Prim's algorithm on the dense matrix, O(p^2). Ties between equal-weight
    candidate edges are broken by lexicographic (i, j) order so the output is
    deterministic. Raises if the positive-weight graph is disconnected,
    reporting the number of components.
    """
    p = w.p
    if p == 1:
        return SpanningTree(1, ())
    a = w.entries
    in_tree = np.zeros(p, dtype=bool)
    in_tree[0] = True
    best_w = a[0].copy()
    best_from = np.zeros(p, dtype=np.int64)
    best_w[0] = -np.inf
    edges: list[tuple[int, int, float]] = []
    for _ in range(p - 1):
        m = best_w.max()
        if m <= 0.0:
            k = len(connected_components(threshold_graph(w, 0.0)))
            raise ValueError(
                f"positive-weight graph has {k} components; "
                "maximum spanning tree requires a connected graph "
                "(cluster the components separately)"
            )
        cand = np.nonzero(best_w == m)[0]
        v = int(cand[0])
        if cand.size > 1:
            pair = (min(best_from[v], v), max(best_from[v], v))
            for c in cand[1:]:
                c = int(c)
                cp = (min(best_from[c], c), max(best_from[c], c))
                if cp < pair:
                    v, pair = c, cp
        u = int(best_from[v])
        edges.append((min(u, v), max(u, v), float(a[u, v])))
        in_tree[v] = True
        best_w[v] = -np.inf
        row = a[v]
        better = ~in_tree & (row > best_w)
        best_w[better] = row[better]
        best_from[better] = v
        # equal weight: keep the lexicographically smaller edge
        tied = np.nonzero(~in_tree & (row == best_w) & (row > 0) & ~better)[0]
        for t in tied:
            t = int(t)
            if (min(v, t), max(v, t)) < (min(best_from[t], t), max(best_from[t], t)):
                best_from[t] = v
    edges.sort()
    return SpanningTree(p, tuple(edges))


def save_similarity(w: SimilarityMatrix, path) -> None:
    """Write a similarity matrix as TSV: optional label header, then p rows."""
    lines = []
    if w.labels is not None:
        lines.append("\t".join(w.labels))
    for row in w.entries:
        lines.append("\t".join(fmt_float(x) for x in row))
    write_text_atomic(path, "\n".join(lines) + "\n")


def load_similarity(path) -> SimilarityMatrix:
    """Read a similarity TSV written by :func:`save_similarity`.

    The header row of node labels is optional; it is detected by checking
    whether every field of the first line parses as a number. Symmetry,
    zero diagonal and the [0, 1] range are validated, naming the first
    violating row/column.
    """
    with open(path, encoding="utf-8") as fh:
        raw = [line.rstrip("\n") for line in fh]
    rows = [line.split("\t") for line in raw if line != ""]
    if not rows:
        raise ValueError(f"{path}: empty similarity file")
    labels: tuple[str, ...] | None = None

    def _all_numeric(fields: list[str]) -> bool:
        try:
            for f in fields:
                float(f)
        except ValueError:
            return False
        return True

    start = 0
    if not _all_numeric(rows[0]):
        labels = tuple(rows[0])
        start = 1
    data = rows[start:]
    p = len(data)
    if p == 0:
        raise ValueError(f"{path}: no matrix rows")
    mat = np.empty((p, p))
    for r, fields in enumerate(data):
        if len(fields) != p:
            raise ValueError(
                f"{path}: line {start + r + 1} has {len(fields)} fields, expected {p}"
            )
        for c, f in enumerate(fields):
            try:
                mat[r, c] = float(f)
            except ValueError:
                raise ValueError(
                    f"{path}: non-numeric value {f!r} at line {start + r + 1}, "
                    f"column {c + 1}"
                ) from None
    return SimilarityMatrix(mat, labels)
