"""Core-structure detection and cluster completion.

The detector walks the maximum spanning tree, repeatedly deleting the weakest
remaining edge. Whenever a deletion separates two components that both meet
the minimum size n, the containing set in the recorded family is replaced by
those two components; members of the replaced set that sit in neither side
are dropped to the "outer" pool. Components at or below size n that fail the
split test have their internal edges zeroed ("pruning") so they cannot spawn
further work, but they keep their membership in whichever recorded set still
holds them. Completion then grows each recorded core greedily along the
strongest tree edges until every node is labeled.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .graph import SimilarityMatrix, SpanningTree, maximum_spanning_tree
from .ioutils import read_tsv_rows, write_text_atomic

__all__ = [
    "CoreStructureFamily",
    "Partition",
    "detect_cores",
    "complete_clusters",
    "csd",
    "sweep",
    "SweepEntry",
    "sweep_summary",
    "write_partition",
    "write_cores",
    "read_partition",
]


@dataclass(frozen=True)
class CoreStructureFamily:
    """Disjoint node subsets recorded by the edge-removal walk, plus the
    outer nodes that belong to none of them. ``n`` is the minimum core size
    the family was built with."""

    p: int
    cores: tuple[frozenset[int], ...]
    outer: frozenset[int]
    n: int

    def __post_init__(self) -> None:
        covered: set[int] = set(self.outer)
        total = len(self.outer)
        for c in self.cores:
            covered |= c
            total += len(c)
        if total != self.p or covered != set(range(self.p)):
            raise ValueError("cores and outer must partition the node set")

    @property
    def k(self) -> int:
        return len(self.cores)


@dataclass(frozen=True)
class Partition:
    """Assignment of every node to one cluster label in 1..k.

    Label 0 is reserved for "unclustered" nodes (used by baseline outputs);
    labels 1..k are each non-empty.
    """

    labels: np.ndarray
    k: int

    def __post_init__(self) -> None:
        a = np.array(self.labels, dtype=np.int64)
        if a.ndim != 1 or a.size == 0:
            raise ValueError("labels must be a non-empty 1-d array")
        if a.min() < 0 or a.max() > self.k:
            raise ValueError(f"labels must lie in 0..{self.k}")
        present = set(np.unique(a).tolist())
        missing = [c for c in range(1, self.k + 1) if c not in present]
        if missing:
            raise ValueError(f"empty cluster label(s): {missing}")
        a.setflags(write=False)
        object.__setattr__(self, "labels", a)

    @property
    def p(self) -> int:
        return int(self.labels.size)

    def members(self, label: int) -> np.ndarray:
        return np.nonzero(self.labels == label)[0]

    def n_unclustered(self) -> int:
        return int(np.sum(self.labels == 0))


def detect_cores(tree: SpanningTree, n: int) -> CoreStructureFamily:
    """Detect all minimum-size-n core structures of the tree.

    Works on a mutable copy of the tree's edges. The family starts as the
    single set {0..p-1}; edges are removed in ascending weight order
    (lexicographic tie-break) while more than n-1 edges remain active.
    """
    if n < 1:
        raise ValueError(f"minimum core size must be >= 1, got {n}")
    p = tree.p
    if p < n:
        return CoreStructureFamily(p, (), frozenset(range(p)), n)

    order = sorted(
        range(len(tree.edges)),
        key=lambda e: (tree.edges[e][2],) + tree.edges[e][:2],
    )
    adj = tree.adjacency()
    active = bytearray(b"\x01" * len(tree.edges))
    active_count = len(tree.edges)

    # recorded family: set-id -> members; node -> set-id (-1 once dropped)
    q_sets: dict[int, set[int]] = {0: set(range(p))}
    q_order: list[int] = [0]
    q_of = [0] * p
    next_id = 1
    outer: set[int] = set()

    def comp(start: int) -> list[int]:
        seen = {start}
        out = [start]
        stack = [start]
        while stack:
            u = stack.pop()
            for v, eid in adj[u]:
                if active[eid] and v not in seen:
                    seen.add(v)
                    out.append(v)
                    stack.append(v)
        return out

    def prune(nodes: list[int]) -> int:
        removed = 0
        for u in nodes:
            for _, eid in adj[u]:
                if active[eid]:
                    active[eid] = 0
                    removed += 1
        return removed

    ptr = 0
    while active_count > n - 1:
        while not active[order[ptr]]:
            ptr += 1
        eid = order[ptr]
        i, j, _ = tree.edges[eid]
        active[eid] = 0
        active_count -= 1
        side_i = comp(i)
        side_j = comp(j)
        if len(side_i) >= n and len(side_j) >= n:
            sid = q_of[i]
            replaced = q_sets.pop(sid)
            q_order.remove(sid)
            kept = set(side_i) | set(side_j)
            for u in replaced - kept:
                outer.add(u)
                q_of[u] = -1
            for part in (side_i, side_j):
                q_sets[next_id] = set(part)
                for u in part:
                    q_of[u] = next_id
                q_order.append(next_id)
                next_id += 1
        else:
            if len(side_i) <= n:
                active_count -= prune(side_i)
            if len(side_j) <= n:
                active_count -= prune(side_j)

    cores = tuple(frozenset(q_sets[sid]) for sid in q_order)
    return CoreStructureFamily(p, cores, frozenset(outer), n)


def complete_clusters(family: CoreStructureFamily, tree: SpanningTree) -> Partition:
    """Grow the recorded cores into a total partition of the tree's nodes.

    Repeatedly takes the maximum-weight tree edge joining an unclustered node
    to a clustered one (lexicographic tie-break on the edge) and assigns the
    unclustered endpoint the neighboring cluster's label.
    """
    if family.k == 0:
        raise ValueError("no cores detected; decrease n")
    if family.p != tree.p:
        raise ValueError("core family and tree disagree on node count")
    p = tree.p
    labels = np.zeros(p, dtype=np.int64)
    for k, core in enumerate(family.cores, start=1):
        for u in core:
            labels[u] = k
    adj = tree.adjacency()
    heap: list[tuple[float, int, int]] = []
    for i, j, w in tree.edges:
        if (labels[i] == 0) != (labels[j] == 0):
            heap.append((-w, i, j))
    heapq.heapify(heap)
    remaining = int(np.sum(labels == 0))
    while remaining:
        negw, i, j = heapq.heappop(heap)
        if labels[i] != 0 and labels[j] != 0:
            continue
        u, v = (i, j) if labels[i] == 0 else (j, i)
        labels[u] = labels[v]
        remaining -= 1
        for nb, eid in adj[u]:
            if labels[nb] == 0:
                a, b, w = tree.edges[eid]
                heapq.heappush(heap, (-w, a, b))
    return Partition(labels, family.k)


def csd(w: SimilarityMatrix, n: int) -> tuple[Partition, CoreStructureFamily]:
    """End-to-end pipeline: maximum spanning tree, core detection, completion."""
    tree = maximum_spanning_tree(w)
    family = detect_cores(tree, n)
    partition = complete_clusters(family, tree)
    return partition, family


@dataclass(frozen=True)
class SweepEntry:
    n: int
    partition: Partition
    cores: CoreStructureFamily


def sweep(w: SimilarityMatrix, n_values: list[int]) -> list[SweepEntry]:
    """Run the pipeline for each minimum core size, reusing one spanning tree."""
    if not n_values:
        raise ValueError("n_values must be non-empty")
    if any(b <= a for a, b in zip(n_values, n_values[1:])):
        raise ValueError("n_values must be strictly ascending")
    if n_values[0] < 1:
        raise ValueError("minimum core size must be >= 1")
    tree = maximum_spanning_tree(w)
    out = []
    for n in n_values:
        family = detect_cores(tree, n)
        out.append(SweepEntry(n, complete_clusters(family, tree), family))
    return out


def sweep_summary(entries: list[SweepEntry]) -> list[tuple[int, int, int, float | None]]:
    """Rows of (n, cluster count, core-node count, ARI vs previous n)."""
    from .metrics import adjusted_rand

    rows = []
    prev: Partition | None = None
    for e in entries:
        core_nodes = e.cores.p - len(e.cores.outer)
        ari = None if prev is None else adjusted_rand(prev, e.partition)
        rows.append((e.n, e.partition.k, core_nodes, ari))
        prev = e.partition
    return rows


def write_partition(
    partition: Partition,
    node_labels: tuple[str, ...],
    path,
    family: CoreStructureFamily | None = None,
) -> None:
    """Partition TSV: node_label, cluster_id, in_core (0/1), sorted by node."""
    in_core = np.zeros(partition.p, dtype=np.int64)
    if family is not None:
        for core in family.cores:
            for u in core:
                in_core[u] = 1
    lines = ["node_label\tcluster_id\tin_core"]
    for i in range(partition.p):
        lines.append(f"{node_labels[i]}\t{partition.labels[i]}\t{in_core[i]}")
    write_text_atomic(path, "\n".join(lines) + "\n")


def write_cores(family: CoreStructureFamily, node_labels: tuple[str, ...], path) -> None:
    """Core family TSV: node_label, core_id (empty for outer nodes)."""
    core_id = [""] * family.p
    for k, core in enumerate(family.cores, start=1):
        for u in core:
            core_id[u] = str(k)
    lines = ["node_label\tcore_id"]
    for i in range(family.p):
        lines.append(f"{node_labels[i]}\t{core_id[i]}")
    write_text_atomic(path, "\n".join(lines) + "\n")


def read_partition(path) -> tuple[list[str], np.ndarray]:
    """Read (node labels, cluster ids) from a partition or truth-label TSV.

    Uses the first two columns; a header row is required.
    """
    rows = read_tsv_rows(path)
    if len(rows) < 2:
        raise ValueError(f"{path}: no data rows")
    ids: list[str] = []
    labels: list[int] = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) < 2:
            raise ValueError(f"{path}: line {lineno} has fewer than 2 columns")
        ids.append(row[0])
        try:
            labels.append(int(row[1]))
        except ValueError:
            raise ValueError(
                f"{path}: non-integer cluster id {row[1]!r} at line {lineno}"
            ) from None
    if len(set(ids)) != len(ids):
        raise ValueError(f"{path}: duplicate node labels")
    return ids, np.array(labels, dtype=np.int64)
