"""Independent reference implementations used to check the package.

Everything here is deliberately written from first principles (plain loops,
union-find, exact rational arithmetic) and never calls into corecluster, so
the checks stay independent of the code paths they verify.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb

import numpy as np


def random_similarity(p: int, seed: int, low: float = 0.05, high: float = 0.95) -> np.ndarray:
    """Random symmetric matrix with all-distinct positive off-diagonal weights.

    Every entry is positive, so the graph is connected; distinctness comes
    from shuffling an evenly spaced grid of values.
    """
    rng = np.random.default_rng(seed)
    m = p * (p - 1) // 2
    vals = np.linspace(low, high, m)
    rng.shuffle(vals)
    a = np.zeros((p, p))
    iu = np.triu_indices(p, 1)
    a[iu] = vals
    return a + a.T


def kruskal_max_tree(w: np.ndarray) -> set[tuple[int, int]]:
    """Greedy edge-sorting maximum spanning tree (union-find)."""
    p = w.shape[0]
    edges = sorted(
        ((float(w[i, j]), i, j) for i in range(p) for j in range(i + 1, p) if w[i, j] > 0),
        key=lambda e: (-e[0], e[1], e[2]),
    )
    parent = list(range(p))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    tree: set[tuple[int, int]] = set()
    for _, i, j in edges:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            tree.add((i, j))
    return tree


def bottleneck_dp(w: np.ndarray) -> np.ndarray:
    """All-pairs maximum-capacity (widest-path) values by dynamic programming."""
    cap = np.array(w, dtype=float)
    np.fill_diagonal(cap, np.inf)
    p = cap.shape[0]
    for k in range(p):
        cap = np.maximum(cap, np.minimum(cap[:, k : k + 1], cap[k : k + 1, :]))
    return cap


def _components_above(w: np.ndarray, nodes: set[int], thresh: float) -> list[frozenset[int]]:
    """Components of the subgraph on `nodes` keeping edges strictly above thresh."""
    order = sorted(nodes)
    seen: set[int] = set()
    comps = []
    for s in order:
        if s in seen:
            continue
        comp = {s}
        seen.add(s)
        stack = [s]
        while stack:
            u = stack.pop()
            for v in order:
                if v not in seen and w[u, v] > thresh:
                    seen.add(v)
                    comp.add(v)
                    stack.append(v)
        comps.append(frozenset(comp))
    return comps


def definition_cores(w: np.ndarray, n: int) -> tuple[frozenset[frozenset[int]], frozenset[int]]:
    """Cores straight from the definitions, walking the threshold hierarchy.

    Starting from the full node set, raise the threshold through the distinct
    edge weights. Components of size < n are shed; when a disconnection
    leaves two or more components of size >= n, recurse into each of them.
    A recursion-entry set becomes a core when no such split ever occurs below
    it (it keeps every member, including ones shed on the way down).
    """
    p = w.shape[0]
    if p < n:
        return frozenset(), frozenset(range(p))
    cores: list[frozenset[int]] = []
    outer: set[int] = set()

    def walk(recorded: frozenset[int]) -> None:
        current = set(recorded)
        while True:
            weights = sorted(
                {
                    float(w[u, v])
                    for u in current
                    for v in current
                    if u < v and w[u, v] > 0
                }
            )
            progressed = False
            for t in weights:
                parts = _components_above(w, current, t)
                if len(parts) == 1:
                    continue
                big = [part for part in parts if len(part) >= n]
                if len(big) >= 2:
                    outer.update(set(recorded) - set().union(*big))
                    for b in big:
                        walk(b)
                    return
                if len(big) == 1:
                    current = set(big[0])
                    progressed = True
                    break
                cores.append(recorded)
                return
            if not progressed:
                cores.append(recorded)
                return

    walk(frozenset(range(p)))
    return frozenset(cores), frozenset(outer)


def pair_count_ari(a, b) -> float:
    """Adjusted Rand index by brute-force pair counting."""
    n = len(a)
    ss = sd = ds = dd = 0
    for i in range(n):
        for j in range(i + 1, n):
            s1 = a[i] == a[j]
            s2 = b[i] == b[j]
            if s1 and s2:
                ss += 1
            elif s1:
                sd += 1
            elif s2:
                ds += 1
            else:
                dd += 1
    den = (ss + sd) * (sd + dd) + (ss + ds) * (ds + dd)
    if den == 0:
        return 1.0
    return 2.0 * (ss * dd - sd * ds) / den


def tom_triple_loop(w: np.ndarray) -> np.ndarray:
    """Topological overlap by direct triple loops."""
    p = w.shape[0]
    k = [sum(w[i, u] for u in range(p) if u != i) for i in range(p)]
    out = np.zeros((p, p))
    for i in range(p):
        for j in range(p):
            if i == j:
                continue
            shared = sum(w[i, u] * w[u, j] for u in range(p) if u != i and u != j)
            denom = min(k[i], k[j]) + 1.0 - w[i, j]
            out[i, j] = (shared + w[i, j]) / denom if denom >= 1e-12 else 0.0
    return out


def hypergeom_tail_exact(overlap: int, universe: int, term: int, cluster: int) -> Fraction:
    """P[X >= overlap] as an exact rational."""
    lo = max(0, term + cluster - universe)
    hi = min(term, cluster)
    if overlap <= lo:
        return Fraction(1)
    if overlap > hi:
        return Fraction(0)
    total = comb(universe, cluster)
    hits = sum(
        comb(term, k) * comb(universe - term, cluster - k) for k in range(overlap, hi + 1)
    )
    return Fraction(hits, total)
