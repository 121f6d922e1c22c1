"""Digraphs on unordered hypothesis pairs and their dominating sets.

The graph of interest has one vertex per pair {j, j'} of hypothesis indices
and an edge u -> w whenever u's signed Scheffe set recovers at least a
phi-fraction of w's pair distance:

    |<delta_w, S_u>| >= phi * ||delta_w||_1        (weak inequality)

At phi = 1/6 this graph always contains a dominating set of size at most
4 k^{3/2} sqrt(log2 k), found here by sampling random vertices and patching
whatever they fail to cover.  Logarithms are base 2 throughout; the success
probability of the sampling step depends on it.
"""

from __future__ import annotations

import itertools
import json
import math
import time
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .distributions import HypothesisSet
from .errors import (
    ArgumentError,
    ConfigError,
    InvariantError,
    ResamplingLimitError,
)

PHI_DEFAULT = 1.0 / 6.0

# Attempt cap for resampling loops; expected attempts are < 2.
MAX_RESAMPLE_ATTEMPTS = 64


def pair_count(k: int) -> int:
    return k * (k - 1) // 2


def pair_index(lo, hi, k: int):
    """Vertex id of the pair {lo, hi} (0-based, lo < hi) in lexicographic order."""
    lo = np.asarray(lo)
    hi = np.asarray(hi)
    idx = lo * (2 * k - lo - 1) // 2 + (hi - lo - 1)
    return idx if idx.ndim else int(idx)


def all_pairs(k: int) -> np.ndarray:
    """All C(k, 2) index pairs, 0-based, in lexicographic order."""
    i, j = np.triu_indices(k, 1)
    return np.column_stack([i, j])


@dataclass(frozen=True, order=True)
class VertexPair:
    """Unordered pair {lo, hi} of 1-based hypothesis indices, stored canonically."""

    lo: int
    hi: int

    def __post_init__(self):
        if not (1 <= self.lo < self.hi):
            raise InvariantError(f"need 1 <= lo < hi, got ({self.lo}, {self.hi})")

    def vertex_id(self, k: int) -> int:
        if self.hi > k:
            raise ArgumentError(f"pair {self} is not a vertex of a graph on {k} hypotheses")
        return pair_index(self.lo - 1, self.hi - 1, k)

    @classmethod
    def from_vertex_id(cls, vid: int, k: int) -> "VertexPair":
        pairs = all_pairs(k)
        lo, hi = pairs[vid]
        return cls(int(lo) + 1, int(hi) + 1)


def _ids_from_pairs(pairs, k: int) -> np.ndarray:
    ids = np.array([p.vertex_id(k) for p in pairs], dtype=np.int64)
    return ids


def _pairs_from_ids(ids, k: int) -> tuple[VertexPair, ...]:
    lookup = all_pairs(k)
    return tuple(VertexPair(int(lookup[v, 0]) + 1, int(lookup[v, 1]) + 1) for v in ids)


@dataclass(frozen=True, eq=False)
class PairDigraph:
    """Adjacency-list digraph on the C(k, 2) unordered index pairs."""

    k: int
    out_edges: tuple[np.ndarray, ...]  # sorted out-neighbor ids, one array per vertex
    in_degrees: np.ndarray

    @property
    def num_vertices(self) -> int:
        return pair_count(self.k)

    @property
    def edge_count(self) -> int:
        return int(self.in_degrees.sum())

    @cached_property
    def vertices(self) -> tuple[VertexPair, ...]:
        return _pairs_from_ids(range(self.num_vertices), self.k)

    def has_edge(self, u: int, w: int) -> bool:
        out = self.out_edges[u]
        i = int(np.searchsorted(out, w))
        return i < out.size and int(out[i]) == w

    def has_edges_from(self, u: int, targets: np.ndarray) -> np.ndarray:
        """Boolean mask: which of `targets` are out-neighbors of u."""
        out = self.out_edges[u]
        hits = np.zeros(targets.size, dtype=bool)
        if out.size:
            pos = np.searchsorted(out, targets)
            ok = pos < out.size
            hits[ok] = out[pos[ok]] == targets[ok]
        return hits

    def dense_adjacency(self) -> np.ndarray:
        adj = np.zeros((self.num_vertices, self.num_vertices), dtype=bool)
        for u, out in enumerate(self.out_edges):
            adj[u, out] = True
        return adj

    @classmethod
    def from_edge_ids(cls, k: int, sources, targets) -> "PairDigraph":
        V = pair_count(k)
        sources = np.asarray(sources, dtype=np.int64)
        targets = np.asarray(targets, dtype=np.int64)
        order = np.lexsort((targets, sources))
        sources, targets = sources[order], targets[order]
        out: list[np.ndarray] = []
        bounds = np.searchsorted(sources, np.arange(V + 1))
        for u in range(V):
            out.append(targets[bounds[u]:bounds[u + 1]].copy())
        in_deg = np.bincount(targets, minlength=V).astype(np.int64)
        return cls(k=k, out_edges=tuple(out), in_degrees=in_deg)


@dataclass(frozen=True, eq=False)
class ScheffeGraph(PairDigraph):
    """PairDigraph induced by a hypothesis set at comparison constant phi.

    pair_norms caches ||delta_{jj'}||_1 per vertex; the sign and difference
    rows are kept so edge conditions can be re-evaluated without the source
    hypothesis set.
    """

    phi: float = PHI_DEFAULT
    pair_norms: np.ndarray = field(default=None)
    pair_signs: np.ndarray = field(default=None)    # V x d, entries ±1
    pair_deltas: np.ndarray = field(default=None)   # V x d


def build_scheffe_graph(Q: HypothesisSet, phi: float = PHI_DEFAULT) -> ScheffeGraph:
    """Materialize the phi-comparison graph of Q.

    Edge u -> w present iff |<delta_w, S_u>| >= phi * ||delta_w||_1.  Pairs of
    identical hypotheses have zero norm and therefore receive edges from every
    other vertex.  O(k^2) vertices and O(k^4) pair checks.
    """
    if not (0.0 < phi <= 1.0):
        raise ConfigError(f"phi must lie in (0, 1], got {phi}")
    k = Q.k
    P = Q.probs_matrix
    pairs = all_pairs(k)
    deltas = P[pairs[:, 0]] - P[pairs[:, 1]]
    signs = np.where(deltas >= 0.0, 1, -1).astype(np.int8)
    norms = np.abs(deltas).sum(axis=1)
    # inner[u, w] = <S_u, delta_w>
    inner = signs.astype(np.float64) @ deltas.T
    adj = np.abs(inner) >= phi * norms[np.newaxis, :]
    np.fill_diagonal(adj, False)
    out = tuple(np.flatnonzero(row).astype(np.int64) for row in adj)
    in_deg = adj.sum(axis=0).astype(np.int64)
    return ScheffeGraph(
        k=k,
        out_edges=out,
        in_degrees=in_deg,
        phi=float(phi),
        pair_norms=norms,
        pair_signs=signs,
        pair_deltas=deltas,
    )


@dataclass(frozen=True, eq=False)
class DominatingSetCertificate:
    """A dominating set plus the pieces the randomized search produced it from.

    random_part holds the sampled vertices R, low_indegree_part the vertices
    the sample failed to cover; their union is the dominating set.
    """

    k: int
    dominating_set: tuple[VertexPair, ...]
    random_part: tuple[VertexPair, ...]
    low_indegree_part: tuple[VertexPair, ...]
    attempts: int
    target_bound: float
    build_ms: float = 0.0
    seed: int | None = None

    def to_json_dict(self) -> dict:
        return {
            "k": self.k,
            "dominating_set": [[p.lo, p.hi] for p in self.dominating_set],
            "attempts": self.attempts,
            "target_bound": self.target_bound,
            "build_ms": self.build_ms,
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def from_json_dict(cls, doc: dict) -> "DominatingSetCertificate":
        pairs = tuple(VertexPair(int(a), int(b)) for a, b in doc["dominating_set"])
        return cls(
            k=int(doc["k"]),
            dominating_set=pairs,
            random_part=(),
            low_indegree_part=(),
            attempts=int(doc["attempts"]),
            target_bound=float(doc["target_bound"]),
            build_ms=float(doc.get("build_ms", 0.0)),
        )

    @classmethod
    def load(cls, path) -> "DominatingSetCertificate":
        return cls.from_json_dict(json.loads(Path(path).read_text()))


def sample_size(k: int) -> int:
    """Number of vertices the randomized search samples: ceil(k^1.5 sqrt(log2 k)), capped at |V|."""
    return min(math.ceil(k ** 1.5 * math.sqrt(math.log2(k))), pair_count(k))


def domination_bound(k: int) -> float:
    """Size bound 4 k^{3/2} sqrt(log2 k) the certificate must meet, capped at |V|."""
    return min(4.0 * k ** 1.5 * math.sqrt(math.log2(k)), float(pair_count(k)))


def _shared_index_cover(graph: PairDigraph, sampled: np.ndarray) -> np.ndarray:
    """Mark each sampled vertex and its out-neighbors among index-sharing pairs.

    For v = {a, b} only the candidates {a, i} and {b, i}, i outside v, are
    scanned; this is the O(k)-per-vertex hashtable scan.  A vertex left
    unmarked may still be an out-neighbor of the sample, so the resulting
    patch set is conservative but always yields a valid dominating set.
    """
    k = graph.k
    pairs = all_pairs(k)
    covered = np.zeros(graph.num_vertices, dtype=bool)
    covered[sampled] = True
    indices = np.arange(k)
    for v in sampled:
        a, b = int(pairs[v, 0]), int(pairs[v, 1])
        others = indices[(indices != a) & (indices != b)]
        cand_a = pair_index(np.minimum(a, others), np.maximum(a, others), k)
        cand_b = pair_index(np.minimum(b, others), np.maximum(b, others), k)
        targets = np.concatenate([cand_a, cand_b])
        hits = graph.has_edges_from(v, targets)
        covered[targets[hits]] = True
    return covered


def find_dominating_set(G: PairDigraph, Q: HypothesisSet | None = None, seed=None) -> DominatingSetCertificate:
    """Randomized dominating-set search over a pair digraph.

    Samples R of sample_size(k) vertices without replacement, marks R and the
    out-neighbors found by the shared-index scan as covered, and returns R
    together with everything left uncovered.  Resamples with fresh randomness
    until the union meets domination_bound(k); each attempt succeeds with
    probability > 1/2 on graphs built at phi = 1/6, and the loop raises after
    MAX_RESAMPLE_ATTEMPTS.
    """
    if Q is not None and Q.k != G.k:
        raise ArgumentError(f"hypothesis set has k={Q.k}, graph has k={G.k}")
    k = G.k
    V = G.num_vertices
    ell = sample_size(k)
    bound = domination_bound(k)
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    attempts = 0
    while attempts < MAX_RESAMPLE_ATTEMPTS:
        attempts += 1
        sampled = np.sort(rng.choice(V, size=ell, replace=False))
        covered = _shared_index_cover(G, sampled)
        patch = np.flatnonzero(~covered)
        total = ell + patch.size
        if total <= bound:
            dom_ids = np.union1d(sampled, patch)
            elapsed_ms = (time.perf_counter() - t0) * 1e3
            return DominatingSetCertificate(
                k=k,
                dominating_set=_pairs_from_ids(dom_ids, k),
                random_part=_pairs_from_ids(sampled, k),
                low_indegree_part=_pairs_from_ids(patch, k),
                attempts=attempts,
                target_bound=4.0 * k ** 1.5 * math.sqrt(math.log2(k)),
                build_ms=elapsed_ms,
            )
    raise ResamplingLimitError(
        "dominating-set sampling kept exceeding the size bound",
        attempts,
        {"sample_size": ell, "bound": bound, "vertices": V},
    )


def verify_domination(G: PairDigraph, dominating_set) -> bool:
    """Independent brute-force check that every vertex is in or reached from the set."""
    ids = _ids_from_pairs(list(dominating_set), G.k)
    covered = np.zeros(G.num_vertices, dtype=bool)
    covered[ids] = True
    for v in ids:
        covered[G.out_edges[v]] = True
    return bool(covered.all())


_TRIANGLE_CASES = ("i", "ii", "iii")


def _triangle_labels(G: PairDigraph, x: int, y: int, z: int) -> tuple[str, ...]:
    """Cases holding for 0-based roles (j, j', j'') = (x, y, z)."""
    k = G.k
    v_xy = pair_index(min(x, y), max(x, y), k)
    v_xz = pair_index(min(x, z), max(x, z), k)
    v_yz = pair_index(min(y, z), max(y, z), k)
    labels = []
    if G.has_edge(v_xz, v_yz) and G.has_edge(v_yz, v_xz):
        labels.append("i")
    if G.has_edge(v_xy, v_xz):
        labels.append("ii")
    if G.has_edge(v_xy, v_yz):
        labels.append("iii")
    return tuple(labels)


def check_triangle(G: PairDigraph, j: int, j2: int, j3: int) -> tuple[str, ...]:
    """Which of the three triangle edge structures hold for roles (j, j2, j3).

    Returns a tuple drawn from ("i", "ii", "iii") for the roles exactly as
    given: "i" means {j, j3} <-> {j2, j3}, "ii" means {j, j2} -> {j, j3},
    "iii" means {j, j2} -> {j2, j3}.  Returns ("violation",) only when no
    case holds under any assignment of the three indices to the roles, which
    never happens for graphs built from distributions at phi = 1/6.
    """
    trio = (j, j2, j3)
    if len(set(trio)) != 3 or any(not 1 <= t <= G.k for t in trio):
        raise ArgumentError(f"indices must be distinct and within 1..{G.k}, got {trio}")
    x, y, z = (t - 1 for t in trio)
    labels = _triangle_labels(G, x, y, z)
    if labels:
        return labels
    for perm in itertools.permutations((x, y, z)):
        if _triangle_labels(G, *perm):
            return ()
    return ("violation",)


@dataclass(frozen=True)
class TriangleScan:
    triples: int
    violations: int
    case_counts: dict[str, int]


def scan_triangles(G: PairDigraph) -> TriangleScan:
    """Exhaustive triangle check over all C(k, 3) triples (vectorized).

    A triple violates only if no role assignment admits any of the three edge
    structures; case_counts tallies the cases under the as-given (sorted)
    role order.
    """
    k = G.k
    adj = G.dense_adjacency()
    triples = np.array(list(itertools.combinations(range(k), 3)), dtype=np.int64)
    if triples.size == 0:
        return TriangleScan(0, 0, {c: 0 for c in _TRIANGLE_CASES})
    x, y, z = triples[:, 0], triples[:, 1], triples[:, 2]
    any_case = np.zeros(len(triples), dtype=bool)
    hold: dict[str, np.ndarray] = {}
    # Swapping the first two roles only exchanges cases ii and iii, so three
    # role assignments (choice of the third index) cover all six orderings.
    for r1, r2, r3 in ((x, y, z), (x, z, y), (y, z, x)):
        v12 = pair_index(np.minimum(r1, r2), np.maximum(r1, r2), k)
        v13 = pair_index(np.minimum(r1, r3), np.maximum(r1, r3), k)
        v23 = pair_index(np.minimum(r2, r3), np.maximum(r2, r3), k)
        case_i = adj[v13, v23] & adj[v23, v13]
        case_ii = adj[v12, v13]
        case_iii = adj[v12, v23]
        any_case |= case_i | case_ii | case_iii
        if r3 is z:  # as-given role order
            hold = {"i": case_i, "ii": case_ii, "iii": case_iii}
    return TriangleScan(
        triples=len(triples),
        violations=int((~any_case).sum()),
        case_counts={c: int(m.sum()) for c, m in hold.items()},
    )


def count_low_indegree(G: PairDigraph, r: float) -> int:
    """Number of vertices with in-degree strictly below r; at phi = 1/6 this is <= 3kr."""
    if r < 1:
        raise ArgumentError(f"r must be at least 1, got {r}")
    return int((G.in_degrees < r).sum())


def check_metric_triple(a: float, b: float, c: float) -> tuple[str, ...]:
    """Labels for a triangle with leg lengths (a, b, c), focusing on leg a.

    "short" when a <= b/2 and a <= c/2; "long" when a > b/3 and a > c/3.
    At least one label always applies; both can.
    """
    sides = (a, b, c)
    if any(s < 0 for s in sides):
        raise ArgumentError(f"lengths must be non-negative, got {sides}")
    tol = 1e-12 * max(1.0, *sides)
    if a > b + c + tol or b > a + c + tol or c > a + b + tol:
        raise ArgumentError(f"triangle inequality violated for {sides}")
    labels = []
    if a <= b / 2 and a <= c / 2:
        labels.append("short")
    if a > b / 3 and a > c / 3:
        labels.append("long")
    return tuple(labels)


def minimum_cover_size(G: PairDigraph, targets=None, node_budget: int = 2_000_000) -> int:
    """Exact size of the smallest vertex set dominating `targets` (branch and bound).

    targets defaults to every vertex, in which case this is the exact
    domination number.  Feasible only for small instances; raises once the
    search tree exceeds node_budget.
    """
    V = G.num_vertices
    if targets is None:
        target_ids = np.arange(V)
    else:
        target_ids = np.asarray(sorted({p.vertex_id(G.k) if isinstance(p, VertexPair) else int(p)
                                        for p in targets}), dtype=np.int64)
    if target_ids.size == 0:
        return 0
    bitpos = {int(t): i for i, t in enumerate(target_ids)}
    full_mask = (1 << target_ids.size) - 1

    # mask[v] = targets dominated by v (itself plus out-neighbors).
    masks = {}
    for v in range(V):
        m = 0
        if v in bitpos:
            m |= 1 << bitpos[v]
        for w in G.out_edges[v]:
            w = int(w)
            if w in bitpos:
                m |= 1 << bitpos[w]
        if m:
            masks[v] = m
    coverers_of = [[] for _ in range(target_ids.size)]
    for v, m in masks.items():
        rem = m
        while rem:
            low = rem & -rem
            coverers_of[low.bit_length() - 1].append(v)
            rem ^= low
    if any(not c for c in coverers_of):
        raise InvariantError("some target has no possible dominator")

    # Union of all coverer masks per target, for the packing lower bound.
    conflict_of = [0] * target_ids.size
    for t, cov in enumerate(coverers_of):
        u = 0
        for v in cov:
            u |= masks[v]
        conflict_of[t] = u

    def packing_lower_bound(uncovered: int) -> int:
        # Greedily pick targets whose coverer unions are disjoint; every cover
        # needs one distinct vertex per picked target.
        lb = 0
        rem = uncovered
        while rem:
            t = (rem & -rem).bit_length() - 1
            rem &= ~conflict_of[t]
            lb += 1
        return lb

    # Greedy cover for the initial upper bound.
    best = 0
    uncovered = full_mask
    while uncovered:
        v = max(masks, key=lambda u: bin(masks[u] & uncovered).count("1"))
        uncovered &= ~masks[v]
        best += 1

    nodes = 0

    def dfs(uncovered: int, size: int, best: int) -> int:
        nonlocal nodes
        nodes += 1
        if nodes > node_budget:
            raise ResamplingLimitError("exact cover search exceeded its node budget", nodes)
        if uncovered == 0:
            return min(best, size)
        if size + packing_lower_bound(uncovered) >= best:
            return best
        # Branch on the uncovered target with the fewest coverers.
        pick, fewest = -1, None
        rem = uncovered
        while rem:
            low = rem & -rem
            t = low.bit_length() - 1
            n = sum(1 for v in coverers_of[t] if masks[v] & uncovered)
            if fewest is None or n < fewest:
                fewest, pick = n, t
            rem ^= low
        cands = sorted(
            (v for v in coverers_of[pick]),
            key=lambda v: -bin(masks[v] & uncovered).count("1"),
        )
        for v in cands:
            best = dfs(uncovered & ~masks[v], size + 1, best)
        return best

    return dfs(full_mask, 0, best)


def graph_to_json_dict(G: PairDigraph, phi: float | None = None) -> dict:
    """Edge-list export; quadruple [a, b, c, d] means {a, b} -> {c, d} (1-based)."""
    pairs = all_pairs(G.k) + 1
    edges = []
    for u, out in enumerate(G.out_edges):
        a, b = int(pairs[u, 0]), int(pairs[u, 1])
        for w in out:
            edges.append([a, b, int(pairs[w, 0]), int(pairs[w, 1])])
    phi_val = phi if phi is not None else getattr(G, "phi", None)
    return {"k": G.k, "phi": phi_val, "edges": edges}


def graph_from_json_dict(doc: dict) -> tuple[float | None, PairDigraph]:
    k = int(doc["k"])
    phi = doc.get("phi")
    sources, targets = [], []
    for a, b, c, d in doc["edges"]:
        sources.append(pair_index(a - 1, b - 1, k))
        targets.append(pair_index(c - 1, d - 1, k))
    digraph = PairDigraph.from_edge_ids(k, sources, targets)
    return (float(phi) if phi is not None else None, digraph)
