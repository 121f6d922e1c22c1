"""Executable barrier constructions: a hard digraph and a flattening refutation.

Two independent obstructions to pushing the query budget down to ~k:

1. A digraph on the C(k, 2) index pairs that satisfies the triangular edge
   structure yet certifiably needs a dominating set of size at least
   k^{3/2} / (8 sqrt(log2 k)).  The certificate is per-instance: a sampled
   vertex set R whose pairwise overlaps are all small, so no single vertex
   can dominate more than t_max + 1 of its elements.

2. A family of 2n distributions (point masses plus rescaled Hadamard
   columns) on which every "flat" stochastic map collapses some pair to
   l1 distance at most 2/sqrt(n), refuting distance-preserving flattening.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    ConfigError,
    DimensionError,
    FlatnessError,
    InvariantError,
    ResamplingLimitError,
    UnsupportedSizeError,
)
from .scheffe_graph import (
    MAX_RESAMPLE_ATTEMPTS,
    PairDigraph,
    VertexPair,
    all_pairs,
    pair_count,
    pair_index,
    _pairs_from_ids,
)

MIN_LOWER_BOUND_K = 16  # below this the sample would need more vertices than exist


@dataclass(frozen=True, eq=False)
class LowerBoundCertificate:
    """Digraph plus the sampled set witnessing its large domination number.

    overlap_sizes[v] counts the indices i outside v for which both pairs
    {a, i} and {b, i} landed in the sample; a vertex dominates at most
    overlap_sizes[v] + 1 sampled elements, so the domination number is at
    least |R| / (t_max + 1).
    """

    k: int
    graph: PairDigraph
    sampled_set: tuple[VertexPair, ...]
    overlap_sizes: np.ndarray
    t_max: int
    implied_lower_bound: float
    attempts: int
    seed: int | None = None

    @property
    def sample_size(self) -> int:
        return len(self.sampled_set)

    def to_json_dict(self) -> dict:
        return {
            "k": self.k,
            "ell": self.sample_size,
            "t_max": self.t_max,
            "implied_lower_bound": self.implied_lower_bound,
            "attempts": self.attempts,
            "seed": self.seed,
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n")


def lower_bound_sample_size(k: int) -> int:
    return min(math.ceil(0.25 * k ** 1.5 * math.sqrt(math.log2(k))), pair_count(k))


def lower_bound_formula(k: int) -> float:
    """The certified floor k^{3/2} / (8 sqrt(log2 k))."""
    return k ** 1.5 / (8.0 * math.sqrt(math.log2(k)))


def build_lower_bound_graph(k: int, seed=None) -> LowerBoundCertificate:
    """Construct the hard digraph on C(k, 2) vertices with its certificate.

    Samples R of ceil(k^{3/2} sqrt(log2 k) / 4) vertices and resamples until
    every overlap satisfies |I_v| + 1 <= 2 log2 k (each attempt succeeds with
    probability > 1/2 for large k).  Edges: for every vertex {a, b} and every
    outside index i, exactly one of {a, i}, {b, i} becomes the target; when
    exactly one of them is sampled the unsampled one is chosen, otherwise the
    lexicographically smaller one.  Out-degree is therefore exactly k - 2,
    and every triangle carries a forward edge from each of its vertices.
    """
    if k < MIN_LOWER_BOUND_K:
        raise UnsupportedSizeError(
            f"construction needs k >= {MIN_LOWER_BOUND_K}, got {k}"
        )
    V = pair_count(k)
    ell = lower_bound_sample_size(k)
    overlap_cap = 2.0 * math.log2(k)  # accept when t_max + 1 <= this
    rng = np.random.default_rng(seed)
    pairs = all_pairs(k)
    a = pairs[:, 0][:, np.newaxis]
    b = pairs[:, 1][:, np.newaxis]
    idx = np.arange(k)[np.newaxis, :]
    valid = (idx != a) & (idx != b)
    # Vertex ids of the index-sharing candidates {a, i} and {b, i}, dummy 0 where i in v.
    wa = np.where(valid, pair_index(np.minimum(a, idx), np.maximum(a, idx), k), 0)
    wb = np.where(valid, pair_index(np.minimum(b, idx), np.maximum(b, idx), k), 0)

    t_max = None
    overlaps = None
    in_R = None
    for attempt in range(1, MAX_RESAMPLE_ATTEMPTS + 1):
        sampled = rng.choice(V, size=ell, replace=False)
        in_R = np.zeros(V, dtype=bool)
        in_R[sampled] = True
        both = in_R[wa] & in_R[wb] & valid
        overlaps = both.sum(axis=1)
        t_max = int(overlaps.max())
        if t_max + 1 <= overlap_cap:
            attempts = attempt
            break
    else:
        raise ResamplingLimitError(
            "overlap condition kept failing",
            MAX_RESAMPLE_ATTEMPTS,
            {"k": k, "ell": ell, "last_t_max": t_max, "cap": overlap_cap},
        )

    ra = in_R[wa] & valid
    rb = in_R[wb] & valid
    targets = np.where(ra & ~rb, wb, np.where(rb & ~ra, wa, np.minimum(wa, wb)))
    sources = np.broadcast_to(np.arange(V)[:, np.newaxis], targets.shape)
    graph = PairDigraph.from_edge_ids(k, sources[valid], targets[valid])
    sampled_sorted = np.flatnonzero(in_R)
    return LowerBoundCertificate(
        k=k,
        graph=graph,
        sampled_set=_pairs_from_ids(sampled_sorted, k),
        overlap_sizes=overlaps,
        t_max=t_max,
        implied_lower_bound=ell / (t_max + 1),
        attempts=attempts,
        seed=seed if isinstance(seed, int) else None,
    )


def verify_domination_lower_bound(cert: LowerBoundCertificate) -> float:
    """Recompute the certified floor from the graph itself.

    Counts, for every vertex, how many sampled elements it dominates
    (including itself when sampled); |R| divided by the maximum is a valid
    lower bound on the domination number of the graph, and is at least the
    certificate's implied bound.
    """
    G = cert.graph
    in_R = np.zeros(G.num_vertices, dtype=bool)
    sampled_ids = np.array([p.vertex_id(G.k) for p in cert.sampled_set])
    in_R[sampled_ids] = True
    max_dominated = 0
    for v in range(G.num_vertices):
        count = int(in_R[G.out_edges[v]].sum()) + int(in_R[v])
        if count > max_dominated:
            max_dominated = count
    bound = len(cert.sampled_set) / max_dominated
    if bound + 1e-9 < cert.implied_lower_bound:
        raise InvariantError(
            f"recomputed bound {bound} fell below the certificate's {cert.implied_lower_bound}"
        )
    return bound


def sylvester_hadamard(n: int) -> np.ndarray:
    """Integer Hadamard matrix of order n (n a power of two) by recursive doubling."""
    if n < 1 or n & (n - 1):
        raise UnsupportedSizeError(f"order must be a power of 2, got {n}")
    H = np.array([[1]], dtype=np.int64)
    block = np.array([[1, 1], [1, -1]], dtype=np.int64)
    while H.shape[0] < n:
        H = np.kron(block, H)
    return H


@dataclass(frozen=True, eq=False)
class FlatteningFamily:
    """Point masses alongside rescaled Hadamard columns on a power-of-two domain.

    point_mass_columns is the n x n identity; hadamard_columns has the
    uniform distribution first and, for j >= 2, the j-th Hadamard column with
    -1 -> 0 and +1 -> 2/n.  All 2n columns are distributions and every pair
    sits within l1 distance 2.
    """

    n: int
    hadamard_matrix: np.ndarray
    point_mass_columns: np.ndarray
    hadamard_columns: np.ndarray

    @property
    def num_distributions(self) -> int:
        return 2 * self.n


def build_flattening_family(n: int) -> FlatteningFamily:
    if n < 8 or n & (n - 1):
        raise UnsupportedSizeError(f"domain size must be a power of 2 and at least 8, got {n}")
    H = sylvester_hadamard(n)
    F = np.where(H > 0, 2.0 / n, 0.0)
    F[:, 0] = 1.0 / n
    col_sums = F.sum(axis=0)
    if not np.allclose(col_sums, 1.0, atol=1e-12):
        raise InvariantError("family columns failed to normalize")
    return FlatteningFamily(
        n=n,
        hadamard_matrix=H,
        point_mass_columns=np.eye(n),
        hadamard_columns=F,
    )


@dataclass(frozen=True, eq=False)
class StochasticMap:
    """Column-stochastic matrix: each column is a distribution over the image domain."""

    matrix: np.ndarray

    def __post_init__(self):
        M = np.asarray(self.matrix, dtype=float)
        if M.ndim != 2:
            raise InvariantError("stochastic map must be a matrix")
        if np.any(M < 0):
            raise InvariantError("stochastic map entries must be non-negative")
        sums = M.sum(axis=0)
        bad = np.abs(sums - 1.0) > 1e-9
        if bad.any():
            j = int(np.argmax(bad))
            raise InvariantError(f"column {j + 1} sums to {sums[j]!r}, not 1 within 1e-9")
        object.__setattr__(self, "matrix", M)
        self.matrix.flags.writeable = False

    @property
    def image_size(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def domain_size(self) -> int:
        return int(self.matrix.shape[1])


def verify_flattening_violation(
    phi_map: StochasticMap,
    fam: FlatteningFamily,
    alpha: float,
) -> tuple[int, float]:
    """Find the Hadamard-derived column a flat map collapses onto the uniform one.

    Flatness means every image of the 2n family columns has all its mass in
    [(1 - alpha)/m, (1 + alpha)/m]; the first column/entry breaking this is
    reported via FlatnessError.  For a flat map the minimizing column index
    i > 1 and min_i ||phi(f_i - f_1)||_1 are returned, and that value never
    exceeds 2/sqrt(n).
    """
    if not 0 < alpha < 1:
        raise ConfigError(f"alpha must lie in (0, 1), got {alpha}")
    n = fam.n
    if phi_map.domain_size != n:
        raise DimensionError(
            f"map has {phi_map.domain_size} columns, family domain size is {n}"
        )
    m = phi_map.image_size
    low = (1.0 - alpha) / m
    high = (1.0 + alpha) / m
    tol = 1e-12
    M = phi_map.matrix
    for group, images in (("E", M), ("F", M @ fam.hadamard_columns)):
        outside = (images < low - tol) | (images > high + tol)
        if outside.any():
            entry, column = np.unravel_index(int(np.argmax(outside)), images.shape)
            raise FlatnessError(
                group, column + 1, entry + 1, float(images[entry, column]), low, high
            )
    diffs = M @ (fam.hadamard_columns[:, 1:] - fam.hadamard_columns[:, :1])
    distances = np.abs(diffs).sum(axis=0)
    i0 = int(np.argmin(distances))
    value = float(distances[i0])
    bound = 2.0 / math.sqrt(n)
    if value > bound + 1e-9:
        raise InvariantError(
            f"flat map preserved distance {value} > {bound}; this contradicts the collapse bound"
        )
    return i0 + 2, value


def frobenius_identities(phi_map: StochasticMap, fam: FlatteningFamily) -> dict[str, float]:
    """Exact norm identities behind the collapse bound, for verification.

    Returns the deviation |  ||phi B||_F^2 - ||phi||_F^2 / n  | where B has
    columns (f_1, f_2 - f_1, ..., f_n - f_1), together with ||phi||_F^2 and
    its cap 4n/m implied by flat entries.
    """
    M = phi_map.matrix
    F = fam.hadamard_columns
    B = np.column_stack([F[:, :1], F[:, 1:] - F[:, :1]])
    lhs = float(np.linalg.norm(M @ B, "fro") ** 2)
    frob_sq = float(np.linalg.norm(M, "fro") ** 2)
    return {
        "identity_deviation": abs(lhs - frob_sq / fam.n),
        "frobenius_sq": frob_sq,
        "frobenius_cap": 4.0 * fam.n / phi_map.image_size,
    }


def random_flat_map(n: int, m: int, alpha: float, rng, max_tries: int = 100_000) -> StochasticMap:
    """Rejection-sample a flat stochastic map: entries in [0, 2/m], columns normalized.

    Each column is resampled until, after normalization, all entries stay in
    [(1 - alpha)/m, (1 + alpha)/m]; flatness on the whole family follows
    because every family column is a convex mixture of the point masses.
    """
    if not 0 < alpha < 1:
        raise ConfigError(f"alpha must lie in (0, 1), got {alpha}")
    rng = np.random.default_rng(rng)
    low = (1.0 - alpha) / m
    high = (1.0 + alpha) / m
    cols = np.empty((m, n))
    for j in range(n):
        for _ in range(max_tries):
            raw = rng.uniform(0.0, 2.0 / m, size=m)
            total = raw.sum()
            if total <= 0:
                continue
            col = raw / total
            if col.min() >= low and col.max() <= high:
                cols[:, j] = col
                break
        else:
            raise ResamplingLimitError("could not sample a flat column", max_tries)
    return StochasticMap(cols)


@dataclass(frozen=True)
class FlatteningReport:
    """Aggregate of a falsification run: no trial may beat the 2/sqrt(n) collapse."""

    n: int
    m: int
    trials: int
    alpha: float
    worst_min_distance: float
    bound: float
    max_frobenius_deviation: float

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "trials": self.trials,
            "alpha": self.alpha,
            "worst_min_distance": self.worst_min_distance,
            "bound": self.bound,
            "max_frobenius_deviation": self.max_frobenius_deviation,
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n")


def run_flattening_trials(
    n: int,
    m: int | None = None,
    trials: int = 1000,
    alpha: float = 0.99,
    seed=None,
) -> FlatteningReport:
    """Search for a counterexample among random flat maps (none can exist)."""
    if trials < 1:
        raise ConfigError(f"need at least one trial, got {trials}")
    m = n if m is None else int(m)
    if m < 2:
        raise ConfigError(f"image domain must have at least 2 points, got {m}")
    fam = build_flattening_family(n)
    rng = np.random.default_rng(seed)
    worst = 0.0
    max_dev = 0.0
    for _ in range(trials):
        phi_map = random_flat_map(n, m, alpha, rng)
        _, value = verify_flattening_violation(phi_map, fam, alpha)
        worst = max(worst, value)
        max_dev = max(max_dev, frobenius_identities(phi_map, fam)["identity_deviation"])
    return FlatteningReport(
        n=n,
        m=m,
        trials=trials,
        alpha=alpha,
        worst_min_distance=worst,
        bound=2.0 / math.sqrt(n),
        max_frobenius_deviation=max_dev,
    )
