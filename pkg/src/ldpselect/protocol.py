"""One-round locally private estimation of ±1 query means.

Each user holds one sample x from an unknown distribution p, is assigned a
single query T in advance, and releases exactly one randomized bit
RR_eps(T(x)).  The curator averages each block and multiplies by the bias
correction (e^eps + 1)/(e^eps - 1), giving an unbiased estimate of <p, T>
per query.  No step reads another user's data, and no query assignment
depends on any released message.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .distributions import DiscreteDistribution, SignedFunctional
from .errors import (
    ConfigError,
    DimensionError,
    InsufficientSamplesError,
    InvariantError,
)


def correction_factor(epsilon: float) -> float:
    """Bias correction (e^eps + 1)/(e^eps - 1) for randomized response."""
    if epsilon <= 0:
        raise ConfigError(f"epsilon must be positive, got {epsilon}")
    return (math.exp(epsilon) + 1.0) / (math.exp(epsilon) - 1.0)


def keep_probability(epsilon: float) -> float:
    if epsilon <= 0:
        raise ConfigError(f"epsilon must be positive, got {epsilon}")
    return math.exp(epsilon) / (math.exp(epsilon) + 1.0)


@dataclass(frozen=True)
class PrivacyParams:
    """Privacy budget and per-query accuracy targets.

    The variance analysis is tightest for epsilon in (0, 1); larger budgets
    are accepted (the mechanism and correction stay exact) with a warning.
    """

    epsilon: float
    alpha_query: float
    beta: float

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ConfigError(f"epsilon must be positive, got {self.epsilon}")
        if not 0 < self.alpha_query <= 2:
            raise ConfigError(f"alpha_query must lie in (0, 2], got {self.alpha_query}")
        if not 0 < self.beta < 1:
            raise ConfigError(f"beta must lie in (0, 1), got {self.beta}")
        if self.epsilon >= 1:
            warnings.warn(
                f"epsilon = {self.epsilon} >= 1: sample-size formulas stay exact but the "
                "1/eps^2 scaling regime assumes epsilon < 1",
                RuntimeWarning,
                stacklevel=2,
            )


def randomized_response(bit, epsilon: float, rng: np.random.Generator):
    """Return the input bit with probability e^eps/(e^eps + 1), its negation otherwise.

    Accepts a scalar ±1 or an array of ±1; flips are independent across
    entries and across calls.
    """
    keep = keep_probability(epsilon)
    arr = np.asarray(bit)
    if not np.all(np.abs(arr) == 1):
        raise ConfigError("randomized response expects bits in {-1, +1}")
    if arr.ndim == 0:
        return int(arr) if rng.random() < keep else -int(arr)
    flips = rng.random(arr.shape) >= keep
    return np.where(flips, -arr, arr).astype(np.int8)


def channel_matrix(epsilon: float) -> np.ndarray:
    """2x2 transition matrix of the channel; rows = outputs (-1, +1), cols = inputs."""
    keep = keep_probability(epsilon)
    flip = 1.0 - keep
    return np.array([[keep, flip], [flip, keep]])


def channel_privacy_ratio(epsilon: float) -> float:
    """Worst-case output-probability ratio over all input pairs, by enumeration.

    Equals e^eps exactly, certifying the channel is eps-private and no tighter.
    """
    M = channel_matrix(epsilon)
    worst = 0.0
    for y in range(2):
        for x in range(2):
            for x2 in range(2):
                if x != x2:
                    worst = max(worst, M[y, x] / M[y, x2])
    return worst


def required_block_size(num_queries: int, alpha_query: float, beta: float, epsilon: float) -> int:
    """Users needed per query so all estimates are alpha-accurate w.p. >= 1 - beta.

    Two-sided Hoeffding bound for means of i.i.d. variables in [-c, c] with
    c = (e^eps + 1)/(e^eps - 1), union-bounded over the queries:
        l = ceil(2 c^2 ln(2 |T| / beta) / alpha^2).
    """
    if num_queries < 1:
        raise ConfigError(f"need at least one query, got {num_queries}")
    if not 0 < alpha_query <= 2:
        raise ConfigError(f"alpha_query must lie in (0, 2], got {alpha_query}")
    if not 0 < beta < 1:
        raise ConfigError(f"beta must lie in (0, 1), got {beta}")
    c = correction_factor(epsilon)
    return math.ceil(2.0 * c * c * math.log(2.0 * num_queries / beta) / (alpha_query ** 2))


@dataclass(frozen=True, eq=False)
class SimulatedPopulation:
    """Users holding i.i.d. samples from a distribution only the simulator sees."""

    true_distribution: DiscreteDistribution
    samples: np.ndarray  # one domain point (1-based) per user

    def __post_init__(self):
        samples = np.asarray(self.samples)
        if samples.ndim != 1:
            raise InvariantError("samples must form a one-dimensional array")
        d = self.true_distribution.domain_size
        if samples.size and (samples.min() < 1 or samples.max() > d):
            raise InvariantError(f"samples must lie in 1..{d}")
        object.__setattr__(self, "samples", samples.astype(np.int64))
        self.samples.flags.writeable = False

    @property
    def user_count(self) -> int:
        return int(self.samples.size)

    @classmethod
    def draw(cls, dist: DiscreteDistribution, n: int, rng) -> "SimulatedPopulation":
        rng = np.random.default_rng(rng)
        samples = rng.choice(dist.domain_size, size=int(n), p=dist.probs) + 1
        return cls(dist, samples)


@dataclass(frozen=True, eq=False)
class LdpTranscript:
    """One record per participating user: (user id, assigned query, released bit).

    User ids are the positions 0..n-1; surplus users that fit no full block
    are never assigned and never release anything.
    """

    query_index: np.ndarray
    messages: np.ndarray
    block_size: int
    num_queries: int

    @property
    def user_count(self) -> int:
        return int(self.messages.size)

    @property
    def user_ids(self) -> np.ndarray:
        return np.arange(self.user_count)

    def validate(self) -> None:
        if self.query_index.shape != self.messages.shape:
            raise InvariantError("transcript arrays disagree in length")
        if self.user_count != self.block_size * self.num_queries:
            raise InvariantError("transcript does not consist of full equal blocks")
        if not np.all(np.abs(self.messages) == 1):
            raise InvariantError("released messages must be single bits in {-1, +1}")
        expected = np.arange(self.user_count) // self.block_size
        if not np.array_equal(self.query_index, expected):
            raise InvariantError("query assignment is not the fixed contiguous-block map")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["user_id", "query_index", "message"])
            for uid, qi, m in zip(self.user_ids, self.query_index, self.messages):
                writer.writerow([int(uid), int(qi), int(m)])

    @classmethod
    def from_csv(cls, path) -> "LdpTranscript":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if header != ["user_id", "query_index", "message"]:
                raise InvariantError(f"unexpected transcript header {header}")
            rows = [(int(q), int(m)) for _, q, m in reader]
        qi = np.array([r[0] for r in rows], dtype=np.int64)
        msg = np.array([r[1] for r in rows], dtype=np.int8)
        num_queries = int(qi.max()) + 1 if qi.size else 0
        block = qi.size // num_queries if num_queries else 0
        return cls(qi, msg, block, num_queries)


@dataclass(frozen=True, eq=False)
class QueryEstimates:
    """Bias-corrected block means, one per query index."""

    estimates: dict[int, float]
    block_size: int
    epsilon: float

    def __post_init__(self):
        c = correction_factor(self.epsilon)
        for idx, value in self.estimates.items():
            if abs(value) > c + 1e-12:
                raise InvariantError(
                    f"estimate {value!r} for query {idx} outside the corrected range ±{c}"
                )

    def to_json_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "block_size": self.block_size,
            "estimates": {str(i): float(v) for i, v in sorted(self.estimates.items())},
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path) -> "QueryEstimates":
        doc = json.loads(Path(path).read_text())
        return cls(
            estimates={int(i): float(v) for i, v in doc["estimates"].items()},
            block_size=int(doc["block_size"]),
            epsilon=float(doc["epsilon"]),
        )


def run_protocol(
    pop: SimulatedPopulation,
    queries,
    params: PrivacyParams,
    rng,
) -> tuple[LdpTranscript, QueryEstimates]:
    """Run the one-round protocol for a fixed query list.

    Users are split into len(queries) contiguous blocks of floor(n/|T|) in the
    given enumeration order; surplus users are dropped so every estimate has
    identical variance.  User i with sample x releases RR_eps(T_{pi(i)}(x));
    the estimate for T is the corrected block mean.  Raw samples appear
    nowhere in the outputs.
    """
    queries = list(queries)
    if not queries:
        raise ConfigError("query list must be non-empty")
    n = pop.user_count
    m = len(queries)
    if n < m:
        raise InsufficientSamplesError(n, m)
    d = pop.true_distribution.domain_size
    for t in queries:
        if len(t) != d:
            raise DimensionError(f"query length {len(t)} does not match domain size {d}")
    rng = np.random.default_rng(rng)
    block = n // m
    used = block * m
    tests = np.stack([t.signs for t in queries])  # m x d
    assignment = np.arange(used) // block
    true_bits = tests[assignment, pop.samples[:used] - 1]
    messages = randomized_response(true_bits, params.epsilon, rng)
    transcript = LdpTranscript(
        query_index=assignment,
        messages=messages,
        block_size=block,
        num_queries=m,
    )
    transcript.validate()
    c = correction_factor(params.epsilon)
    block_sums = messages.astype(np.float64).reshape(m, block).sum(axis=1)
    estimates = {i: float(c * s / block) for i, s in enumerate(block_sums)}
    return transcript, QueryEstimates(estimates=estimates, block_size=block, epsilon=params.epsilon)
