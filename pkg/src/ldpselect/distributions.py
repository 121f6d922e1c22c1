"""Finite discrete distributions and the ±1 functionals used to compare them.

Distributions live on the domain {1, ..., d} and are stored as dense
probability vectors.  The central identity: for any q, q' with difference
delta = q - q' and signed Scheffe set S = sgn(delta), the inner product
<delta, S> equals the l1 distance between q and q', and no other ±1 vector
achieves more.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import ConfigError, DimensionError, InvariantError

SUM_TOLERANCE = 1e-9

GENERATOR_MODELS = ("dirichlet-uniform", "sparse", "point-mass-mixture")


def _read_only(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class DiscreteDistribution:
    """Probability vector over the finite domain {1, ..., d}."""

    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if probs.ndim != 1 or probs.size == 0:
            raise InvariantError("probability vector must be one-dimensional and non-empty")
        if np.any(probs < 0.0):
            x = int(np.argmax(probs < 0.0))
            raise InvariantError(f"negative mass {probs[x]!r} at coordinate {x + 1}")
        total = float(probs.sum())
        if abs(total - 1.0) > SUM_TOLERANCE:
            raise InvariantError(f"masses sum to {total!r}, not 1 within {SUM_TOLERANCE}")
        object.__setattr__(self, "probs", _read_only(probs))

    @property
    def domain_size(self) -> int:
        return int(self.probs.size)

    @classmethod
    def renormalized(cls, weights) -> "DiscreteDistribution":
        """Build a distribution from non-negative weights, scaling them to sum 1.

        Renormalization never happens implicitly; this constructor is the one
        explicit path for it.
        """
        w = np.asarray(weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise InvariantError("weight vector must be one-dimensional and non-empty")
        if np.any(w < 0.0):
            x = int(np.argmax(w < 0.0))
            raise InvariantError(f"negative weight {w[x]!r} at coordinate {x + 1}")
        total = float(w.sum())
        if total <= 0.0:
            raise InvariantError("weights sum to zero; cannot renormalize")
        return cls(w / total)

    @classmethod
    def point_mass(cls, x: int, d: int) -> "DiscreteDistribution":
        """Unit mass on domain point x (1-based) of a size-d domain."""
        if not 1 <= x <= d:
            raise ConfigError(f"point {x} outside domain 1..{d}")
        probs = np.zeros(d)
        probs[x - 1] = 1.0
        return cls(probs)

    @classmethod
    def uniform(cls, d: int) -> "DiscreteDistribution":
        if d < 1:
            raise ConfigError("domain size must be at least 1")
        return cls(np.full(d, 1.0 / d))


@dataclass(frozen=True, eq=False)
class SignedFunctional:
    """A vector with every entry in {-1, +1}; the query objects of the protocol."""

    signs: np.ndarray

    def __post_init__(self):
        signs = np.asarray(self.signs)
        if signs.ndim != 1 or signs.size == 0:
            raise InvariantError("sign vector must be one-dimensional and non-empty")
        if not np.all(np.abs(signs) == 1):
            x = int(np.argmax(np.abs(signs) != 1))
            raise InvariantError(f"entry {signs[x]!r} at coordinate {x + 1} is not -1 or +1")
        object.__setattr__(self, "signs", _read_only(signs.astype(np.int8)))

    def __len__(self) -> int:
        return int(self.signs.size)

    def key(self) -> bytes:
        """Canonical byte string, used for pruning duplicate tests."""
        return self.signs.tobytes()

    def negated(self) -> "SignedFunctional":
        return SignedFunctional(-self.signs)


@dataclass(frozen=True, eq=False)
class DifferenceFunctional:
    """Signed mass difference of two distributions on a shared domain."""

    deltas: np.ndarray

    def __post_init__(self):
        deltas = np.asarray(self.deltas, dtype=float)
        if deltas.ndim != 1 or deltas.size == 0:
            raise InvariantError("difference vector must be one-dimensional and non-empty")
        total = float(deltas.sum())
        if abs(total) > SUM_TOLERANCE:
            raise InvariantError(f"difference entries sum to {total!r}, not 0 within {SUM_TOLERANCE}")
        object.__setattr__(self, "deltas", _read_only(deltas))

    def __len__(self) -> int:
        return int(self.deltas.size)

    def l1_norm(self) -> float:
        return float(np.abs(self.deltas).sum())


@dataclass(frozen=True, eq=False)
class HypothesisSet:
    """Ordered collection of k candidate distributions on one shared domain."""

    hypotheses: tuple[DiscreteDistribution, ...]

    def __post_init__(self):
        hyps = tuple(self.hypotheses)
        if len(hyps) < 2:
            raise InvariantError(f"need at least 2 hypotheses, got {len(hyps)}")
        d = hyps[0].domain_size
        for row, h in enumerate(hyps, start=1):
            if h.domain_size != d:
                raise InvariantError(
                    f"hypothesis {row} has domain size {h.domain_size}, expected {d}"
                )
        object.__setattr__(self, "hypotheses", hyps)

    @property
    def k(self) -> int:
        return len(self.hypotheses)

    @property
    def domain_size(self) -> int:
        return self.hypotheses[0].domain_size

    @cached_property
    def probs_matrix(self) -> np.ndarray:
        """k x d matrix whose rows are the hypothesis mass functions."""
        return _read_only(np.stack([h.probs for h in self.hypotheses]))

    def to_json_dict(self) -> dict:
        return {
            "domain_size": self.domain_size,
            "hypotheses": [[float(p) for p in h.probs] for h in self.hypotheses],
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "HypothesisSet":
        try:
            d = int(doc["domain_size"])
            rows = doc["hypotheses"]
        except (KeyError, TypeError) as exc:
            raise InvariantError(f"hypothesis-set document missing field: {exc}") from exc
        hyps = []
        for row, probs in enumerate(rows, start=1):
            if len(probs) != d:
                raise InvariantError(
                    f"hypothesis {row}: length {len(probs)} does not match domain_size {d}"
                )
            try:
                hyps.append(DiscreteDistribution(np.asarray(probs, dtype=float)))
            except InvariantError as exc:
                raise InvariantError(f"hypothesis {row}: {exc}") from exc
        return cls(tuple(hyps))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path) -> "HypothesisSet":
        return cls.from_json_dict(json.loads(Path(path).read_text()))


def _vector_of(f) -> np.ndarray:
    if isinstance(f, DifferenceFunctional):
        return f.deltas
    if isinstance(f, DiscreteDistribution):
        return f.probs
    raise TypeError(f"expected DifferenceFunctional or DiscreteDistribution, got {type(f)!r}")


def difference(q: DiscreteDistribution, q2: DiscreteDistribution) -> DifferenceFunctional:
    """Componentwise mass difference q - q2."""
    if q.domain_size != q2.domain_size:
        raise DimensionError(f"domain sizes differ: {q.domain_size} vs {q2.domain_size}")
    return DifferenceFunctional(q.probs - q2.probs)


def signed_scheffe_set(q: DiscreteDistribution, q2: DiscreteDistribution) -> SignedFunctional:
    """Sign vector of q - q2; ties (equal mass) resolve to +1."""
    if q.domain_size != q2.domain_size:
        raise DimensionError(f"domain sizes differ: {q.domain_size} vs {q2.domain_size}")
    return SignedFunctional(np.where(q.probs >= q2.probs, 1, -1))


def inner(f, t: SignedFunctional) -> float:
    """Inner product of a difference functional or distribution with a ±1 vector."""
    vec = _vector_of(f)
    if vec.size != t.signs.size:
        raise DimensionError(f"lengths differ: {vec.size} vs {t.signs.size}")
    return float(vec @ t.signs)


def l1_distance(q: DiscreteDistribution, q2: DiscreteDistribution) -> float:
    """Sum of |q(x) - q2(x)| over the domain (twice the total variation)."""
    if q.domain_size != q2.domain_size:
        raise DimensionError(f"domain sizes differ: {q.domain_size} vs {q2.domain_size}")
    return float(np.abs(q.probs - q2.probs).sum())


def mixture(components, weights) -> DiscreteDistribution:
    """Convex combination of distributions on one shared domain."""
    comps = list(components)
    w = np.asarray(weights, dtype=float)
    if len(comps) != w.size or len(comps) == 0:
        raise ConfigError("need one weight per component")
    if np.any(w < 0) or abs(float(w.sum()) - 1.0) > SUM_TOLERANCE:
        raise ConfigError("mixture weights must be non-negative and sum to 1")
    d = comps[0].domain_size
    for c in comps:
        if c.domain_size != d:
            raise DimensionError("mixture components live on different domains")
    probs = np.zeros(d)
    for c, wi in zip(comps, w):
        probs += wi * c.probs
    return DiscreteDistribution(probs)


def random_hypothesis_set(k: int, d: int, seed, model: str = "dirichlet-uniform") -> HypothesisSet:
    """Draw k random distributions on {1, ..., d}, deterministic in the seed.

    Models:
      dirichlet-uniform  rows drawn from the flat Dirichlet on the simplex
      sparse             each row supported on a small random subset
      point-mass-mixture each row a two-point mixture lam*e_a + (1-lam)*e_b
    """
    if k < 2:
        raise ConfigError(f"need k >= 2, got {k}")
    if d < 2:
        raise ConfigError(f"need d >= 2, got {d}")
    if model not in GENERATOR_MODELS:
        raise ConfigError(f"unknown model {model!r}; choose one of {GENERATOR_MODELS}")
    rng = np.random.default_rng(seed)
    rows = []
    if model == "dirichlet-uniform":
        for probs in rng.dirichlet(np.ones(d), size=k):
            rows.append(DiscreteDistribution(probs))
    elif model == "sparse":
        max_support = max(2, d // 4)
        for _ in range(k):
            s = int(rng.integers(1, max_support + 1))
            support = rng.choice(d, size=s, replace=False)
            probs = np.zeros(d)
            probs[support] = rng.dirichlet(np.ones(s))
            rows.append(DiscreteDistribution(probs))
    else:  # point-mass-mixture
        for _ in range(k):
            a, b = rng.choice(d, size=2, replace=False)
            lam = float(rng.uniform())
            probs = np.zeros(d)
            probs[a] = lam
            probs[b] += 1.0 - lam
            rows.append(DiscreteDistribution(probs))
    return HypothesisSet(tuple(rows))
