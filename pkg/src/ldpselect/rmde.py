"""Relaxed minimum distance estimation and the end-to-end selection pipeline.

Given estimates p_hat_T of <p, T> for a family of ±1 queries that can
phi-compare every pair of hypotheses, the selected hypothesis

    argmin_q  max_T |<q, T> - p_hat_T|

is within (1 + 2/phi) * OPT plus 2/phi times the worst estimation error over
the family, deterministically.  The pipeline builds the comparison graph at
phi = 1/6, extracts a dominating set, queries its Scheffe sets through the
one-round private protocol, and selects; the factor is then 13 = 1 + 2*6.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .distributions import HypothesisSet, SignedFunctional, signed_scheffe_set
from .errors import (
    ConfigError,
    IncompleteEstimatesError,
    InsufficientSamplesError,
    InvalidCertificateError,
)
from .protocol import PrivacyParams, QueryEstimates, SimulatedPopulation, required_block_size, run_protocol
from .scheffe_graph import (
    PHI_DEFAULT,
    DominatingSetCertificate,
    ScheffeGraph,
    VertexPair,
    build_scheffe_graph,
    find_dominating_set,
    pair_count,
    verify_domination,
)


@dataclass(frozen=True, eq=False)
class QueryFamily:
    """Deduplicated ±1 tests with the pair each one came from.

    The family certifies: for every pair of hypotheses, some test recovers a
    phi-fraction of their l1 distance (condition checkable exhaustively via
    star_margins).
    """

    tests: tuple[SignedFunctional, ...]
    origins: tuple[VertexPair, ...]
    phi: float

    def __post_init__(self):
        if not self.tests:
            raise ConfigError("query family must contain at least one test")
        if len(self.tests) != len(self.origins):
            raise ConfigError("one origin pair per test required")
        if not 0 < self.phi <= 1:
            raise ConfigError(f"phi must lie in (0, 1], got {self.phi}")
        seen = set()
        for t in self.tests:
            key = t.key()
            if key in seen:
                raise ConfigError("duplicate tests must be pruned before constructing the family")
            seen.add(key)

    def __len__(self) -> int:
        return len(self.tests)

    def test_matrix(self) -> np.ndarray:
        return np.stack([t.signs for t in self.tests]).astype(np.float64)

    def star_margins(self, Q: HypothesisSet, phi: float | None = None) -> np.ndarray:
        """Per-hypothesis-pair slack of the comparison condition.

        Entry for pair (j, j') is max_T |<q_j - q_j', T>| - phi * ||q_j - q_j'||_1;
        the family certifies phi-comparisons exactly when all entries are >= 0
        (up to float noise).
        """
        phi = self.phi if phi is None else phi
        P = Q.probs_matrix
        T = self.test_matrix()
        margins = []
        for j in range(Q.k):
            for j2 in range(j + 1, Q.k):
                delta = P[j] - P[j2]
                best = float(np.abs(T @ delta).max())
                margins.append(best - phi * float(np.abs(delta).sum()))
        return np.array(margins)

    def certifies(self, Q: HypothesisSet, phi: float | None = None, tol: float = 1e-9) -> bool:
        return bool((self.star_margins(Q, phi) >= -tol).all())


@dataclass(frozen=True)
class SelectionConfig:
    """Targets for one end-to-end selection run."""

    alpha: float
    beta: float
    epsilon: float
    phi: float = PHI_DEFAULT
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.alpha <= 2:
            raise ConfigError(f"alpha must lie in (0, 2], got {self.alpha}")
        if not 0 < self.beta < 1:
            raise ConfigError(f"beta must lie in (0, 1), got {self.beta}")
        if self.epsilon <= 0:
            raise ConfigError(f"epsilon must be positive, got {self.epsilon}")
        if not 0 < self.phi <= 1:
            raise ConfigError(f"phi must lie in (0, 1], got {self.phi}")

    @property
    def approximation_factor(self) -> float:
        return 1.0 + 2.0 / self.phi


@dataclass(frozen=True, eq=False)
class SelectionReport:
    """Outcome of a selection: chosen hypothesis and the full discrepancy profile."""

    selected_index: int  # 1-based; smallest index attaining the minimum
    selected_discrepancy: float
    discrepancies: tuple[float, ...]
    family_size: int
    users_consumed: int
    certificate: DominatingSetCertificate | None = None

    def to_json_dict(self) -> dict:
        return {
            "selected_index": self.selected_index,
            "selected_discrepancy": self.selected_discrepancy,
            "discrepancies": list(self.discrepancies),
            "family_size": self.family_size,
            "users_consumed": self.users_consumed,
            "dominating_set_size": (
                len(self.certificate.dominating_set) if self.certificate else None
            ),
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n")


def full_scheffe_family(Q: HypothesisSet) -> QueryFamily:
    """All C(k, 2) pairwise Scheffe sets, deduplicated: the classical family at phi = 1."""
    tests: list[SignedFunctional] = []
    origins: list[VertexPair] = []
    seen: set[bytes] = set()
    for j in range(Q.k):
        for j2 in range(j + 1, Q.k):
            t = signed_scheffe_set(Q.hypotheses[j], Q.hypotheses[j2])
            key = t.key()
            if key not in seen:
                seen.add(key)
                tests.append(t)
                origins.append(VertexPair(j + 1, j2 + 1))
    return QueryFamily(tests=tuple(tests), origins=tuple(origins), phi=1.0)


def query_family_from_dominating_set(
    Q: HypothesisSet,
    cert: DominatingSetCertificate,
    phi: float = PHI_DEFAULT,
    graph: ScheffeGraph | None = None,
) -> QueryFamily:
    """Signed Scheffe sets of the dominating pairs, deduplicated.

    The certificate is re-verified against the comparison graph of Q at phi
    before use; a set that dominates that graph automatically yields a family
    satisfying the phi-comparison condition for every hypothesis pair.
    """
    if graph is None:
        graph = build_scheffe_graph(Q, phi)
    if graph.k != Q.k:
        raise InvalidCertificateError(f"graph is on k={graph.k}, hypothesis set has k={Q.k}")
    if not verify_domination(graph, cert.dominating_set):
        raise InvalidCertificateError("certificate set does not dominate the comparison graph")
    tests: list[SignedFunctional] = []
    origins: list[VertexPair] = []
    seen: set[bytes] = set()
    for pair in cert.dominating_set:
        t = signed_scheffe_set(Q.hypotheses[pair.lo - 1], Q.hypotheses[pair.hi - 1])
        key = t.key()
        if key not in seen:
            seen.add(key)
            tests.append(t)
            origins.append(pair)
    return QueryFamily(tests=tuple(tests), origins=tuple(origins), phi=phi)


def rmde_select(Q: HypothesisSet, family: QueryFamily, estimates: QueryEstimates) -> SelectionReport:
    """Pick the hypothesis whose query values sit closest to the estimates.

    Discrepancy of q is max over tests of |<q, T> - p_hat_T|; ties break to
    the smallest hypothesis index.  Deterministic in its inputs.
    """
    m = len(family)
    missing = [i for i in range(m) if i not in estimates.estimates]
    if missing:
        raise IncompleteEstimatesError(f"estimates missing for query indices {missing}")
    T = family.test_matrix()
    if T.shape[1] != Q.domain_size:
        raise ConfigError(
            f"family is on domain size {T.shape[1]}, hypotheses on {Q.domain_size}"
        )
    p_hat = np.array([estimates.estimates[i] for i in range(m)])
    values = Q.probs_matrix @ T.T  # k x m, entries <q, T>
    disc = np.abs(values - p_hat[np.newaxis, :]).max(axis=1)
    best = int(np.argmin(disc))  # first occurrence = smallest index
    return SelectionReport(
        selected_index=best + 1,
        selected_discrepancy=float(disc[best]),
        discrepancies=tuple(float(x) for x in disc),
        family_size=m,
        users_consumed=estimates.block_size * m,
    )


def max_query_budget(k: int) -> int:
    """Worst-case family size the plan must provision: ceil(4 k^1.5 sqrt(log2 k)), capped at C(k,2)."""
    if k < 2:
        raise ConfigError(f"need k >= 2, got {k}")
    return min(math.ceil(4.0 * k ** 1.5 * math.sqrt(math.log2(k))), pair_count(k))


def plan_sample_size(k: int, config: SelectionConfig) -> int:
    """Users sufficient for the full pipeline at the config's targets.

    Per-query accuracy is set to phi*alpha/2 so the selection error term
    collapses to exactly alpha; the failure budget is split evenly between
    estimation and sampling diagnostics.
    """
    budget = max_query_budget(k)
    block = required_block_size(
        num_queries=budget,
        alpha_query=config.phi * config.alpha / 2.0,
        beta=config.beta / 2.0,
        epsilon=config.epsilon,
    )
    return budget * block


def select_hypothesis(
    Q: HypothesisSet,
    pop: SimulatedPopulation,
    config: SelectionConfig,
) -> SelectionReport:
    """Full non-interactive pipeline: graph, dominating set, protocol, selection.

    All queries are fixed before any user message is drawn.  With
    pop.user_count >= plan_sample_size(k, config) the selected hypothesis
    satisfies  ||q_hat - p||_1 <= (1 + 2/phi) * OPT + alpha  with probability
    at least 1 - beta over the protocol randomness (factor 13 at phi = 1/6).
    """
    n0 = plan_sample_size(Q.k, config)
    if pop.user_count < n0:
        raise InsufficientSamplesError(pop.user_count, n0)
    seed_seq = np.random.SeedSequence(config.seed)
    dom_seed, proto_seed = seed_seq.spawn(2)
    graph = build_scheffe_graph(Q, config.phi)
    cert = find_dominating_set(graph, Q, seed=dom_seed)
    family = query_family_from_dominating_set(Q, cert, config.phi, graph=graph)
    params = PrivacyParams(
        epsilon=config.epsilon,
        alpha_query=config.phi * config.alpha / 2.0,
        beta=config.beta / 2.0,
    )
    _, estimates = run_protocol(pop, family.tests, params, np.random.default_rng(proto_seed))
    report = rmde_select(Q, family, estimates)
    return replace(report, certificate=cert)
