import itertools
import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ldpselect import (
    DifferenceFunctional,
    DiscreteDistribution,
    HypothesisSet,
    SignedFunctional,
    difference,
    inner,
    l1_distance,
    mixture,
    random_hypothesis_set,
    signed_scheffe_set,
)
from ldpselect.errors import ConfigError, DimensionError, InvariantError


def dist(*probs) -> DiscreteDistribution:
    return DiscreteDistribution(np.array(probs, dtype=float))


@st.composite
def distributions(draw, d=None):
    if d is None:
        d = draw(st.integers(min_value=2, max_value=8))
    weights = draw(
        st.lists(st.floats(0.0, 1.0, allow_nan=False), min_size=d, max_size=d).filter(
            lambda w: sum(w) > 1e-6
        )
    )
    return DiscreteDistribution.renormalized(np.array(weights))


@st.composite
def distribution_pairs(draw):
    d = draw(st.integers(min_value=2, max_value=8))
    return draw(distributions(d=d)), draw(distributions(d=d))


class TestDiscreteDistribution:
    def test_valid(self):
        q = dist(0.25, 0.75)
        assert q.domain_size == 2

    def test_rejects_negative(self):
        with pytest.raises(InvariantError, match="coordinate 2"):
            dist(1.1, -0.1)

    def test_rejects_bad_sum(self):
        with pytest.raises(InvariantError, match="sum to"):
            dist(0.5, 0.4)

    def test_sum_tolerance(self):
        q = dist(0.5, 0.5 + 5e-10)
        assert q.domain_size == 2

    def test_no_silent_renormalization(self):
        with pytest.raises(InvariantError):
            dist(0.5, 1.5)
        q = DiscreteDistribution.renormalized(np.array([0.5, 1.5]))
        assert np.allclose(q.probs, [0.25, 0.75])

    def test_immutable(self):
        q = dist(0.5, 0.5)
        with pytest.raises(ValueError):
            q.probs[0] = 1.0


class TestSignedFunctional:
    def test_rejects_non_sign_entries(self):
        with pytest.raises(InvariantError, match="coordinate 2"):
            SignedFunctional(np.array([1, 0, -1]))

    def test_key_distinguishes(self):
        a = SignedFunctional(np.array([1, -1]))
        b = SignedFunctional(np.array([-1, 1]))
        assert a.key() != b.key()
        assert a.key() == a.negated().negated().key()


class TestDifferenceFunctional:
    def test_rejects_nonzero_sum(self):
        with pytest.raises(InvariantError):
            DifferenceFunctional(np.array([0.5, -0.3]))


class TestOperations:
    def test_difference_point_masses(self):
        assert np.array_equal(difference(dist(1, 0), dist(0, 1)).deltas, [1.0, -1.0])

    def test_difference_identity(self):
        assert np.array_equal(difference(dist(0.5, 0.5), dist(0.5, 0.5)).deltas, [0.0, 0.0])

    def test_difference_general(self):
        d = difference(dist(0.7, 0.2, 0.1), dist(0.1, 0.3, 0.6))
        assert np.allclose(d.deltas, [0.6, -0.1, -0.5], atol=1e-12)

    def test_difference_dimension_error(self):
        with pytest.raises(DimensionError):
            difference(dist(1, 0), dist(1, 0, 0))

    def test_scheffe_tie_is_plus_one(self):
        assert np.array_equal(signed_scheffe_set(dist(0.5, 0.5), dist(0.5, 0.5)).signs, [1, 1])

    def test_scheffe_point_masses(self):
        assert np.array_equal(signed_scheffe_set(dist(1, 0), dist(0, 1)).signs, [1, -1])

    def test_scheffe_with_tied_third_coordinate(self):
        s = signed_scheffe_set(dist(1, 0, 0), dist(0, 1, 0))
        assert np.array_equal(s.signs, [1, -1, 1])

    def test_inner_examples(self):
        f = DifferenceFunctional(np.array([1.0, -1.0]))
        assert inner(f, SignedFunctional(np.array([1, -1]))) == 2.0
        zero = DifferenceFunctional(np.array([0.0, 0.0]))
        assert inner(zero, SignedFunctional(np.array([-1, 1]))) == 0.0
        f3 = DifferenceFunctional(np.array([0.6, -0.1, -0.5]))
        assert inner(f3, SignedFunctional(np.array([1, -1, -1]))) == pytest.approx(1.2, abs=1e-12)

    def test_inner_accepts_distributions(self):
        val = inner(dist(0.25, 0.75), SignedFunctional(np.array([1, -1])))
        assert val == pytest.approx(-0.5)

    def test_inner_dimension_error(self):
        with pytest.raises(DimensionError):
            inner(dist(1, 0), SignedFunctional(np.array([1, 1, 1])))

    def test_l1_examples(self):
        assert l1_distance(dist(1, 0), dist(0, 1)) == 2.0
        q = dist(0.3, 0.3, 0.4)
        assert l1_distance(q, q) == 0.0
        assert l1_distance(dist(0.7, 0.2, 0.1), dist(0.1, 0.3, 0.6)) == pytest.approx(1.2)

    def test_mixture(self):
        m = mixture([dist(1, 0), dist(0, 1)], [0.25, 0.75])
        assert np.allclose(m.probs, [0.25, 0.75])


@given(distribution_pairs())
def test_scheffe_identity(pair):
    """<q - q', sgn(q - q')> recovers the l1 distance exactly."""
    q, q2 = pair
    lhs = inner(difference(q, q2), signed_scheffe_set(q, q2))
    assert lhs == pytest.approx(l1_distance(q, q2), abs=1e-9)


@given(distribution_pairs())
def test_scheffe_set_is_the_supremum(pair):
    q, q2 = pair
    delta = difference(q, q2).deltas
    d = delta.size
    signs = ((np.arange(2 ** d)[:, None] >> np.arange(d)) & 1) * 2 - 1
    sup = np.abs(signs @ delta).max()
    assert sup <= l1_distance(q, q2) + 1e-12
    assert sup == pytest.approx(l1_distance(q, q2), abs=1e-9)


@given(distribution_pairs())
def test_scheffe_antisymmetry(pair):
    q, q2 = pair
    fwd = signed_scheffe_set(q, q2).signs
    rev = signed_scheffe_set(q2, q).signs
    differs = q.probs != q2.probs
    assert np.array_equal(fwd[differs], -rev[differs])


@given(distributions(), st.integers(min_value=0, max_value=2 ** 16 - 1))
def test_inner_with_distribution_bounded(q, pattern):
    bits = (pattern >> np.arange(q.domain_size)) & 1
    t = SignedFunctional(bits * 2 - 1)
    assert -1.0 - 1e-12 <= inner(q, t) <= 1.0 + 1e-12


class TestHypothesisSet:
    def test_requires_two(self):
        with pytest.raises(InvariantError, match="at least 2"):
            HypothesisSet((dist(1, 0),))

    def test_requires_shared_domain(self):
        with pytest.raises(InvariantError, match="hypothesis 2"):
            HypothesisSet((dist(1, 0), dist(1, 0, 0)))

    def test_probs_matrix(self):
        hs = HypothesisSet((dist(1, 0), dist(0, 1)))
        assert hs.probs_matrix.shape == (2, 2)


class TestRandomHypothesisSet:
    @pytest.mark.parametrize("model", ["dirichlet-uniform", "sparse", "point-mass-mixture"])
    def test_all_models_valid(self, model):
        hs = random_hypothesis_set(5, 7, seed=123, model=model)
        assert hs.k == 5 and hs.domain_size == 7

    def test_point_mass_mixture_small(self):
        hs = random_hypothesis_set(2, 2, seed=0, model="point-mass-mixture")
        for h in hs.hypotheses:
            assert h.probs.sum() == pytest.approx(1.0)

    def test_deterministic(self):
        a = random_hypothesis_set(4, 6, seed=99, model="sparse")
        b = random_hypothesis_set(4, 6, seed=99, model="sparse")
        assert np.array_equal(a.probs_matrix, b.probs_matrix)

    def test_large_dirichlet_passes_invariants(self):
        hs = random_hypothesis_set(16, 64, seed=7, model="dirichlet-uniform")
        # constructing DiscreteDistribution re-runs every invariant
        for h in hs.hypotheses:
            DiscreteDistribution(h.probs.copy())

    def test_unknown_model(self):
        with pytest.raises(ConfigError, match="unknown model"):
            random_hypothesis_set(3, 3, seed=0, model="gaussian")

    def test_bad_sizes(self):
        with pytest.raises(ConfigError):
            random_hypothesis_set(1, 4, seed=0)
        with pytest.raises(ConfigError):
            random_hypothesis_set(4, 1, seed=0)


class TestSerialization:
    def test_round_trip(self, tmp_path):
        hs = random_hypothesis_set(6, 9, seed=21)
        path = tmp_path / "hyp.json"
        hs.save(path)
        loaded = HypothesisSet.load(path)
        assert np.array_equal(loaded.probs_matrix, hs.probs_matrix)

    def test_rejects_negative_row_with_position(self, tmp_path):
        doc = {"domain_size": 2, "hypotheses": [[0.5, 0.5], [1.2, -0.2]]}
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(InvariantError, match=r"hypothesis 2.*coordinate 2"):
            HypothesisSet.load(path)

    def test_rejects_bad_sum_with_row(self):
        doc = {"domain_size": 2, "hypotheses": [[0.5, 0.5], [0.5, 0.6]]}
        with pytest.raises(InvariantError, match="hypothesis 2"):
            HypothesisSet.from_json_dict(doc)

    def test_rejects_length_mismatch(self):
        doc = {"domain_size": 3, "hypotheses": [[0.5, 0.5], [1.0, 0.0, 0.0]]}
        with pytest.raises(InvariantError, match="hypothesis 1"):
            HypothesisSet.from_json_dict(doc)

    def test_missing_field(self):
        with pytest.raises(InvariantError, match="missing field"):
            HypothesisSet.from_json_dict({"hypotheses": []})
