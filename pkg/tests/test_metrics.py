import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pdscore import (
    DimensionMismatch,
    DistanceKind,
    DistanceSpec,
    ZeroSignVector,
    ZeroVector,
    cosine,
    dist_l1,
    dist_l2,
    distance,
    pairwise_to_rows,
    sign_cosine,
    sign_vector,
    spec_from_token,
)
from pdscore.errors import BadParameter

METRIC_SPECS = [
    DistanceSpec(DistanceKind.L1),
    DistanceSpec(DistanceKind.L2),
    DistanceSpec(DistanceKind.COSINE_DISSIM),
    DistanceSpec(DistanceKind.SIGN_COSINE_DISSIM),
]


def vec_pairs(min_dim=2, max_dim=24):
    elements = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
    return st.integers(min_dim, max_dim).flatmap(
        lambda n: st.tuples(
            st.lists(elements, min_size=n, max_size=n),
            st.lists(elements, min_size=n, max_size=n),
        )
    )


def _usable(spec, a, b):
    if spec.kind in (DistanceKind.COSINE_DISSIM, DistanceKind.SIGN_COSINE_DISSIM):
        return np.linalg.norm(a) > 1e-6 and np.linalg.norm(b) > 1e-6
    return True


class TestHandValues:
    def test_l1(self):
        assert dist_l1([3, 4], [1, 0]) == 6.0
        assert dist_l1([2.5, -1.0, 0.0], [2.5, -1.0, 0.0]) == 0.0
        assert dist_l1([1, -1], [-1, 1]) == 4.0

    def test_l2(self):
        assert dist_l2([3, 4], [1, 0]) == pytest.approx(math.sqrt(20), rel=1e-12)
        assert dist_l2([0.3, 0.7], [0.3, 0.7]) == 0.0
        assert dist_l2([0, 0], [3, 4]) == 5.0

    def test_cosine(self):
        assert cosine([3, 4], [1, 0]) == pytest.approx(0.6, rel=1e-12)
        assert cosine([2, -5], [2, -5]) == pytest.approx(1.0, rel=1e-12)
        assert cosine([1, 0], [0, 1]) == 0.0

    def test_sign_vector(self):
        assert sign_vector([-2.5, 0.0, 3.0]).tolist() == [-1.0, 0.0, 1.0]
        assert sign_vector([0.05, -0.2], threshold=0.1).tolist() == [0.0, -1.0]
        assert sign_vector([0.0, 0.0]).tolist() == [0.0, 0.0]

    def test_sign_cosine(self):
        assert sign_cosine([3, 4], [1, 0]) == pytest.approx(1 / math.sqrt(2), rel=1e-12)
        assert sign_cosine([3, -4, 1], [3, -4, 1]) == pytest.approx(1.0, rel=1e-12)
        assert sign_cosine([1, 1], [-1, -1]) == -1.0

    def test_dispatch(self):
        assert distance(DistanceSpec(DistanceKind.L1), [3, 4], [1, 0]) == 6.0
        assert distance(DistanceSpec(DistanceKind.COSINE_DISSIM), [3, 4], [1, 0]) == pytest.approx(
            0.4, rel=1e-12
        )
        assert distance(
            DistanceSpec(DistanceKind.SIGN_COSINE_DISSIM), [3, 4], [1, 0]
        ) == pytest.approx(1 - 1 / math.sqrt(2), rel=1e-12)
        assert distance(DistanceSpec(DistanceKind.L2_LIMIT), [1, 0], [1, 1]) == -1.0

    def test_l1_limit_scores_via_dispatch(self):
        spec = DistanceSpec(DistanceKind.L1_LIMIT)
        assert distance(spec, [1, 0], [1, 5]) == 4.0
        assert distance(spec, [1, 0], [-1, 0]) == 1.0


class TestErrors:
    def test_dimension_mismatch(self):
        for fn in (dist_l1, dist_l2, cosine, sign_cosine):
            with pytest.raises(DimensionMismatch):
                fn([1, 2, 3], [1, 2])

    def test_zero_vector_cosine(self):
        with pytest.raises(ZeroVector):
            cosine([0, 0], [1, 2])
        with pytest.raises(ZeroVector):
            cosine([1, 2], [0, 0])

    def test_zero_sign_vector(self):
        with pytest.raises(ZeroSignVector):
            sign_cosine([0.0, 0.0], [1.0, 2.0])
        with pytest.raises(ZeroSignVector):
            sign_cosine([0.05, -0.05], [1.0, 2.0], threshold=0.1)

    def test_bad_spec_parameters(self):
        with pytest.raises(BadParameter):
            DistanceSpec(DistanceKind.SIGN_COSINE_DISSIM, sign_threshold=-1.0)
        with pytest.raises(BadParameter):
            spec_from_token("chebyshev")

    def test_pairwise_shape_checks(self):
        with pytest.raises(DimensionMismatch):
            pairwise_to_rows(DistanceSpec(DistanceKind.L1), [1.0, 2.0], np.ones((3, 3)))


class TestProperties:
    @settings(max_examples=150, deadline=None)
    @given(vec_pairs())
    def test_symmetry(self, ab):
        a, b = map(np.asarray, ab)
        for spec in METRIC_SPECS + [DistanceSpec(DistanceKind.L2_LIMIT)]:
            if not _usable(spec, a, b):
                continue
            assert distance(spec, a, b) == distance(spec, b, a)

    @settings(max_examples=150, deadline=None)
    @given(vec_pairs())
    def test_nonnegative_and_self_distance(self, ab):
        a, _ = map(np.asarray, ab)
        for spec in METRIC_SPECS:
            if not _usable(spec, a, a):
                continue
            assert abs(distance(spec, a, a)) <= 1e-12

    @settings(max_examples=150, deadline=None)
    @given(vec_pairs())
    def test_nonnegativity(self, ab):
        a, b = map(np.asarray, ab)
        for spec in METRIC_SPECS:
            if not _usable(spec, a, b):
                continue
            # cosine kinds can dip below 0 only by roundoff on collinear inputs
            assert distance(spec, a, b) >= -1e-12

    @settings(max_examples=100, deadline=None)
    @given(vec_pairs(), st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=24, max_size=24))
    def test_triangle_inequality(self, ab, c_raw):
        a, b = map(np.asarray, ab)
        c = np.asarray(c_raw[: a.shape[0]])
        for spec in METRIC_SPECS[:2]:
            lhs = distance(spec, a, c)
            rhs = distance(spec, a, b) + distance(spec, b, c)
            assert lhs <= rhs + 1e-9 * (1.0 + rhs)

    @settings(max_examples=100, deadline=None)
    @given(vec_pairs(), st.floats(1e-4, 1e4))
    def test_cosine_scale_invariance(self, ab, c):
        a, b = map(np.asarray, ab)
        if not _usable(DistanceSpec(DistanceKind.COSINE_DISSIM), a, b):
            return
        assert cosine(c * a, b) == pytest.approx(cosine(a, b), rel=1e-12, abs=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(vec_pairs())
    def test_sign_cosine_invariant_under_sign_preserving_maps(self, ab):
        a, b = map(np.asarray, ab)
        if np.all(sign_vector(a) == 0) or np.all(sign_vector(b) == 0):
            return
        rng = np.random.default_rng(0)
        factors = rng.uniform(0.5, 2.0, a.shape[0])
        assert sign_cosine(factors * a, b) == sign_cosine(a, b)
        assert sign_cosine(a, factors * b) == sign_cosine(a, b)

    @settings(max_examples=150, deadline=None)
    @given(vec_pairs())
    def test_squared_norm_expansion_identity(self, ab):
        a, b = map(np.asarray, ab)
        lhs = dist_l2(a, b) ** 2
        rhs = float(a @ a) + float(b @ b) - 2.0 * float(a @ b)
        scale = float(a @ a) + float(b @ b) + 1.0
        assert abs(lhs - rhs) <= 1e-10 * scale

    def test_batch_matches_scalar_bitwise(self):
        rng = np.random.default_rng(5)
        a = rng.standard_normal(12)
        rows = rng.standard_normal((9, 12))
        for spec in METRIC_SPECS + [
            DistanceSpec(DistanceKind.L2_LIMIT),
            DistanceSpec(DistanceKind.L1_LIMIT),
        ]:
            batch = pairwise_to_rows(spec, a, rows)
            singles = np.array([distance(spec, a, row) for row in rows])
            assert np.array_equal(batch, singles)
