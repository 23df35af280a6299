import math

import numpy as np
import pytest

from pdscore import (
    BadParameter,
    DistanceKind,
    DistanceSpec,
    NonpositiveScale,
    TransformDescriptor,
    TransformKind,
    ZeroPredictionNorm,
    apply_chain,
    chain_tokens,
    compute_pds,
    global_scale,
    norm_match,
    parse_chain,
    sign_project,
)

from helpers import pair_from, random_pair


class TestGlobalScale:
    def test_identity_scale(self):
        pair = random_pair(np.random.default_rng(1), n=3, p=4)
        scaled = global_scale(pair.predicted, 1.0)
        assert np.array_equal(scaled.values, pair.predicted.values)

    def test_hand_value(self):
        pair = pair_from([[3.0, 4.0], [1.0, 1.0]], [[1.0, 1.0], [2.0, 2.0]])
        scaled = global_scale(pair.predicted, 2.0)
        assert scaled.values[0].tolist() == [6.0, 8.0]

    def test_norm_homogeneity(self):
        rng = np.random.default_rng(2)
        pair = random_pair(rng, n=5, p=7)
        c = 3.7
        scaled = global_scale(pair.predicted, c)
        before = np.linalg.norm(pair.predicted.values, axis=1)
        after = np.linalg.norm(scaled.values, axis=1)
        assert np.allclose(after, c * before, rtol=1e-12)

    def test_rejects_nonpositive(self):
        pair = random_pair(np.random.default_rng(3), n=2, p=2)
        for c in (0.0, -1.0, float("nan"), float("inf")):
            with pytest.raises(NonpositiveScale):
                global_scale(pair.predicted, c)


class TestNormMatch:
    def test_l2_hand_value(self):
        pair = pair_from([[3.0, 4.0], [1.0, 0.0]], [[1.0, 1.0], [0.0, 2.0]])
        matched = norm_match(pair, 2)
        c = math.sqrt(2.0) / 5.0
        assert matched.predicted.values[0] == pytest.approx([3 * c, 4 * c], rel=1e-12)
        assert float(np.linalg.norm(matched.predicted.values[0])) == pytest.approx(
            math.sqrt(2.0), rel=1e-12
        )

    def test_l1_hand_value(self):
        pair = pair_from([[3.0, 4.0], [1.0, 0.0]], [[1.0, 1.0], [0.0, 2.0]])
        matched = norm_match(pair, 1)
        assert matched.predicted.values[0] == pytest.approx([6 / 7, 8 / 7], rel=1e-12)
        assert float(np.abs(matched.predicted.values[0]).sum()) == pytest.approx(2.0, rel=1e-12)

    def test_fixed_point_when_norms_already_match(self):
        pair = pair_from([[3.0, 4.0], [0.0, 1.0]], [[5.0, 0.0], [1.0, 0.0]])
        matched = norm_match(pair, 2)
        assert np.array_equal(matched.predicted.values, pair.predicted.values)

    def test_norms_match_to_tolerance(self):
        rng = np.random.default_rng(4)
        pair = random_pair(rng, n=20, p=15)
        for p_norm in (1, 2):
            matched = norm_match(pair, p_norm)
            if p_norm == 1:
                got = np.abs(matched.predicted.values).sum(axis=1)
                want = np.abs(pair.truth.values).sum(axis=1)
            else:
                got = np.linalg.norm(matched.predicted.values, axis=1)
                want = np.linalg.norm(pair.truth.values, axis=1)
            assert np.allclose(got, want, rtol=1e-12)

    def test_truth_side_untouched(self):
        pair = random_pair(np.random.default_rng(5), n=4, p=3)
        matched = norm_match(pair, 2)
        assert np.array_equal(matched.truth.values, pair.truth.values)

    def test_zero_prediction_row_is_hard_error(self):
        pair = pair_from([[0.0, 0.0], [1.0, 2.0]], [[1.0, 1.0], [2.0, 2.0]])
        with pytest.raises(ZeroPredictionNorm, match="P0000"):
            norm_match(pair, 2)

    def test_bad_p_norm(self):
        pair = random_pair(np.random.default_rng(6), n=2, p=2)
        with pytest.raises(BadParameter):
            norm_match(pair, 3)

    def test_idempotent_and_absorbs_global_scale(self):
        rng = np.random.default_rng(7)
        pair = random_pair(rng, n=10, p=8)
        for p_norm in (1, 2):
            once = norm_match(pair, p_norm)
            twice = norm_match(once, p_norm)
            assert np.allclose(twice.predicted.values, once.predicted.values, rtol=1e-10)
            for c in (1e-3, 5.0, 1e3):
                prescaled = pair.with_predicted(global_scale(pair.predicted, c))
                absorbed = norm_match(prescaled, p_norm)
                assert np.allclose(absorbed.predicted.values, once.predicted.values, rtol=1e-10)

    def test_cosine_to_fixed_vector_preserved(self):
        rng = np.random.default_rng(8)
        pair = random_pair(rng, n=6, p=9)
        probe = rng.standard_normal(9)
        matched = norm_match(pair, 2)
        scaled = global_scale(pair.predicted, 17.0)
        for before, after in ((pair.predicted.values, matched.predicted.values),
                              (pair.predicted.values, scaled.values)):
            for row_before, row_after in zip(before, after):
                cos_before = row_before @ probe / (np.linalg.norm(row_before) * np.linalg.norm(probe))
                cos_after = row_after @ probe / (np.linalg.norm(row_after) * np.linalg.norm(probe))
                assert cos_after == pytest.approx(cos_before, rel=1e-12)


class TestSignProject:
    def test_examples(self):
        pair = pair_from([[-2.5, 0.0, 3.0], [1.0, 2.0, 0.5]], np.zeros((2, 3)) + 1.0)
        projected = sign_project(pair.predicted)
        assert projected.values[0].tolist() == [-1.0, 0.0, 1.0]
        assert projected.values[1].tolist() == [1.0, 1.0, 1.0]

    def test_threshold(self):
        pair = pair_from([[0.05, -0.2]], [[1.0, 1.0]])
        projected = sign_project(pair.predicted, threshold=0.1)
        assert projected.values[0].tolist() == [0.0, -1.0]


class TestApplyChain:
    def test_empty_chain_is_identity(self):
        pair = random_pair(np.random.default_rng(9), n=3, p=4)
        out = apply_chain(pair, ())
        assert np.array_equal(out.predicted.values, pair.predicted.values)
        assert out.transform_chain == ()

    def test_chain_recorded_and_propagated_to_report(self):
        pair = random_pair(np.random.default_rng(10), n=4, p=5)
        chain = parse_chain("scale:2,norm-match:l2")
        out = apply_chain(pair, chain)
        assert chain_tokens(out.transform_chain) == ["scale:2", "norm-match:l2"]
        report = compute_pds(out, DistanceSpec(DistanceKind.L2))
        assert report.transform_chain == out.transform_chain

    def test_scale_then_norm_match_equals_norm_match_alone(self):
        rng = np.random.default_rng(11)
        pair = random_pair(rng, n=12, p=10)
        for p_norm, metric in ((1, DistanceKind.L1), (2, DistanceKind.L2)):
            token = f"norm-match:l{p_norm}"
            plain = apply_chain(pair, parse_chain(token))
            for c in (1e-3, 1.0, 1e3):
                both = apply_chain(pair, parse_chain(f"scale:{c},{token}"))
                assert np.allclose(
                    both.predicted.values, plain.predicted.values, rtol=1e-10
                )
                report_both = compute_pds(both, DistanceSpec(metric))
                report_plain = compute_pds(plain, DistanceSpec(metric))
                assert np.array_equal(report_both.ranks(), report_plain.ranks())

    def test_norm_match_l1_postcondition_via_chain(self):
        pair = random_pair(np.random.default_rng(12), n=6, p=7)
        out = apply_chain(pair, parse_chain("norm-match:l1"))
        assert np.allclose(
            np.abs(out.predicted.values).sum(axis=1),
            np.abs(pair.truth.values).sum(axis=1),
            rtol=1e-12,
        )


class TestChainGrammar:
    def test_parse_round_trip(self):
        chain = parse_chain("scale:3.0,norm-match:l2,sign:0.1,norm-match:l1")
        assert [d.kind for d in chain] == [
            TransformKind.GLOBAL_SCALE,
            TransformKind.NORM_MATCH_L2,
            TransformKind.SIGN_PROJECT,
            TransformKind.NORM_MATCH_L1,
        ]
        assert chain[0].parameter == 3.0
        assert chain[2].parameter == 0.1
        assert chain_tokens(chain) == ["scale:3", "norm-match:l2", "sign:0.1", "norm-match:l1"]

    def test_empty_text(self):
        assert parse_chain("") == ()
        assert parse_chain("  ") == ()

    def test_bad_tokens(self):
        for text in ("bogus", "norm-match:l3", "scale:abc", "sign:", "scale:"):
            with pytest.raises(BadParameter, match="scale:<c>"):
                parse_chain(text)

    def test_descriptor_validation(self):
        with pytest.raises(NonpositiveScale):
            TransformDescriptor(TransformKind.GLOBAL_SCALE, -2.0)
        with pytest.raises(NonpositiveScale):
            TransformDescriptor(TransformKind.GLOBAL_SCALE, None)
        with pytest.raises(BadParameter):
            TransformDescriptor(TransformKind.SIGN_PROJECT, -0.5)
        with pytest.raises(BadParameter):
            TransformDescriptor(TransformKind.NORM_MATCH_L1, 2.0)
