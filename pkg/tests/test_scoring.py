import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from diffnet.classify import classify_weights
from diffnet.scoring import (
    NormalizationMode,
    filter_by_ratio,
    group_effect,
    grouped_minmax,
    internal_score,
    minmax_normalize,
    raw_distance,
    score_all,
)

NAMES = ["A", "B", "C"]


def _links(rows, tau=1 / 3):
    w = np.asarray(rows, dtype=float)
    idx = np.arange(len(w))
    return classify_weights(NAMES[: w.shape[1]], np.array([], dtype=object), idx, idx, w, tau)


def plain_scores(rows, tau=1 / 3, floor=1e-6):
    """All-links scores computed with plain Python arithmetic."""
    cats = [[(1 if r > tau else -1 if r < -tau else 0) for r in row] for row in rows]
    keep = [i for i, c in enumerate(cats) if any(c)]
    rows = [rows[i] for i in keep]
    cats = [cats[i] for i in keep]
    delta = [math.sqrt(sum(r * r for r in row) / sum(abs(c) for c in cat)) for row, cat in zip(rows, cats)]
    internal = [math.sqrt(sum((r - c) ** 2 for r, c in zip(row, cat)) / len(row)) for row, cat in zip(rows, cats)]

    def norm(xs):
        lo, hi = min(xs), max(xs)
        return [1.0] * len(xs) if hi == lo else [(x - lo) / (hi - lo) for x in xs]

    ds = norm(delta)
    dr = [max(v, floor) for v in norm(internal)]
    return delta, ds, dr, [a / b for a, b in zip(ds, dr)]


class TestRawDistance:
    def test_worked_example(self):
        assert raw_distance([0.9, 0.8, 0.7], [1, 1, 1]) == pytest.approx(math.sqrt(1.94 / 3), abs=1e-12)
        assert raw_distance([0.9, 0.8, 0.7], [1, 1, 1]) == pytest.approx(0.8041558721209878, abs=1e-12)

    def test_corner_is_one(self):
        assert raw_distance([1, -1, 1], [1, -1, 1]) == 1.0
        assert raw_distance([0.9, 0, 0], [1, 0, 0]) == pytest.approx(0.9)

    def test_all_zero_rejected(self):
        with pytest.raises(ValueError):
            raw_distance([0.1, 0.2], [0, 0])

    @given(st.lists(st.floats(-1, 1), min_size=2, max_size=5))
    def test_bounded_when_subthreshold_weights_are_zero(self, row):
        row = [r if abs(r) > 1 / 3 else 0.0 for r in row]
        cat = [(1 if r > 0 else -1 if r < 0 else 0) for r in row]
        if any(cat):
            assert 0.0 <= raw_distance(row, cat) <= 1.0 + 1e-12


class TestMinmax:
    def test_worked_example(self):
        out = minmax_normalize([0.80416, 1.0, 0.9])
        np.testing.assert_allclose(out, [0.0, 1.0, 0.4893790849673204], atol=1e-12)

    def test_constant_list(self):
        np.testing.assert_array_equal(minmax_normalize([0.4, 0.4, 0.4]), [1.0, 1.0, 1.0])

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            minmax_normalize([])

    @given(st.lists(st.floats(-100, 100), min_size=2, max_size=30),
           st.floats(0.1, 10), st.floats(-10, 10))
    @settings(max_examples=200)
    def test_affine_invariance(self, xs, scale, shift):
        x = np.array(xs)
        if x.max() - x.min() < 1e-6:
            return
        np.testing.assert_allclose(minmax_normalize(scale * x + shift), minmax_normalize(x), atol=1e-7)

    @given(st.lists(st.floats(-1, 1), min_size=1, max_size=40), st.integers(1, 4), st.randoms())
    @settings(max_examples=100)
    def test_grouped_matches_per_group(self, xs, k, rnd):
        x = np.array(xs)
        g = np.array([rnd.randrange(k) for _ in xs])
        out = grouped_minmax(x, g, k)
        for code in range(k):
            sel = g == code
            if sel.any():
                np.testing.assert_allclose(out[sel], minmax_normalize(x[sel]), atol=1e-12)


class TestInternalScore:
    def test_examples(self):
        assert internal_score([1, 1, 1], [1, 1, 1]) == 0.0
        assert internal_score([0.9, 0.8, 0.7], [1, 1, 1]) == pytest.approx(math.sqrt(0.14 / 3), abs=1e-12)

    def test_all_zero_rejected(self):
        with pytest.raises(ValueError):
            internal_score([0.1, 0.1], [0, 0])


class TestScoreAll:
    ROWS = [[0.9, 0.8, 0.7], [1.0, 1.0, 1.0], [0.9, 0.0, 0.0]]

    def test_three_link_oracle_all_links(self):
        s = score_all(_links(self.ROWS), mode="all")
        delta, ds, dr, ratio = plain_scores(self.ROWS)
        np.testing.assert_allclose(s.delta, delta, rtol=1e-12)
        np.testing.assert_allclose(s.delta_star, ds, atol=1e-12)
        np.testing.assert_allclose(s.delta_star, [0.0, 1.0, 0.4893898475129283], atol=1e-12)
        np.testing.assert_allclose(s.delta_rho_tilde, [1.0, 1e-6, 0.2672612419124244], atol=1e-12)
        np.testing.assert_allclose(s.score_ratio, ratio, rtol=1e-10)
        assert s.score_ratio[1] == pytest.approx(1e6)

    def test_per_group_mode(self):
        s = score_all(_links(self.ROWS), mode=NormalizationMode.PER_PHI_TILDE)
        # two alpha links normalise between themselves, the gamma link is alone
        np.testing.assert_allclose(s.delta_phi_tilde, [0.0, 1.0, 1.0])
        np.testing.assert_allclose(s.delta_star, [0.0, 1.0, 0.4893898475129283], atol=1e-12)

    @given(st.lists(st.lists(st.floats(-1, 1), min_size=3, max_size=3), min_size=1, max_size=50))
    @settings(max_examples=100, deadline=None)
    def test_vectorised_matches_plain(self, rows):
        links = _links(rows)
        if len(links) == 0:
            return
        s = score_all(links, mode="all")
        delta, ds, dr, ratio = plain_scores(rows)
        np.testing.assert_allclose(s.delta, delta, rtol=1e-9)
        np.testing.assert_allclose(s.delta_rho_tilde, dr, atol=1e-9)
        assert (s.delta_rho_tilde >= 1e-6).all()
        assert np.isfinite(s.score_ratio).all()

    @given(st.lists(st.lists(st.floats(-1, 1), min_size=3, max_size=3), min_size=2, max_size=50))
    @settings(max_examples=50, deadline=None)
    def test_group_scores_do_not_leak(self, rows):
        links = _links(rows)
        if len(links) < 2:
            return
        s = score_all(links)
        codes = links.phi_tilde_code
        first = codes[0]
        sel = codes == first
        alone = score_all(links.subset(sel))
        np.testing.assert_allclose(s.delta_phi_tilde[sel], alone.delta_phi_tilde, atol=1e-12)

    def test_empty(self):
        assert len(score_all(_links([[0.1, 0.1, 0.1]]))) == 0

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            score_all(_links(self.ROWS), mode="bogus")


class TestFilter:
    def test_boundary_kept(self):
        s = score_all(_links([[0.9, 0.8, 0.7], [1.0, 1.0, 1.0], [0.9, 0.0, 0.0]]), mode="all")
        s.score_ratio[:] = [0.999, 1.0, 1.5]
        assert filter_by_ratio(s).tolist() == [False, True, True]
        assert filter_by_ratio(s, 0.0).all()

    def test_negative_cutoff(self):
        s = score_all(_links([[0.9, 0.8, 0.7]]))
        with pytest.raises(ValueError):
            filter_by_ratio(s, -0.5)


class TestGroupEffect:
    def test_matches_scipy(self):
        from scipy.stats import f_oneway

        rng = np.random.default_rng(2)
        delta = rng.uniform(size=60)
        groups = rng.integers(0, 4, size=60)
        out = group_effect(delta, groups)
        ref = f_oneway(*(delta[groups == k] for k in range(4)))
        assert out["f_statistic"] == pytest.approx(ref.statistic, rel=1e-10)
        assert out["p_value"] == pytest.approx(ref.pvalue, rel=1e-8)

    def test_degenerate(self):
        assert group_effect(np.array([0.2, 0.3]), np.array([0, 0]))["f_statistic"] is None
