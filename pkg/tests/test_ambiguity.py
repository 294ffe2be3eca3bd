import numpy as np
import pytest

from robustmenu import (
    DomainError,
    GridPoint,
    Side,
    make_standard_set,
    mean_set,
    merged_grid,
    multisegment_set,
    phi_eval,
    quantile_set,
    segmented_mean_set,
    support_set,
)

L, E = Side.LEFT_LIMIT, Side.EXACT


def at(v, side=E):
    return GridPoint(v, side)


class TestBuilders:
    def test_support_breakpoints_and_left_limits(self):
        s = support_set(1, 10)
        assert s.breakpoints() == (1.0,)
        assert phi_eval(s, 0, at(1, L)) == -1.0
        assert phi_eval(s, 0, at(1)) == 0.0
        assert phi_eval(s, 0, at(5, L)) == 0.0

    def test_mean_affine_no_breakpoints(self):
        s = mean_set(0.5, 1)
        assert s.breakpoints() == ()
        assert phi_eval(s, 0, at(0.75)) == pytest.approx(0.25)
        assert phi_eval(s, 0, at(0.75, L)) == pytest.approx(0.25)

    def test_quantile_sides(self):
        s = quantile_set([(0.5, 0.25)], 1)
        assert s.breakpoints() == (0.5,)
        assert phi_eval(s, 0, at(0.5, L)) == pytest.approx(-0.25)
        assert phi_eval(s, 0, at(0.5)) == pytest.approx(0.75)

    def test_multisegment_indicator(self):
        s = multisegment_set([((0.2, 0.4), 0.5)], 1)
        assert phi_eval(s, 0, at(0.4)) == pytest.approx(0.5)
        assert phi_eval(s, 0, at(0.41)) == pytest.approx(-0.5)
        assert phi_eval(s, 0, at(0.4, L)) == pytest.approx(0.5)
        assert phi_eval(s, 0, at(0.2, L)) == pytest.approx(-0.5)
        assert set(s.breakpoints()) == {0.2, 0.4}

    def test_multisegment_union_of_intervals(self):
        s = multisegment_set([([(0.1, 0.2), (0.6, 0.7)], 0.3)], 1)
        assert phi_eval(s, 0, at(0.15)) == pytest.approx(0.7)
        assert phi_eval(s, 0, at(0.4)) == pytest.approx(-0.3)
        assert phi_eval(s, 0, at(0.65)) == pytest.approx(0.7)

    def test_segmented_mean(self):
        s = segmented_mean_set([((0.2, 0.6), 0.4)], 1)
        assert phi_eval(s, 0, at(0.5)) == pytest.approx(0.1)
        assert phi_eval(s, 0, at(0.1)) == 0.0
        assert phi_eval(s, 0, at(0.7)) == 0.0
        # the indicator edge steps down: left limit at the right end stays inside
        assert phi_eval(s, 0, at(0.6, L)) == pytest.approx(0.2)
        assert set(s.breakpoints()) == {0.2, 0.6}

    def test_make_standard_set_dispatch(self):
        s = make_standard_set("support", vlo=1, vbar=10)
        assert s.kind == "support"
        s = make_standard_set("quantile", quantiles=[(0.5, 0.25)], vbar=1)
        assert s.kind == "quantile"
        with pytest.raises(DomainError):
            make_standard_set("wasserstein", vbar=1)

    def test_parameter_validation(self):
        with pytest.raises(DomainError):
            support_set(-1, 10)
        with pytest.raises(DomainError):
            mean_set(0.0, 1)
        with pytest.raises(DomainError):
            quantile_set([(0.5, 0.0)], 1)
        with pytest.raises(DomainError):
            quantile_set([(1.5, 0.5)], 1)
        with pytest.raises(DomainError):
            multisegment_set([], 1)

    def test_index_out_of_range(self):
        with pytest.raises(DomainError):
            phi_eval(mean_set(0.5, 1), 1, at(0.5))


class TestMonotoneWithinSegments:
    def test_random_samples_within_segments(self):
        sets = [
            support_set(0.3, 1),
            mean_set(0.5, 1),
            quantile_set([(0.5, 0.25), (0.8, 0.1)], 1),
            multisegment_set([((0.2, 0.4), 0.5), ((0.3, 0.9), 0.2)], 1),
            segmented_mean_set([((0.2, 0.6), 0.4)], 1),
        ]
        rng = np.random.default_rng(3)
        for s in sets:
            for fn in s.constraints:
                for piece in fn.pieces:
                    if piece.hi <= piece.lo:
                        continue
                    xs = np.sort(rng.uniform(piece.lo, piece.hi, 40))
                    inside = [x for x in xs if piece.contains(x)]
                    vals = [piece.value(x) for x in inside]
                    assert all(a <= b + 1e-15 for a, b in zip(vals, vals[1:]))


class TestMergedGrid:
    def test_support_grid_is_prices_plus_vbar(self):
        s = support_set(1, 10)
        g = merged_grid(s, [1.0, np.sqrt(10)])
        assert g.points == (1.0, float(np.sqrt(10)), 10.0)

    def test_mean_grid_members_and_left_limits(self):
        g = merged_grid(mean_set(0.5, 1), [0.3])
        assert g.points == (0.3, 1.0)
        assert g.members == ((), (0,))
        assert g.phi_left[0] == pytest.approx((-0.2, 0.5))

    def test_quantile_grid_includes_breakpoint(self):
        g = merged_grid(quantile_set([(0.5, 0.25)], 1), [0.25, 0.5])
        assert g.points == (0.25, 0.5, 1.0)
        assert g.phi_left[0] == pytest.approx((-0.25, -0.25, 0.75))

    def test_permutation_and_duplicate_invariance(self):
        s = quantile_set([(0.5, 0.25)], 1)
        a = merged_grid(s, [0.25, 0.5])
        b = merged_grid(s, [0.5, 0.25])
        assert a.points == b.points and a.phi_left == b.phi_left
        c = merged_grid(s, [0.25, 0.25, 0.5])
        assert c.points == a.points

    def test_phi_left_matches_left_limit_eval(self):
        sets = [
            support_set(0.3, 1),
            quantile_set([(0.5, 0.25), (0.8, 0.1)], 1),
            multisegment_set([((0.2, 0.4), 0.5)], 1),
            segmented_mean_set([((0.2, 0.6), 0.4)], 1),
        ]
        for s in sets:
            g = merged_grid(s, [0.15, 0.55])
            for k in range(s.num_constraints):
                for j, u in enumerate(g.points):
                    assert g.phi_left[k][j] == phi_eval(s, k, at(u, L))

    def test_nested_members(self):
        g = merged_grid(quantile_set([(0.5, 0.25)], 1), [0.1, 0.4, 0.9])
        for prev, cur in zip(g.members, g.members[1:]):
            assert set(prev) <= set(cur)

    def test_price_outside_domain_rejected(self):
        with pytest.raises(DomainError):
            merged_grid(mean_set(0.5, 1), [1.5])
