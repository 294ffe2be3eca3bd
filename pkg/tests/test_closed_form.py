import math

import numpy as np
import pytest

from robustmenu import (
    DomainError,
    NumericError,
    maximin_revenue_inf,
    maximin_revenue_optimal,
    mean_one_level,
    mean_two_level,
    meanvar_ratio_lower_bound,
    meanvar_two_level_approx,
    minimax_regret_one_level,
    quantile_inf,
    quantile_one_level,
    quantile_two_level,
    support_inf_ratio,
    support_levels_ratio,
    support_optimal,
)
from robustmenu.closed_form import bisect_root
from robustmenu.evaluate import _adaptive_simpson


class TestBisection:
    def test_simple_root(self):
        assert bisect_root(lambda x: x * x - 2, 0, 2) == pytest.approx(math.sqrt(2), rel=1e-12)

    def test_endpoint_root(self):
        assert bisect_root(lambda x: x, 0, 1) == 0.0

    def test_unbracketed_raises(self):
        with pytest.raises(NumericError):
            bisect_root(lambda x: x + 1, 0, 1)


class TestSupport:
    def test_fixed_levels_formula(self):
        r = support_levels_ratio(1, 100, [1, 10])
        assert r.ratio == pytest.approx(1 / 19)
        assert r.mechanism.probs == pytest.approx((10 / 19, 9 / 19))

    def test_single_point_support(self):
        assert support_levels_ratio(1, 1, [1]).ratio == 1.0

    def test_lowest_level_off_floor_degenerates(self):
        r = support_levels_ratio(1, 10, [2, 5])
        assert r.ratio == 0.0

    def test_unsorted_prices_rejected(self):
        with pytest.raises(DomainError):
            support_levels_ratio(1, 10, [5, 2])

    def test_optimal_two_levels(self):
        r = support_optimal(2, 1, 100)
        assert r.mechanism.prices == pytest.approx((1.0, 10.0))
        assert r.ratio == pytest.approx(1 / 19)

    def test_degenerate_width(self):
        assert support_optimal(1, 5, 5).ratio == pytest.approx(1.0)

    def test_many_level_limit(self):
        lim = support_inf_ratio(1, 100)
        assert lim == pytest.approx(1 / (math.log(100) + 1))
        assert abs(support_optimal(1000, 1, 100).ratio - lim) < 1e-2

    def test_geometric_ladder_invariant(self):
        for n in (3, 5, 8):
            prices = support_optimal(n, 2, 50).mechanism.prices
            for i in range(1, n - 1):
                assert prices[i] ** 2 == pytest.approx(
                    prices[i - 1] * prices[i + 1], rel=1e-12
                )

    def test_ratio_increases_with_levels(self):
        ratios = [support_optimal(n, 1, 20).ratio for n in range(1, 12)]
        assert all(a < b for a, b in zip(ratios, ratios[1:]))

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            support_optimal(0, 1, 10)
        with pytest.raises(DomainError):
            support_optimal(2, 0, 10)


class TestMean:
    def test_one_level_values(self):
        r = mean_one_level(0.5, 1)
        assert r.mechanism.prices[0] == pytest.approx(1 - math.sqrt(0.5), abs=1e-12)
        assert r.ratio == pytest.approx(1 - math.sqrt(0.5), abs=1e-12)
        r = mean_one_level(0.75, 1)
        assert r.mechanism.prices[0] == pytest.approx(0.5)
        assert r.ratio == pytest.approx(0.5)
        assert mean_one_level(1, 1).ratio == 1.0

    def test_two_level_low_mean_branch(self):
        res = mean_two_level(0.25, 1)
        assert res.low_mean_branch and res.v2_exceeds_mean
        assert res.v1 == pytest.approx(1 - math.sqrt(0.75), abs=1e-9)
        assert res.v2 == pytest.approx(math.sqrt(res.v1), abs=1e-9)
        assert res.ratio == pytest.approx(0.2240092377, abs=1e-9)

    def test_two_level_high_mean_branch(self):
        res = mean_two_level(0.64, 1)
        assert not res.low_mean_branch and not res.v2_exceeds_mean
        assert res.v1 == pytest.approx(0.4, abs=1e-12)
        assert res.v2 == pytest.approx(0.5582575694955, abs=1e-9)
        assert res.ratio == pytest.approx(0.4726242389, abs=1e-9)

    def test_two_level_degenerate(self):
        res = mean_two_level(1, 1)
        assert res.ratio == 1.0 and res.mechanism.prices == (1.0,)

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_two_levels_beat_one(self):
        for i in range(1, 100):
            mu = i / 100
            assert mean_two_level(mu, 1).ratio >= mean_one_level(mu, 1).ratio - 1e-12

    def test_upper_price_monotone_within_branches(self):
        mus_low = np.linspace(0.02, 0.48, 60)
        v2_low = [mean_two_level(m, 1).v2 for m in mus_low]
        assert all(a <= b + 1e-12 for a, b in zip(v2_low, v2_low[1:]))
        mus_high = np.linspace(0.50, 0.99, 60)
        v2_high = [mean_two_level(m, 1).v2 for m in mus_high]
        assert all(a <= b + 1e-12 for a, b in zip(v2_high, v2_high[1:]))

    def test_upper_price_vs_mean_branch_fact(self):
        for i in range(1, 100):
            mu = i / 100
            if abs(mu - 0.49) < 0.005:
                continue  # the stated constant is a rounding; skip the seam
            res = mean_two_level(mu, 1)
            assert res.v2_exceeds_mean == (mu <= 0.49)

    def test_near_split_warns_with_true_crossover(self):
        with pytest.warns(RuntimeWarning, match="crossover"):
            mean_two_level(0.49, 1)


class TestMeanVariance:
    TABLE_PERCENT = {
        0.5: 43.93, 1: 25.82, 2: 13.25, 3: 8.74, 4: 6.49, 5: 5.15,
        6: 4.27, 7: 3.65, 8: 3.18, 9: 2.82, 10: 2.53,
    }

    def test_published_ratio_row(self):
        for cv, target in self.TABLE_PERCENT.items():
            _, r = meanvar_two_level_approx(1.0, float(cv))
            assert abs(100 * r - target) <= 0.01, cv

    def test_zero_variance_short_circuit(self):
        mech, r = meanvar_two_level_approx(2.0, 0.0)
        assert mech.prices == (2.0,) and r == 1.0

    def test_scale_invariance(self):
        _, r1 = meanvar_two_level_approx(1.0, 3.0)
        _, r2 = meanvar_two_level_approx(7.0, 21.0)
        assert r1 == pytest.approx(r2, rel=1e-10)

    def test_lower_bound_holds_across_cv(self):
        for cv in np.geomspace(0.1, 20, 40):
            _, r = meanvar_two_level_approx(1.0, float(cv))
            assert r >= meanvar_ratio_lower_bound(1.0, float(cv)) - 1e-12

    def test_lower_bound_values(self):
        assert meanvar_ratio_lower_bound(1, 0) == pytest.approx(0.327327, abs=1e-6)
        assert meanvar_ratio_lower_bound(1, 1) == pytest.approx(0.197386, abs=1e-6)
        assert meanvar_ratio_lower_bound(1, 10) == pytest.approx(0.024673, abs=1e-6)


class TestQuantile:
    def test_one_level(self):
        r = quantile_one_level(0.5, 0.3, 1)
        assert r.mechanism.prices == (0.3,) and r.ratio == pytest.approx(0.3)
        assert quantile_one_level(1, 1, 1).ratio == 1.0
        r = quantile_one_level(0.2, 0.9, 1)
        assert r.mechanism.prices == (0.2,) and r.ratio == pytest.approx(0.2)

    def test_two_level_case_one(self):
        r = quantile_two_level(0.5, 0.25, 1)
        assert r.mechanism.prices == pytest.approx((0.25, 0.5))
        assert r.mechanism.probs == pytest.approx((0.5, 0.5))
        assert r.ratio == pytest.approx(0.375)

    def test_two_level_knot_no_improvement(self):
        assert quantile_two_level(0.4, 0.4, 1).ratio == quantile_one_level(0.4, 0.4, 1).ratio

    def test_two_level_small_xi(self):
        assert quantile_two_level(0.9, 0.04, 1).ratio == pytest.approx(0.12, abs=1e-12)

    def test_two_beats_one_off_knot(self):
        for omega in (0.2, 0.4, 0.6, 0.8):
            for j in range(1, 20):
                xi = j / 20
                r1 = quantile_one_level(omega, xi, 1).ratio
                r2 = quantile_two_level(omega, xi, 1).ratio
                if abs(xi - omega) < 1e-12:
                    assert r2 == r1
                else:
                    assert r2 > r1 + 1e-12

    def test_inf_interior_branch(self):
        m = quantile_inf(0.5, 0.5, 1)
        assert m.phat == pytest.approx(0.75)
        assert m.r == pytest.approx(0.5367553368694921, abs=1e-12)

    def test_inf_clipped_branch(self):
        m = quantile_inf(0.8, 0.5, 1)
        assert m.phat == 1.0
        # 1 / (0.2/0.4 + (ln 0.8 - ln 0.5)/0.5), assembled term by term
        expect = 1.0 / (0.5 + (math.log(0.8) - math.log(0.5)) / 0.5)
        assert m.r == pytest.approx(expect, abs=1e-12)
        assert m.r == pytest.approx(0.6944409440, abs=1e-9)

    def test_inf_mass_normalizes_by_quadrature(self):
        for omega, xi in [(0.5, 0.5), (0.8, 0.5), (0.2, 0.9), (0.6, 0.05)]:
            m = quantile_inf(omega, xi, 1)
            quad = 0.0
            lo = m.xi * m.phat
            if m.omega > lo:
                quad += _adaptive_simpson(m.density_at, lo, m.omega - 1e-15, 1e-11)
            if 1.0 > m.phat:
                quad += _adaptive_simpson(m.density_at, m.phat, 1.0, 1e-11)
            assert quad + m.point_mass == pytest.approx(1.0, abs=1e-9)
            assert m.total_price_mass() == pytest.approx(1.0, abs=1e-12)

    def test_inf_allocation_monotone_and_complete(self):
        m = quantile_inf(0.5, 0.5, 1)
        grid = np.linspace(0, 1, 1001)
        q = [m.allocation_at(v) for v in grid]
        assert all(a <= b + 1e-12 for a, b in zip(q, q[1:]))
        assert q[-1] == pytest.approx(1.0, abs=1e-9)

    def test_inf_payment_side_semantics(self):
        from robustmenu import GridPoint, Side

        m = quantile_inf(0.5, 0.5, 1)
        jump = m.omega * m.point_mass
        below = m.payment_at(GridPoint(0.5, Side.LEFT_LIMIT))
        at = m.payment_at(GridPoint(0.5, Side.EXACT))
        assert at - below == pytest.approx(jump, abs=1e-12)

    def test_inf_lower_conversion_allocates_earlier(self):
        # Price densities from higher conversion rates sit on higher prices:
        # their cumulative allocation is pointwise below.
        grid = np.linspace(0, 1, 1001)
        for lo_xi, hi_xi in [(0.1, 0.3), (0.2, 0.7), (0.4, 0.6), (0.3, 0.9), (0.05, 0.95)]:
            q_lo = quantile_inf(0.5, lo_xi, 1)
            q_hi = quantile_inf(0.5, hi_xi, 1)
            for v in grid:
                assert q_hi.allocation_at(v) <= q_lo.allocation_at(v) + 1e-12

    def test_inf_degenerate_full_conversion(self):
        m = quantile_inf(0.5, 1.0, 1)
        assert m.r == pytest.approx(0.5)
        assert m.point_mass == 1.0

    def test_inf_rejects_zero_omega(self):
        with pytest.raises(DomainError):
            quantile_inf(0.0, 0.5, 1)


class TestAlternativeMetrics:
    def test_maximin_one_level(self):
        mech, rev = maximin_revenue_optimal(0.5, 1, 1)
        assert mech.prices[0] == pytest.approx(1 - math.sqrt(0.5), abs=1e-10)
        assert rev == pytest.approx((1 - math.sqrt(0.5)) ** 2, abs=1e-10)

    def test_maximin_two_level_exact_root(self):
        mech, rev = maximin_revenue_optimal(0.5, 1, 2)
        assert mech.prices[0] == pytest.approx(0.25, abs=1e-10)
        assert mech.prices[1] == pytest.approx(0.5, abs=1e-10)
        assert mech.probs == pytest.approx((0.5, 0.5))
        assert rev == pytest.approx(0.125, abs=1e-12)

    def test_maximin_degenerate(self):
        mech, rev = maximin_revenue_optimal(1, 1, 3)
        assert mech.prices == (1.0,) and rev == 1.0

    def test_maximin_unrestricted_limit(self):
        lin = maximin_revenue_inf(0.5, 1)
        assert lin.v1 == pytest.approx(
            bisect_root(lambda v: v * (1 + math.log(1 / v)) - 0.5, 1e-9, 1), rel=1e-9
        )
        # ladders converge from below at first order in 1/n
        revs = [maximin_revenue_optimal(0.5, 1, n)[1] for n in (5, 20, 100, 400)]
        assert all(a < b < lin.revenue for a, b in zip(revs, revs[1:]))

    def test_regret_one_level(self):
        price, regret = minimax_regret_one_level(0.5, 1)
        assert price == pytest.approx(0.3819660112501051, abs=1e-12)
        assert regret == pytest.approx(0.30901699437494745, abs=1e-12)
        price, regret = minimax_regret_one_level(0.75, 1)
        assert price == pytest.approx(0.5657414540893352, abs=1e-9)
        assert regret == pytest.approx(0.32569390943299864, abs=1e-9)
        assert minimax_regret_one_level(1, 1) == (1.0, 0.0)
