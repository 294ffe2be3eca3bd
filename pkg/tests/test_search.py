import os

import numpy as np
import pytest

from robustmenu import (
    DomainError,
    approx_inf_level,
    best_n_level,
    mean_set,
    quantile_set,
    solve_ratio_given_prices,
    support_inf_ratio,
    support_set,
)
from robustmenu.closed_form import (
    mean_one_level,
    quantile_inf,
    quantile_one_level,
    quantile_two_level,
)
from robustmenu.search import _solve_ratio_sparse


class TestBestNLevel:
    def test_one_level_mean_close_to_closed_form(self):
        found = best_n_level(mean_set(0.5, 1), 1, 0.01, workers=1)
        closed = mean_one_level(0.5, 1)
        assert found.ratio <= closed.ratio + 1e-9
        assert found.ratio >= closed.ratio - 5e-3

    def test_grid_containing_optimum_attains_it(self):
        # the optimal single price 0.3 lies on the 0.1-step grid exactly
        closed = quantile_one_level(0.5, 0.3, 1)
        found = best_n_level(quantile_set([(0.5, 0.3)], 1), 1, 0.1, workers=1)
        assert found.ratio >= closed.ratio - 1e-9

    def test_nondecreasing_in_menu_size(self):
        s = quantile_set([(0.5, 0.25)], 1)
        r1 = best_n_level(s, 1, 0.05, workers=1).ratio
        r2 = best_n_level(s, 2, 0.05, workers=1).ratio
        r3 = best_n_level(s, 3, 0.05, workers=1).ratio
        assert r1 <= r2 + 1e-12 and r2 <= r3 + 1e-12

    def test_nondecreasing_under_refinement(self):
        s = mean_set(0.4, 1)
        coarse = best_n_level(s, 2, 0.1, workers=1).ratio
        fine = best_n_level(s, 2, 0.05, workers=1).ratio
        assert fine >= coarse - 1e-12

    def test_parallel_matches_serial(self):
        s = quantile_set([(0.4, 0.4)], 1)
        serial = best_n_level(s, 2, 0.05, workers=1)
        parallel = best_n_level(s, 2, 0.05, workers=2)
        assert parallel.ratio == serial.ratio
        assert parallel.mechanism == serial.mechanism

    def test_three_levels_beat_two_at_the_knot(self):
        # at xi = omega/vbar two levels collapse to the single posted price;
        # a third level must strictly improve
        s = quantile_set([(0.4, 0.4)], 1)
        r2 = quantile_two_level(0.4, 0.4, 1).ratio
        r3 = best_n_level(s, 3, 0.04, workers=2).ratio
        assert r3 > r2 + 1e-3

    @pytest.mark.skipif(
        not os.environ.get("RUN_SLOW"), reason="exhaustive fine grid; set RUN_SLOW=1"
    )
    def test_three_levels_beat_two_at_the_knot_fine_grid(self):
        s = quantile_set([(0.4, 0.4)], 1)
        r3 = best_n_level(s, 3, 0.01, workers=None).ratio
        assert r3 > quantile_two_level(0.4, 0.4, 1).ratio + 1e-3

    def test_resolution_must_cover_menu(self):
        with pytest.raises(DomainError):
            best_n_level(mean_set(0.5, 1), 3, 0.6, workers=1)


class TestApproxInfLevel:
    def test_support_brackets_the_limit(self):
        r = approx_inf_level(support_set(1, 100), 400)
        lim = support_inf_ratio(1, 100)
        assert lim - 5e-3 <= r.ratio <= lim + 1e-9

    def test_quantile_approaches_closed_form_from_below(self):
        r = approx_inf_level(quantile_set([(0.5, 0.5)], 1), 400)
        closed = quantile_inf(0.5, 0.5, 1).r
        assert closed - 5e-3 <= r.ratio <= closed + 1e-9

    def test_point_support_extracts_everything(self):
        r = approx_inf_level(support_set(1, 1), 50)
        assert r.ratio == pytest.approx(1.0, abs=1e-9)

    def test_dominates_finite_menus(self):
        s = mean_set(0.5, 1)
        inf_lb = approx_inf_level(s, 100).ratio
        assert inf_lb >= best_n_level(s, 1, 0.05, workers=1).ratio - 1e-9
        assert inf_lb >= best_n_level(s, 2, 0.1, workers=1).ratio - 1e-9

    def test_sparse_path_matches_direct_solver(self):
        s = quantile_set([(0.5, 0.25)], 1)
        prices = [(i + 1) / 55 for i in range(55)]
        direct = solve_ratio_given_prices(s, prices)
        sparse = _solve_ratio_sparse(s, prices)
        assert sparse.ratio == pytest.approx(direct.ratio, abs=1e-9)

    def test_gridsize_validated(self):
        with pytest.raises(DomainError):
            approx_inf_level(mean_set(0.5, 1), 10)
