import math

import numpy as np
import pytest

from robustmenu import (
    InconsistentAmbiguityError,
    LinearProgram,
    SolveStatus,
    build_ratio_lp,
    mean_set,
    multisegment_set,
    quantile_set,
    solve_lp,
    solve_ratio_given_prices,
    support_set,
)
from robustmenu.lp import EQ, LE


def mean_lp_transcription(mu, vbar, prices):
    """Specialized mean-set program, written out independently of the
    generic builder: lambda per price block, plus the top-price row."""
    v = sorted(prices)
    n = len(v)
    ext = v + [vbar]
    cols = 1 + n + n  # r, x, lam
    rows = []
    senses = []
    rhs = []
    for i in range(n):
        for j in range(n + 1):
            row = np.zeros(cols)
            row[1 + n + i] = ext[j] - mu
            for l in range(n):
                if v[l] < ext[j]:
                    row[1 + l] = -v[l]
            if j >= i:
                row[0] = v[i]
            rows.append(row)
            senses.append(LE)
            rhs.append(0.0)
    top = np.zeros(cols)
    top[0] = vbar
    top[1 : 1 + n] = -np.asarray(v)
    rows.append(top)
    senses.append(LE)
    rhs.append(0.0)
    norm = np.zeros(cols)
    norm[1 : 1 + n] = 1.0
    rows.append(norm)
    senses.append(EQ)
    rhs.append(1.0)
    obj = np.zeros(cols)
    obj[0] = 1.0
    return LinearProgram(obj, np.array(rows), senses, np.array(rhs))


def quantile_lp_transcription(omega, xi, vbar, prices):
    """Specialized single-quantile program with the step left limits
    1[v_j > omega] - xi, lambda per block including the top block."""
    v = sorted(prices)
    n = len(v)
    ext = v + [vbar]
    cols = 1 + n + (n + 1)
    rows, senses, rhs = [], [], []
    for i in range(n + 1):
        for j in range(n + 1):
            row = np.zeros(cols)
            row[1 + n + i] = (1.0 if ext[j] > omega else 0.0) - xi
            for l in range(n):
                if v[l] < ext[j]:
                    row[1 + l] = -v[l]
            if j >= i:
                row[0] = ext[i]
            rows.append(row)
            senses.append(LE)
            rhs.append(0.0)
    norm = np.zeros(cols)
    norm[1 : 1 + n] = 1.0
    rows.append(norm)
    senses.append(EQ)
    rhs.append(1.0)
    obj = np.zeros(cols)
    obj[0] = 1.0
    return LinearProgram(obj, np.array(rows), senses, np.array(rhs))


class TestGenericBuilder:
    def test_support_two_levels(self):
        r = solve_ratio_given_prices(support_set(1, 10), [1, math.sqrt(10)])
        assert r.ratio == pytest.approx(1 / (2 * math.sqrt(10) - 1), abs=1e-9)

    def test_support_lemma_probabilities(self):
        r = solve_ratio_given_prices(support_set(1, 100), [1, 10])
        assert r.ratio == pytest.approx(1 / 19, abs=1e-10)
        assert r.mechanism.probs == pytest.approx((10 / 19, 9 / 19), abs=1e-9)

    def test_mean_one_level_at_optimal_price(self):
        v1 = 1 - math.sqrt(0.5)
        r = solve_ratio_given_prices(mean_set(0.5, 1), [v1])
        assert r.ratio == pytest.approx(v1, abs=1e-9)

    def test_pricing_at_vbar_under_mean_set_gives_zero(self):
        r = solve_ratio_given_prices(mean_set(0.5, 1), [1.0])
        assert r.ratio == pytest.approx(0.0, abs=1e-10)

    def test_quantile_two_level_probabilities(self):
        r = solve_ratio_given_prices(quantile_set([(0.5, 0.25)], 1), [0.25, 0.5])
        assert r.ratio == pytest.approx(0.375, abs=1e-10)
        assert r.mechanism.probs == pytest.approx((0.5, 0.5), abs=1e-9)

    def test_degenerate_point_mass_corner_relaxes_to_zero(self):
        # With the mean pinned at vbar the only admissible distribution is
        # the point mass at vbar (game value 1), but the finite program
        # optimizes against the closure generated by left limits, which
        # allows mass just below vbar at no revenue; its value is 0.
        r = solve_ratio_given_prices(mean_set(1, 1), [1.0])
        assert r.ratio == pytest.approx(0.0, abs=1e-10)

    def test_support_at_degenerate_point_stays_bounded(self):
        # The vbar-exact rows keep the program matching the game here.
        r = solve_ratio_given_prices(support_set(1, 1), [1.0])
        assert r.ratio == pytest.approx(1.0, abs=1e-10)

    def test_layout_counts(self):
        s = quantile_set([(0.5, 0.25)], 1)
        lp, layout = build_ratio_lp(s, [0.25, 0.5])
        G = layout.num_grid
        assert G == 3  # two prices, one breakpoint merged with a price, vbar
        assert lp.num_vars == 1 + 2 + 1 * G == layout.num_cols
        assert lp.num_rows == G * (G + 1) + 1 == layout.num_rows

    def test_inconsistent_set_raises(self):
        s = multisegment_set([((0.0, 0.2), 0.8), ((0.8, 1.0), 0.8)], 1)
        with pytest.raises(InconsistentAmbiguityError):
            solve_ratio_given_prices(s, [0.1, 0.9])


class TestAgainstSpecializedTranscriptions:
    def test_mean_program_matches(self):
        rng = np.random.default_rng(2)
        for _ in range(25):
            mu = float(rng.uniform(0.1, 0.95))
            n = int(rng.integers(1, 4))
            prices = np.sort(rng.uniform(0.01, 0.99, n)).tolist()
            generic = solve_ratio_given_prices(mean_set(mu, 1), prices)
            special = solve_lp(mean_lp_transcription(mu, 1.0, prices))
            assert special.status is SolveStatus.OPTIMAL
            assert generic.ratio == pytest.approx(special.objective, abs=1e-9)

    def test_quantile_program_matches(self):
        rng = np.random.default_rng(4)
        for _ in range(25):
            omega = float(rng.uniform(0.1, 0.9))
            xi = float(rng.uniform(0.05, 0.95))
            n = int(rng.integers(1, 4))
            prices = np.sort(rng.uniform(0.01, 0.99, n)).tolist()
            generic = solve_ratio_given_prices(quantile_set([(omega, xi)], 1), prices)
            special = solve_lp(quantile_lp_transcription(omega, xi, 1.0, prices))
            assert special.status is SolveStatus.OPTIMAL
            assert generic.ratio == pytest.approx(special.objective, abs=1e-9)


class TestInvariances:
    def test_duplicate_price_level_changes_nothing(self):
        s = mean_set(0.5, 1)
        base = solve_ratio_given_prices(s, [0.3, 0.6])
        dup = solve_ratio_given_prices(s, [0.3, 0.6, 0.6])
        assert dup.ratio == pytest.approx(base.ratio, abs=1e-9)

    def test_zero_price_level_changes_nothing(self):
        s = quantile_set([(0.5, 0.25)], 1)
        base = solve_ratio_given_prices(s, [0.25, 0.5])
        padded = solve_ratio_given_prices(s, [0.0, 0.25, 0.5])
        assert padded.ratio == pytest.approx(base.ratio, abs=1e-9)

    def test_menu_growth_never_hurts(self):
        s = mean_set(0.4, 1)
        r1 = solve_ratio_given_prices(s, [0.25]).ratio
        r2 = solve_ratio_given_prices(s, [0.25, 0.5]).ratio
        r3 = solve_ratio_given_prices(s, [0.25, 0.5, 0.75]).ratio
        assert r1 <= r2 + 1e-12 and r2 <= r3 + 1e-12
