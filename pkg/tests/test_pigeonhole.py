import numpy as np
import pytest

from fraclab.errors import ArityError, PreconditionError, RangeError
from fraclab.fourier import lp_low, lp_piece, square_function
from fraclab.grid import DyadicSet, GridFunction, grid_norm
from fraclab.pigeonhole import (
    energy_extraction,
    find_good_scale,
    lower_bound_check,
    mollify,
)

J = 12
N = 1 << J


def block_indicator(J, start, length):
    n = 1 << J
    vals = np.zeros(n)
    a = int(start * n)
    vals[a : a + int(length * n)] = 1.0
    return GridFunction(J, vals)


class TestLowerBoundCheck:
    def test_constant_density_is_tight(self):
        eps = 0.3
        f = GridFunction.constant(10, eps)
        lhs, rhs, ok = lower_bound_check(f, [2, 5, 7], 2)
        assert lhs == pytest.approx(eps**3, rel=1e-12)
        assert rhs == pytest.approx(eps**3, rel=1e-12)
        assert ok

    def test_half_indicator_m2(self):
        f = block_indicator(10, 0.0, 0.5)
        lhs, rhs, ok = lower_bound_check(f, [1, 1, 1], 2)
        assert ok
        assert lhs >= (0.5**3) * 2.0**-3

    def test_range_enforced(self):
        f = GridFunction.constant(8, 1.5)
        with pytest.raises(RangeError):
            lower_bound_check(f, [0, 1], 1)

    def test_arity_enforced(self):
        f = GridFunction.constant(8, 0.5)
        with pytest.raises(ArityError):
            lower_bound_check(f, [0, 1], 2)

    def test_randomized_suite(self):
        rng = np.random.default_rng(17)
        for trial in range(60):
            m = [1, 2, 3][trial % 3]
            density = float(rng.uniform(0.1, 0.9))
            f = DyadicSet.random(10, density, 1000 + trial).indicator()
            scales = [int(rng.integers(0, 9)) for _ in range(m + 1)]
            lhs, rhs, ok = lower_bound_check(f, scales, m)
            assert ok, (m, density, scales, lhs, rhs)

    def test_none_scale_is_identity(self):
        f = block_indicator(10, 0.25, 0.25)
        assert np.array_equal(mollify(f, None).values, f.values)


class TestFindGoodScale:
    def test_flat_inputs_succeed_immediately(self, fam_tt2):
        ones = GridFunction.constant(J, 1.0)
        rep = find_good_scale(fam_tt2, ones, ones, [None, None], 1.0, K_max=4)
        assert rep.k_found == 0
        assert rep.pairing_value == pytest.approx(1.0, rel=1e-12)

    def test_half_indicator(self, fam_tt2):
        f = block_indicator(J, 0.0, 0.5)
        rep = find_good_scale(fam_tt2, f, f, [None, None], 0.5, K_max=8)
        assert rep.k_found is not None
        assert rep.pairing_value >= 0.01 * 0.5**3

    def test_density_precondition(self, fam_tt2):
        thin = block_indicator(J, 0.0, 0.05)
        with pytest.raises(PreconditionError):
            find_good_scale(fam_tt2, thin, thin, [None, None], 0.5)

    def test_unreachable_target_scans_fully(self, fam_tt2):
        # f0 sits where the t and t^2 hit-windows never overlap (t - t^2 stays
        # outside (-1/8, 1/8) near t = 0.4); no scale fires, the trace shows
        # the whole scan ran
        f = block_indicator(J, 0.0, 0.125)
        f0 = block_indicator(J, 0.4, 0.125)
        rep = find_good_scale(
            fam_tt2, f, f0, [None, None], 0.125, K_max=6, extract=False
        )
        assert rep.k_found is None
        assert [k for k, _ in rep.scan_trace] == list(range(7))
        assert rep.pairing_value < 0.01 * 0.125**3

    def test_monotone_gate(self, fam_tt2):
        f = DyadicSet.random(J, 0.4, 9).indicator()
        strong = find_good_scale(fam_tt2, f, f, [None, None], 0.4, K_max=8, extract=False)
        weak = find_good_scale(fam_tt2, f, f, [None, None], 0.2, K_max=8, extract=False)
        assert strong.k_found is not None
        assert weak.k_found is not None
        assert weak.k_found <= strong.k_found

    def test_mollified_inputs(self, fam_tt2):
        f = DyadicSet.random(J, 0.5, 10).indicator()
        rep = find_good_scale(fam_tt2, f, f, [4, None], 0.5, K_max=8)
        assert rep.k_found is not None

    def test_three_polynomial_family(self):
        from fraclab.families import parse_family

        fam3 = parse_family("t, t^2, t^3")
        for eps, seed in ((0.5, 1), (0.25, 2)):
            f = DyadicSet.random(11, eps, seed).indicator()
            rep = find_good_scale(fam3, f, f, [None] * 3, eps, K_max=8, extract=False)
            assert rep.k_found is not None
            assert rep.k_found <= rep.scan_limit
            assert rep.pairing_value >= 0.01 * eps**4


class TestEnergyExtraction:
    def test_gate_blocks_when_pairing_large(self, fam_tt2):
        ones = GridFunction.constant(J, 1.0)
        out = energy_extraction(fam_tt2, [ones, ones], ones, 0, 0.5)
        assert out is None

    def test_planted_frequency_found(self, fam_tt2):
        # tone planted at 1.75 * 2^(k e_1 + 3) inside a half-circle block;
        # the disjoint pairing partner forces the small-pairing gate open
        k = 2
        eps = 1.0 / 32.0
        x = np.arange(N) / N
        block = block_indicator(J, 0.0, 0.5).values
        tone_freq = int(1.75 * 2 ** (k * 1 + 3))  # 56
        f1 = GridFunction(J, 0.5 * block * (1.0 + np.cos(2 * np.pi * tone_freq * x)))
        f2 = GridFunction(J, 0.5 * block)
        f0 = block_indicator(J, 0.875, 1.0 / 16.0)
        out = energy_extraction(fam_tt2, [f1, f2], f0, k, eps)
        assert out is not None
        assert out.index == 0
        assert out.shift == 3
        assert out.norm >= 0.1

    def test_never_fires_on_deep_lowpass(self, fam_tt2):
        # spectra inside |xi| <= 2^(k e_i - range - 2): every scanned piece is 0
        k, rng_shift = 8, 4
        rng = np.random.default_rng(11)
        f1 = lp_low(GridFunction(J, rng.uniform(0.2, 0.8, N)), 1)
        f2 = lp_low(GridFunction(J, rng.uniform(0.2, 0.8, N)), 1)
        f1 = GridFunction(J, np.clip(f1.values, 0.0, 1.0))
        f2 = GridFunction(J, np.clip(f2.values, 0.0, 1.0))
        f0 = block_indicator(J, 0.9, 0.05)
        out = energy_extraction(
            fam_tt2, [f1, f2], f0, k, 0.05, shift_range=rng_shift
        )
        assert out is None

    @pytest.mark.parametrize("m", [2, 3])
    def test_lm_aggregation_bounded_by_square_function(self, m):
        rng = np.random.default_rng(12)
        f = GridFunction(10, rng.uniform(0, 1, 1 << 10))
        levels = [1, 3, 5, 7]
        total = sum(grid_norm(lp_piece(f, l), m) ** m for l in levels)
        sf = square_function(f)
        assert total <= grid_norm(sf, m) ** m + 1e-12
