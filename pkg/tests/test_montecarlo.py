import math

import numpy as np
import pytest

from spacemimo import analytic as an
from spacemimo import montecarlo as mc
from spacemimo.array_channel import ArrayMode, make_geometry
from spacemimo.errors import DomainError

SC = ArrayMode.SPACE_CONSTRAINED
REF = ArrayMode.HALF_WAVELENGTH_REFERENCE


@pytest.fixture(scope="module")
def moments_200_4():
    return mc.estimate_inner_moments(make_geometry(SC, 200, 4), mc.TrialPlan(100_000, seed=1))


class TestTrialPlan:
    @pytest.mark.parametrize("kw", [dict(trials=0), dict(trials=10, workers=0),
                                    dict(trials=10, seed=-1), dict(trials=10, seed=2 ** 64),
                                    dict(trials=2.5)])
    def test_rejects(self, kw):
        with pytest.raises(DomainError):
            mc.TrialPlan(**kw)

    def test_draws_do_not_depend_on_trial_count(self):
        a = mc.draw_sines(5, 0, 10, 3)
        b = mc.draw_sines(5, 0, mc.BLOCK_TRIALS, 3)
        np.testing.assert_array_equal(a, b[:10])

    def test_blocks_are_distinct_streams(self):
        assert not np.array_equal(mc.draw_sines(5, 0, 8, 2), mc.draw_sines(5, 1, 8, 2))
        assert not np.array_equal(mc.draw_sines(5, 0, 8, 2), mc.draw_sines(6, 0, 8, 2))


class TestInnerMoments:
    def test_reference_variance(self):
        est = mc.estimate_inner_moments(make_geometry(REF, 100), mc.TrialPlan(100_000, seed=2))
        assert abs(est.variance_scaled - 0.0099) <= 4 * est.stderr_variance

    def test_mean_matches_exact(self, moments_200_4):
        est = moments_200_4
        assert abs(est.mean_scaled.real - an.exact_mean_scaled(200, 4)) <= 3 * est.stderr_mean

    def test_variance_matches_exact(self, moments_200_4):
        est = moments_200_4
        assert abs(est.variance_scaled - an.exact_variance_scaled(200, 4)) <= \
            4 * est.stderr_variance

    def test_mean_is_real(self, moments_200_4):
        assert abs(moments_200_4.mean_scaled.imag) <= 4 * moments_200_4.stderr_mean

    def test_estimate_invariants(self, moments_200_4):
        est = moments_200_4
        assert est.trials == 100_000
        assert est.variance_scaled == pytest.approx(
            est.second_moment_scaled - abs(est.mean_scaled) ** 2, abs=1e-15)
        assert est.variance_scaled >= -1e-12

    @pytest.mark.parametrize("N, d0", [(16, 4), (64, 4), (300, 2), (1000, 10)])
    def test_statistical_consistency(self, N, d0):
        est = mc.estimate_inner_moments(make_geometry(SC, N, d0), mc.TrialPlan(100_000, seed=3))
        ex = an.exact_moments(N, d0)
        assert abs(est.mean_scaled.real - ex.mean_scaled) <= 4 * est.stderr_mean
        assert abs(est.second_moment_scaled - ex.second_moment_scaled) <= 4 * est.stderr_second

    def test_direct_and_closed_form_paths_agree(self):
        g = make_geometry(SC, 200, 7.0)
        u = mc.draw_sines(0, 0, 1000, 2)
        direct = mc._scaled_inner(g, u)
        from spacemimo.array_channel import dirichlet_kernel
        closed = dirichlet_kernel(200, g.phase_scale * (u[:, 0] - u[:, 1])) / 200
        np.testing.assert_allclose(direct, closed, rtol=0, atol=1e-14)

    @pytest.mark.parametrize("workers", [2, 4, 8])
    def test_worker_count_is_irrelevant(self, workers):
        g = make_geometry(SC, 64, 4)
        one = mc.estimate_inner_moments(g, mc.TrialPlan(20_000, seed=9, workers=1))
        many = mc.estimate_inner_moments(g, mc.TrialPlan(20_000, seed=9, workers=workers))
        assert one == many


class TestSumRate:
    @pytest.mark.parametrize("geom", [make_geometry(SC, 64, 4), make_geometry(REF, 300)])
    def test_single_user_is_deterministic(self, geom):
        est = mc.estimate_sum_rate_mrt(geom, 1, 0.37, mc.TrialPlan(5000, seed=4))
        assert est.sum_rate == math.log2(1 + 0.37 * geom.num_antennas)
        assert est.stderr == 0.0

    def test_reference_grows_with_N(self):
        plan = mc.TrialPlan(10_000, seed=5)
        rates = [mc.estimate_sum_rate_mrt(make_geometry(REF, N), 10, 0.01, plan).sum_rate
                 for N in (100, 200, 300, 400)]
        assert np.all(np.diff(rates) > 0)

    def test_saturation_512_to_1024(self):
        plan = mc.TrialPlan(10_000, seed=6)
        r512 = mc.estimate_sum_rate_mrt(make_geometry(SC, 512, 4), 10, 0.01, plan).sum_rate
        r1024 = mc.estimate_sum_rate_mrt(make_geometry(SC, 1024, 4), 10, 0.01, plan).sum_rate
        assert abs(r1024 - r512) / r512 < 0.02

    def test_ceiling_approached_at_high_snr(self):
        # with noise negligible the per-user SINR depends on N only through the
        # vanishing finite-N correction, so doubling N barely moves the rate
        plan = mc.TrialPlan(10_000, seed=6)
        r = [mc.estimate_sum_rate_mrt(make_geometry(SC, N, 4), 10, 10.0, plan).sum_rate
             for N in (512, 1024)]
        assert abs(r[1] - r[0]) / r[0] < 0.02

    def test_rate_nondecreasing_in_snr(self):
        g = make_geometry(SC, 128, 4)
        plan = mc.TrialPlan(4096, seed=7)
        rates = [mc.estimate_sum_rate_mrt(g, 10, rho, plan).sum_rate
                 for rho in (0.001, 0.01, 0.1, 1.0, 10.0)]
        assert np.all(np.diff(rates) >= 0)

    @pytest.mark.parametrize("N, d0", [(200, 4), (64, 10), (512, 4), (300, None)])
    def test_jensen_bound_below_estimate(self, N, d0):
        geom = make_geometry(REF, N) if d0 is None else make_geometry(SC, N, d0)
        est = mc.estimate_sum_rate_mrt(geom, 10, 0.01, mc.TrialPlan(10_000, seed=8))
        bound = an.jensen_sum_rate_bound(N, 10, geom.aperture, 0.01)
        assert bound <= est.sum_rate + 4 * est.stderr

    def test_estimate_fields(self):
        g = make_geometry(SC, 300, 2.5)
        est = mc.estimate_sum_rate_mrt(g, 6, 0.5, mc.TrialPlan(3000, seed=1))
        assert est.sum_rate == pytest.approx(6 * est.per_user_rate, abs=1e-12)
        assert est.sum_rate >= 0
        assert (est.N, est.K, est.d0, est.reference, est.rho_eff) == (300, 6, 2.5, False, 0.5)

    def test_direct_and_closed_form_rates_agree(self):
        # N = 256 takes the direct path; compare with the Dirichlet power
        g = make_geometry(SC, 256, 4)
        u = mc.draw_sines(1, 0, 200, 5)
        direct = mc._interference_power(g, u)
        from spacemimo.array_channel import dirichlet_power
        closed = dirichlet_power(256, g.phase_scale * (u[:, :, None] - u[:, None, :]))
        np.testing.assert_allclose(direct, closed, rtol=1e-10, atol=1e-9)

    @pytest.mark.parametrize("workers", [3, 8])
    def test_worker_count_is_irrelevant(self, workers):
        g = make_geometry(SC, 700, 4)
        one = mc.estimate_sum_rate_mrt(g, 10, 0.01, mc.TrialPlan(9000, seed=2))
        many = mc.estimate_sum_rate_mrt(g, 10, 0.01, mc.TrialPlan(9000, seed=2, workers=workers))
        assert one == many

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            mc.estimate_sum_rate_mrt(make_geometry(SC, 4, 1), 5, 1.0, mc.TrialPlan(10))
        with pytest.raises(DomainError):
            mc.estimate_sum_rate_mrt(make_geometry(SC, 4, 1), 2, 0.0, mc.TrialPlan(10))


class TestQuadrature:
    @pytest.mark.parametrize("order", [4, 17, 100])
    def test_single_antenna(self, order):
        g = make_geometry(SC, 1, 3.0)
        assert mc.quadrature_second_moment(g, order) == pytest.approx(1.0, rel=1e-14)

    def test_converged_against_exact(self):
        g = make_geometry(SC, 8, 4)
        q400 = mc.quadrature_second_moment(g, 400)
        q800 = mc.quadrature_second_moment(g, 800)
        assert abs(q800 - q400) < 1e-8
        assert q400 == pytest.approx(an.exact_second_moment_scaled(8, 4), rel=1e-6)

    def test_half_wavelength(self):
        assert mc.quadrature_second_moment(make_geometry(REF, 4), 400) == pytest.approx(
            0.25, abs=1e-6)

    @pytest.mark.parametrize("N, d0", [(3, 1.7), (12, 2.0), (32, 5.0)])
    def test_other_geometries(self, N, d0):
        g = make_geometry(SC, N, d0)
        assert mc.quadrature_second_moment(g, 400) == pytest.approx(
            an.exact_second_moment_scaled(N, d0), rel=1e-6)

    def test_order_validation(self):
        with pytest.raises(DomainError):
            mc.quadrature_second_moment(make_geometry(SC, 4, 1), 3)
