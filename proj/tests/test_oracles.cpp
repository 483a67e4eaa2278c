#include <doctest.h>

#include <cmath>

#include "gsdm/diffusion.hpp"
#include "gsdm/oracles.hpp"
#include "test_util.hpp"

using namespace gsdm;

TEST_SUITE_BEGIN("oracles");

TEST_CASE("analytic gaussian score") {
    const NoiseSchedule s(ScheduleKind::VP, ScheduleFamily::Linear);
    SUBCASE("zero at the marginal mean") {
        const MarginalStats m = s.marginal(0.7);
        const Vec x = {m.mean_coef * 2.0};
        CHECK(oracles::analytic_gaussian_score(x, 0.7, 2.0, 0.5, s)[0] == 0.0);
    }
    SUBCASE("s0 = 0 reduces to the conditional score") {
        const Vec x = {0.4, -0.9};
        const Vec x0 = {2.0, 2.0};
        const Vec a = oracles::analytic_gaussian_score(x, 0.6, 2.0, 0.0, s);
        const Vec b = conditional_score(x, x0, 0.6, s);
        for (std::size_t i = 0; i < x.size(); ++i)
            CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
    }
    SUBCASE("matches finite differences of the marginal log density") {
        const Vec x = {0.3, 1.7, -2.2};
        const Vec an = oracles::analytic_gaussian_score(x, 0.4, 1.5, 0.8, s);
        const Vec fd = oracles::fd_gaussian_marginal_score(x, 0.4, 1.5, 0.8, s, 1e-5);
        for (std::size_t i = 0; i < x.size(); ++i)
            CHECK(std::fabs(an[i] - fd[i]) / (std::fabs(an[i]) + 1e-12) < 1e-6);
    }
}

TEST_CASE("mc_covariance sanity on the identity basis") {
    const Mat u = Mat::identity(3);
    Rng rng(70);
    SUBCASE("diagonal entry estimates min(s, t)") {
        const auto est = oracles::mc_covariance(u, {1, 1, 1, 1, 0.4, 0.9}, 50000, rng);
        CHECK(std::fabs(est.estimate - 0.4) < 3.0 * est.std_error);
        CHECK(est.std_error > 0.0);
    }
    SUBCASE("off-support index estimates zero") {
        const auto est = oracles::mc_covariance(u, {0, 0, 0, 1, 0.5, 0.5}, 50000, rng);
        CHECK(std::fabs(est.estimate) < 3.0 * est.std_error + 1e-12);
    }
    SUBCASE("sample floor is enforced") {
        CHECK_THROWS_AS(oracles::mc_covariance(u, {0, 0, 0, 0, 0.5, 0.5}, 10, rng),
                        precondition_error);
    }
}

TEST_CASE("naive_mmd hand expansions") {
    SUBCASE("identical singletons") {
        CHECK(oracles::naive_mmd({{0.5}}, {{0.5}}, MmdKernel::GaussianRBF, 1.0) ==
              doctest::Approx(0.0));
    }
    SUBCASE("two-element sets match the symbolic expansion") {
        const std::vector<Vec> a = {{0.0}, {1.0}};
        const std::vector<Vec> b = {{2.0}};
        const double bw = 1.0;
        auto k = [&](double x, double y) {
            return std::exp(-(x - y) * (x - y) / (2.0 * bw * bw));
        };
        const double expect = (k(0, 0) + k(0, 1) + k(1, 0) + k(1, 1)) / 4.0 + k(2, 2) -
                              2.0 * (k(0, 2) + k(1, 2)) / 2.0;
        CHECK(oracles::naive_mmd(a, b, MmdKernel::GaussianRBF, bw) ==
              doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("the mutated kernel is detectably wrong") {
    Rng rng(71);
    const Mat u = testutil::random_orthonormal(4, rng);
    const KernelIndex idx{2, 2, 2, 2, 0.3, 0.9};
    Rng mc(72);
    const auto est = oracles::mc_covariance(u, idx, 200000, mc);
    const double good = covariance_kernel(u, idx);
    const double bad = oracles::covariance_kernel_mutated(u, idx);
    CHECK(std::fabs(est.estimate - good) < 3.0 * est.std_error);
    CHECK(std::fabs(est.estimate - bad) > 3.0 * est.std_error);
}

TEST_CASE("quadrature oracle handles the two-level discontinuity") {
    const NoiseSchedule s(ScheduleKind::VP, ScheduleFamily::TwoLevel);
    const double q = oracles::beta_quadrature(s, 0.0, 1.0, 100000);
    CHECK(std::fabs(q - s.integral_beta(0.0, 1.0)) < 1e-6);
}

TEST_SUITE_END();
