#include <doctest.h>

#include <cmath>

#include "gsdm/diffusion.hpp"
#include "gsdm/oracles.hpp"
#include "test_util.hpp"

using namespace gsdm;

TEST_SUITE_BEGIN("diffusion");

TEST_CASE("perturb at t = 0 returns the data exactly") {
    const NoiseSchedule s(ScheduleKind::VP, ScheduleFamily::Linear);
    Rng rng(1);
    const Vec x0 = {1.0, -2.0, 3.0};
    const PerturbResult r = perturb(x0, 0.0, s, rng);
    CHECK(r.x_t == x0);
}

TEST_CASE("perturb matches the closed-form marginal at t = 1 and t = 0.5") {
    const NoiseSchedule s(ScheduleKind::VP, ScheduleFamily::Linear);
    Rng rng(2);
    const std::size_t reps = 100000;
    Vec at_one(reps), at_half(reps);
    for (std::size_t k = 0; k < reps; ++k) {
        at_one[k] = perturb({1.0}, 1.0, s, rng).x_t[0];
        at_half[k] = perturb({1.0}, 0.5, s, rng).x_t[0];
    }
    const auto m1 = testutil::moments(at_one);
    CHECK(std::fabs(m1.mean - 6.56e-3) < 3.0 * m1.se_mean() + 1e-5);
    const auto mh = testutil::moments(at_half);
    const MarginalStats half = s.marginal(0.5);
    CHECK(std::fabs(mh.var - half.std * half.std) < 3.0 * mh.se_var());
    CHECK(std::fabs(mh.mean - half.mean_coef) < 3.0 * mh.se_mean());
}

TEST_CASE("conditional_score") {
    const NoiseSchedule s(ScheduleKind::VP, ScheduleFamily::Linear);
    const Vec x0 = {0.4, -1.2};
    const MarginalStats m = s.marginal(0.6);

    SUBCASE("zero at the conditional mode") {
        const Vec mode = {m.mean_coef * x0[0], m.mean_coef * x0[1]};
        for (double v : conditional_score(mode, x0, 0.6, s)) CHECK(v == 0.0);
    }
    SUBCASE("matches finite differences of the log density") {
        const Vec x_t = {0.9, -0.3};
        const Vec an = conditional_score(x_t, x0, 0.6, s);
        const Vec fd = oracles::fd_conditional_score(x_t, x0, 0.6, s, 1e-5);
        for (std::size_t i = 0; i < an.size(); ++i)
            CHECK(std::fabs(an[i] - fd[i]) / (std::fabs(an[i]) + 1e-12) < 1e-5);
    }
    SUBCASE("linear in the displacement") {
        const Vec x1 = {m.mean_coef * x0[0] + 0.2, m.mean_coef * x0[1] + 0.5};
        const Vec x2 = {m.mean_coef * x0[0] + 0.4, m.mean_coef * x0[1] + 1.0};
        const Vec s1 = conditional_score(x1, x0, 0.6, s);
        const Vec s2 = conditional_score(x2, x0, 0.6, s);
        for (std::size_t i = 0; i < s1.size(); ++i)
            CHECK(s2[i] == doctest::Approx(2.0 * s1[i]).epsilon(1e-12));
    }
    SUBCASE("t = 0 is rejected") {
        CHECK_THROWS_AS(conditional_score(x0, x0, 0.0, s), precondition_error);
    }
}

TEST_CASE("simulate_forward_em with beta = 0 is the identity") {
    const NoiseSchedule frozen(ScheduleKind::VP, ScheduleFamily::Linear, 0.0, 0.0);
    Rng rng(3);
    const Vec x0 = {2.0, -1.0};
    CHECK(simulate_forward_em(x0, frozen, 128, rng) == x0);
}

TEST_CASE("EM endpoint matches the closed form (VP linear)") {
    const NoiseSchedule s(ScheduleKind::VP, ScheduleFamily::Linear);
    Rng rng(4);
    const std::size_t reps = 10000;
    Vec ends(reps);
    for (std::size_t k = 0; k < reps; ++k)
        ends[k] = simulate_forward_em({1.0}, s, 1000, rng)[0];
    const auto m = testutil::moments(ends);
    const MarginalStats ref = s.marginal(1.0);
    CHECK(std::fabs(m.mean - ref.mean_coef) < 4.0 * m.se_mean());
    CHECK(std::fabs(m.var - ref.std * ref.std) < 4.0 * m.se_var());
}

TEST_CASE("EM weak error shrinks as steps double") {
    const NoiseSchedule s(ScheduleKind::VP, ScheduleFamily::Quadratic);
    // a large initial value makes the deterministic mean bias dominate the
    // Monte-Carlo noise (additive noise variance stays O(1))
    const double x0 = 100.0;
    const double exact = s.marginal(1.0).mean_coef * x0;
    const std::size_t reps = 20000;
    Vec gaps;
    // resolutions where every Euler factor 1 - beta*dt/2 stays positive
    for (std::size_t steps : {16, 32, 64}) {
        Rng rng(5);
        double acc = 0.0;
        for (std::size_t k = 0; k < reps; ++k)
            acc += simulate_forward_em({x0}, s, steps, rng)[0];
        gaps.push_back(std::fabs(acc / static_cast<double>(reps) - exact));
    }
    CHECK(gaps[1] < gaps[0]);
    CHECK(gaps[2] < gaps[1]);
}

TEST_CASE("covariance kernel at U = I is the diagonal Brownian kernel") {
    const Mat u = Mat::identity(3);
    CHECK(covariance_kernel(u, {1, 1, 1, 1, 0.3, 0.8}) == doctest::Approx(0.3));
    CHECK(covariance_kernel(u, {0, 0, 1, 1, 0.3, 0.8}) == 0.0);
    CHECK(covariance_kernel(u, {0, 1, 0, 1, 0.5, 0.5}) == 0.0);
    CHECK_THROWS_AS(covariance_kernel(u, {0, 0, 0, 5, 0.5, 0.5}), precondition_error);
}

TEST_CASE("covariance kernel symmetries") {
    Rng rng(6);
    const Mat u = testutil::random_orthonormal(4, rng);
    const KernelIndex base{0, 2, 1, 3, 0.4, 0.4};
    const double v = covariance_kernel(u, base);
    CHECK(covariance_kernel(u, {2, 0, 1, 3, 0.4, 0.4}) == doctest::Approx(v));
    CHECK(covariance_kernel(u, {1, 3, 0, 2, 0.4, 0.4}) == doctest::Approx(v));
}

TEST_CASE("covariance kernel agrees with the Monte-Carlo estimator") {
    Rng rng(7);
    const Mat u = testutil::random_orthonormal(4, rng);
    Rng mc(8);
    Rng pick(9);
    for (int rep = 0; rep < 6; ++rep) {
        KernelIndex idx;
        idx.i = pick.uniform_index(4);
        idx.j = pick.uniform_index(4);
        idx.k = pick.uniform_index(4);
        idx.l = pick.uniform_index(4);
        idx.s = 0.1 + 0.9 * pick.uniform();
        idx.t = 0.1 + 0.9 * pick.uniform();
        const auto est = oracles::mc_covariance(u, idx, 200000, mc);
        const double exact = covariance_kernel(u, idx);
        CHECK(std::fabs(est.estimate - exact) < 3.0 * est.std_error);
    }
}

TEST_CASE("sample_m") {
    Rng rng(10);
    const Mat u = testutil::random_orthonormal(3, rng);

    SUBCASE("t = 0 gives the zero matrix") {
        Rng r2(11);
        CHECK(max_abs(sample_m(u, 0.0, r2)) == 0.0);
    }
    SUBCASE("symmetric within 1e-12") {
        Rng r2(12);
        const Mat m = sample_m(u, 0.7, r2);
        CHECK(is_symmetric(m, 1e-12));
    }
    SUBCASE("per-entry variance matches K(1,1)") {
        Rng r2(13);
        const std::size_t reps = 100000;
        Vec e01(reps), e11(reps);
        for (std::size_t k = 0; k < reps; ++k) {
            const Mat m = sample_m(u, 1.0, r2);
            e01[k] = m(0, 1);
            e11[k] = m(1, 1);
        }
        const auto m01 = testutil::moments(e01);
        const auto m11 = testutil::moments(e11);
        CHECK(std::fabs(m01.var - covariance_kernel(u, {0, 1, 0, 1, 1.0, 1.0})) <
              3.0 * m01.se_var());
        CHECK(std::fabs(m11.var - covariance_kernel(u, {1, 1, 1, 1, 1.0, 1.0})) <
              3.0 * m11.se_var());
    }
    SUBCASE("draws stay in the fixed-basis subspace") {
        Rng r2(14);
        const Mat m = sample_m(u, 0.5, r2);
        // project onto {U D U^T}: D = diag(U^T M U)
        const Mat utmu = matmul(transpose(u), matmul(m, u));
        Vec diag(3);
        for (std::size_t i = 0; i < 3; ++i) diag[i] = utmu(i, i);
        const Mat back = recombine_diag(u, diag);
        CHECK(max_abs_diff(back, m) < 1e-10);
    }
    SUBCASE("negative time is rejected") {
        Rng r2(15);
        CHECK_THROWS_AS(sample_m(u, -0.1, r2), precondition_error);
    }
}

TEST_CASE("VE closed form vs EM") {
    const NoiseSchedule s(ScheduleKind::VE, ScheduleFamily::Linear);
    Rng rng(16);
    const std::size_t reps = 10000;
    Vec ends(reps);
    for (std::size_t k = 0; k < reps; ++k)
        ends[k] = simulate_forward_em({1.5}, s, 1000, rng)[0];
    const auto m = testutil::moments(ends);
    const MarginalStats ref = s.marginal(1.0);
    CHECK(std::fabs(m.mean - 1.5) < 4.0 * m.se_mean());
    CHECK(std::fabs(m.var - ref.std * ref.std) < 4.0 * m.se_var());
}

TEST_SUITE_END();
