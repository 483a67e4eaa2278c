#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>

#include "gsdm/scorenet.hpp"
#include "test_util.hpp"

using namespace gsdm;

namespace {

ScoreNetArch tiny_arch(std::size_t d = 2, NetVariant variant = NetVariant::Spectral) {
    ScoreNetArch a;
    a.d = d;
    a.hidden = 4;
    a.temb = 4;
    a.variant = variant;
    return a;
}

// randomize every tensor, including the zero-initialized heads
ScoreNetParams randomized(const ScoreNetArch& arch, std::uint64_t seed) {
    ScoreNetParams p = ScoreNetParams::init(arch, seed);
    Rng rng(seed, {0xa11u});
    p.for_each_tensor([&](const std::string&, Vec& v) {
        for (double& x : v) x = 0.4 * rng.gaussian();
    });
    return p;
}

TrainExample random_example(std::size_t n, std::size_t d, NetVariant variant,
                            std::uint64_t seed) {
    Rng rng(seed);
    TrainExample ex;
    ex.t = 0.3 + 0.5 * rng.uniform();
    ex.marg_x = {0.7, 0.6};
    ex.marg_lambda = {0.5, 0.8};
    ex.x_t = Mat(n, d);
    ex.eps_x = Mat(n, d);
    rng.fill_gaussian(ex.x_t);
    rng.fill_gaussian(ex.eps_x);
    if (variant == NetVariant::Spectral) {
        ex.u = testutil::random_orthonormal(n, rng);
        ex.lambda_t.resize(n);
        ex.eps_lambda.resize(n);
        rng.fill_gaussian(ex.lambda_t);
        rng.fill_gaussian(ex.eps_lambda);
    } else {
        const std::size_t pairs = n * (n - 1) / 2;
        ex.lambda_t.resize(pairs);
        ex.eps_lambda.resize(pairs);
        rng.fill_gaussian(ex.lambda_t);
        rng.fill_gaussian(ex.eps_lambda);
        ex.a_t = adjacency_from_upper_triangle(ex.lambda_t, n);
    }
    return ex;
}

}  // namespace

TEST_SUITE_BEGIN("scorenet");

TEST_CASE("time embedding is deterministic and bounded") {
    const Vec e1 = time_embedding(0.37, 8);
    const Vec e2 = time_embedding(0.37, 8);
    CHECK(e1 == e2);
    CHECK(e1.size() == 8);
    for (double v : e1) CHECK(std::fabs(v) <= 1.0);
    CHECK_THROWS_AS(time_embedding(0.5, 3), precondition_error);
}

TEST_CASE("zero-initialized heads produce zero outputs") {
    const ScoreNetParams p = ScoreNetParams::init(tiny_arch(), 5);
    Rng rng(6);
    const std::size_t n = 5;
    Mat x(n, 2);
    rng.fill_gaussian(x);
    Vec lam(n);
    rng.fill_gaussian(lam);
    const Mat u = testutil::random_orthonormal(n, rng);
    CHECK(max_abs(feature_raw(p, x, lam, u, 0.5)) == 0.0);
    for (double v : spectrum_raw(p, x, lam, u, 0.5)) CHECK(v == 0.0);

    const ScoreNetParams pf = ScoreNetParams::init(tiny_arch(2, NetVariant::FullRank), 5);
    const Vec av = adjacency_upper_triangle(testutil::random_symmetric(n, rng));
    const Mat a = adjacency_from_upper_triangle(av, n);
    for (double v : pair_raw(pf, x, a, av, 0.5)) CHECK(v == 0.0);
    CHECK(max_abs(feature_raw_fullrank(pf, x, a, 0.5)) == 0.0);
}

TEST_CASE("spectrum net is equivariant under eigen-index permutation") {
    const ScoreNetParams p = randomized(tiny_arch(), 7);
    Rng rng(8);
    const std::size_t n = 6;
    Mat x(n, 2);
    rng.fill_gaussian(x);
    Vec lam(n);
    rng.fill_gaussian(lam);
    const Mat u = testutil::random_orthonormal(n, rng);

    const Vec base = spectrum_raw(p, x, lam, u, 0.4);

    std::vector<std::size_t> perm = {3, 0, 5, 1, 4, 2};
    Vec plam(n);
    Mat pu(n, n);
    for (std::size_t c = 0; c < n; ++c) {
        plam[c] = lam[perm[c]];
        for (std::size_t r = 0; r < n; ++r) pu(r, c) = u(r, perm[c]);
    }
    const Vec permuted = spectrum_raw(p, x, plam, pu, 0.4);
    for (std::size_t c = 0; c < n; ++c)
        CHECK(permuted[c] == doctest::Approx(base[perm[c]]).epsilon(1e-12));
}

TEST_CASE("feature net is equivariant under node permutation") {
    const ScoreNetParams p = randomized(tiny_arch(), 9);
    Rng rng(10);
    const std::size_t n = 5;
    Mat x(n, 2);
    rng.fill_gaussian(x);
    Vec lam(n);
    rng.fill_gaussian(lam);
    const Mat u = testutil::random_orthonormal(n, rng);

    const Mat base = feature_raw(p, x, lam, u, 0.6);

    std::vector<std::size_t> perm = {2, 4, 0, 3, 1};  // row i of permuted = row perm[i]
    Mat px(n, 2), pu(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < 2; ++j) px(i, j) = x(perm[i], j);
        for (std::size_t j = 0; j < n; ++j) pu(i, j) = u(perm[i], j);
    }
    const Mat permuted = feature_raw(p, px, lam, pu, 0.6);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            CHECK(permuted(i, j) == doctest::Approx(base(perm[i], j)).epsilon(1e-12));
}

TEST_CASE("size-agnostic: one parameter set serves any node count") {
    const ScoreNetParams p = randomized(tiny_arch(), 11);
    for (std::size_t n : {5, 17, 40}) {
        Rng rng(n);
        Mat x(n, 2);
        rng.fill_gaussian(x);
        Vec lam(n);
        rng.fill_gaussian(lam);
        const Mat u = testutil::random_orthonormal(n, rng);
        CHECK(spectrum_raw(p, x, lam, u, 0.5).size() == n);
        const Mat out = feature_raw(p, x, lam, u, 0.5);
        CHECK(out.rows() == n);
        CHECK(out.cols() == 2);
    }
}

TEST_CASE("outputs stay finite for inputs of magnitude 1e3") {
    const ScoreNetParams p = randomized(tiny_arch(), 12);
    Rng rng(13);
    const std::size_t n = 6;
    Mat x(n, 2);
    for (double& v : x.raw()) v = 1e3 * rng.gaussian();
    Vec lam(n);
    for (double& v : lam) v = 1e3 * rng.gaussian();
    const Mat u = testutil::random_orthonormal(n, rng);
    CHECK(all_finite(feature_raw(p, x, lam, u, 0.9)));
    CHECK(all_finite(spectrum_raw(p, x, lam, u, 0.9)));
}

TEST_CASE("forward pass is deterministic") {
    const ScoreNetParams p = randomized(tiny_arch(), 14);
    const TrainExample ex = random_example(6, 2, NetVariant::Spectral, 15);
    const Vec a = spectrum_raw(p, ex.x_t, ex.lambda_t, ex.u, ex.t);
    const Vec b = spectrum_raw(p, ex.x_t, ex.lambda_t, ex.u, ex.t);
    CHECK(a == b);
}

TEST_CASE("oracle network: zero loss and zero grads when targets are met") {
    const ScoreNetParams p = ScoreNetParams::init(tiny_arch(), 16);
    TrainExample ex = random_example(5, 2, NetVariant::Spectral, 17);
    // zero heads predict a clean signal of zero; a consistent example with
    // x0 = 0 has x_t = std * eps, making the predicted noise exact.
    // power-of-two marginals keep the float cancellation exact
    ex.marg_x = {0.5, 0.5};
    ex.marg_lambda = {0.5, 0.5};
    for (std::size_t i = 0; i < ex.x_t.size(); ++i)
        ex.x_t.raw()[i] = ex.marg_x.std * ex.eps_x.raw()[i];
    for (std::size_t i = 0; i < ex.lambda_t.size(); ++i)
        ex.lambda_t[i] = ex.marg_lambda.std * ex.eps_lambda[i];
    ScoreNetParams grads = p.zeros_like();
    const LossBreakdown l = loss_and_grads(p, {ex}, grads);
    CHECK(l.total == 0.0);
    grads.for_each_tensor([](const std::string&, const Vec& v) {
        for (double g : v) CHECK(g == 0.0);
    });
    CHECK(grad_check(p, {ex}, 1e-5) == 0.0);  // 0/0 guard
}

TEST_CASE("analytic gradients match central differences") {
    for (const NetVariant variant : {NetVariant::Spectral, NetVariant::FullRank}) {
        const ScoreNetParams p = randomized(tiny_arch(2, variant), 18);
        const std::vector<TrainExample> batch = {random_example(5, 2, variant, 19),
                                                 random_example(4, 2, variant, 20)};
        CHECK(grad_check(p, batch, 1e-5) < 1e-4);
    }
}

TEST_CASE("grad_check detects a coarse step") {
    const ScoreNetParams p = randomized(tiny_arch(), 21);
    const std::vector<TrainExample> batch = {random_example(5, 2, NetVariant::Spectral, 22)};
    const double fine = grad_check(p, batch, 1e-5);
    const double coarse = grad_check(p, batch, 1e-1);
    CHECK(coarse > fine);
    CHECK(fine < 1e-4);
}

TEST_CASE("randomized tiny configurations pass the gradient check") {
    for (std::uint64_t rep = 0; rep < 8; ++rep) {
        ScoreNetArch a = tiny_arch(1 + rep % 3, rep % 2 ? NetVariant::FullRank
                                                        : NetVariant::Spectral);
        a.use_u_features = rep % 3 != 0;
        const ScoreNetParams p = randomized(a, 100 + rep);
        const std::vector<TrainExample> batch = {
            random_example(3 + rep % 4, a.d, a.variant, 200 + rep)};
        CHECK(grad_check(p, batch, 1e-5) < 1e-4);
    }
}

TEST_CASE("loss rejects an empty batch") {
    const ScoreNetParams p = ScoreNetParams::init(tiny_arch(), 23);
    CHECK_THROWS_AS(loss_only(p, {}), precondition_error);
}

TEST_CASE("checkpoint round-trip preserves every parameter") {
    const std::string path = std::string(GSDM_TEST_TMP) + "/params_roundtrip.bin";
    const ScoreNetParams p = randomized(tiny_arch(3), 24);
    save_params(p, path);
    const ScoreNetParams q = load_params(path);
    CHECK(q.arch == p.arch);
    std::vector<const Vec*> pv, qv;
    p.for_each_tensor([&](const std::string&, const Vec& v) { pv.push_back(&v); });
    q.for_each_tensor([&](const std::string&, const Vec& v) { qv.push_back(&v); });
    REQUIRE(pv.size() == qv.size());
    for (std::size_t i = 0; i < pv.size(); ++i) CHECK(*pv[i] == *qv[i]);
}

TEST_CASE("corrupt checkpoint header is rejected") {
    const std::string path = std::string(GSDM_TEST_TMP) + "/corrupt.bin";
    std::FILE* f = std::fopen(path.c_str(), "wb");
    std::fputs("NOTACKPT-garbage", f);
    std::fclose(f);
    CHECK_THROWS_AS(load_params(path), format_error);
}

TEST_CASE("truncated tensor data is rejected") {
    const std::string path = std::string(GSDM_TEST_TMP) + "/truncated.bin";
    const ScoreNetParams p = ScoreNetParams::init(tiny_arch(), 25);
    save_params(p, path);
    // chop off the tail
    std::FILE* f = std::fopen(path.c_str(), "rb+");
    std::fseek(f, 0, SEEK_END);
    const long size = std::ftell(f);
    std::fclose(f);
    std::filesystem::resize_file(path, static_cast<std::uintmax_t>(size - 16));
    CHECK_THROWS_AS(load_params(path), format_error);
}

TEST_SUITE_END();
