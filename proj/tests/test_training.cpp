#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numeric>

#include "gsdm/datasets.hpp"
#include "gsdm/oracles.hpp"
#include "gsdm/training.hpp"
#include "test_util.hpp"

using namespace gsdm;

namespace {

std::vector<SpectralGraph> toy_dataset(std::size_t count, std::size_t n, std::uint64_t seed) {
    std::vector<Graph> graphs;
    for (std::size_t k = 0; k < count; ++k) {
        Rng rng(seed, {k});
        graphs.push_back(testutil::random_er_graph(n, 0.4, rng));
    }
    return prepare_dataset(graphs);
}

bool params_equal(const ScoreNetParams& a, const ScoreNetParams& b) {
    std::vector<const Vec*> av, bv;
    a.for_each_tensor([&](const std::string&, const Vec& v) { av.push_back(&v); });
    b.for_each_tensor([&](const std::string&, const Vec& v) { bv.push_back(&v); });
    if (av.size() != bv.size()) return false;
    for (std::size_t i = 0; i < av.size(); ++i)
        if (*av[i] != *bv[i]) return false;
    return true;
}

ScoreNetArch arch_for(const std::vector<SpectralGraph>& data, std::size_t hidden = 16) {
    ScoreNetArch a;
    a.d = data.front().g.d;
    a.hidden = hidden;
    a.temb = 8;
    return a;
}

}  // namespace

TEST_SUITE_BEGIN("training");

TEST_CASE("overfitting a single graph drives the loss below 10% of its start") {
    const auto data = toy_dataset(1, 8, 31);
    TrainConfig cfg;
    cfg.epochs = 500;  // one step per epoch on a singleton dataset
    cfg.batch = 1;
    cfg.lr = 4e-3;
    cfg.seed = 3;
    const NoiseSchedule sched(ScheduleKind::VP, ScheduleFamily::Linear);
    const TrainResult r = train(data, arch_for(data), cfg, sched, sched);
    REQUIRE(r.history.size() == 500);
    const double first = r.history.front().loss_x + r.history.front().loss_lambda;
    const double last = r.history.back().loss_x + r.history.back().loss_lambda;
    CHECK(last < 0.1 * first);
}

TEST_CASE("zero epochs returns the initial parameters") {
    const auto data = toy_dataset(4, 6, 32);
    TrainConfig cfg;
    cfg.epochs = 0;
    cfg.seed = 9;
    const NoiseSchedule sched(ScheduleKind::VP, ScheduleFamily::Linear);
    const TrainResult r = train(data, arch_for(data), cfg, sched, sched);
    CHECK(r.history.empty());
    CHECK(params_equal(r.params, ScoreNetParams::init(arch_for(data), cfg.seed)));
}

TEST_CASE("training is deterministic for a fixed seed") {
    const auto data = toy_dataset(6, 7, 33);
    TrainConfig cfg;
    cfg.epochs = 4;
    cfg.batch = 4;
    cfg.seed = 77;
    const NoiseSchedule sched(ScheduleKind::VP, ScheduleFamily::Linear);
    const TrainResult a = train(data, arch_for(data), cfg, sched, sched);
    const TrainResult b = train(data, arch_for(data), cfg, sched, sched);
    CHECK(params_equal(a.params, b.params));
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t i = 0; i < a.history.size(); ++i) {
        CHECK(a.history[i].loss_x == b.history[i].loss_x);
        CHECK(a.history[i].loss_lambda == b.history[i].loss_lambda);
    }
}

TEST_CASE("a split run resumes bit-identically") {
    const auto data = toy_dataset(8, 6, 34);
    const NoiseSchedule sched(ScheduleKind::VP, ScheduleFamily::Linear);
    const std::string dir = std::string(GSDM_TEST_TMP) + "/resume_ckpt";
    std::filesystem::remove_all(dir);

    TrainConfig full;
    full.epochs = 6;
    full.batch = 4;
    full.seed = 55;
    const TrainResult whole = train(data, arch_for(data), full, sched, sched);

    TrainConfig half = full;
    half.epochs = 3;
    half.ckpt_dir = dir;
    const TrainResult first = train(data, arch_for(data), half, sched, sched);
    REQUIRE(!first.last_checkpoint.empty());

    TrainConfig rest = full;  // run to 6 epochs total
    const TrainResult second = resume(first.last_checkpoint, data, rest, sched, sched);

    CHECK(params_equal(second.params, whole.params));
    // the resumed loss trajectory reproduces the tail of the unsplit run
    REQUIRE(whole.history.size() == first.history.size() + second.history.size());
    for (std::size_t i = 0; i < second.history.size(); ++i) {
        const LossRecord& w = whole.history[first.history.size() + i];
        CHECK(second.history[i].step == w.step);
        CHECK(second.history[i].loss_x == w.loss_x);
        CHECK(second.history[i].loss_lambda == w.loss_lambda);
    }
}

TEST_CASE("resume rejects incompatible architectures") {
    const auto data = toy_dataset(3, 6, 35);
    const NoiseSchedule sched(ScheduleKind::VP, ScheduleFamily::Linear);
    const std::string dir = std::string(GSDM_TEST_TMP) + "/mismatch_ckpt";
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.batch = 2;
    cfg.ckpt_dir = dir;
    const TrainResult r = train(data, arch_for(data), cfg, sched, sched);

    // dataset with a different feature dimension
    std::vector<Graph> other;
    Rng rng(36);
    Mat a = testutil::random_er_graph(6, 0.5, rng).a;
    other.emplace_back(Mat(6, 3), std::move(a));
    const auto prepared = prepare_dataset(other);
    CHECK_THROWS_AS(resume(r.last_checkpoint, prepared, cfg, sched, sched),
                    precondition_error);
}

TEST_CASE("resume requires optimizer state in the file") {
    const auto data = toy_dataset(3, 6, 37);
    const NoiseSchedule sched(ScheduleKind::VP, ScheduleFamily::Linear);
    const std::string path = std::string(GSDM_TEST_TMP) + "/params_only.bin";
    save_params(ScoreNetParams::init(arch_for(data), 1), path);
    TrainConfig cfg;
    cfg.epochs = 1;
    CHECK_THROWS_AS(resume(path, data, cfg, sched, sched), format_error);
}

TEST_CASE("trailing loss beats the opening loss on a smoke run") {
    const auto data = toy_dataset(10, 8, 38);
    TrainConfig cfg;
    cfg.epochs = 120;
    cfg.batch = 5;
    cfg.lr = 2e-3;
    cfg.seed = 4;
    const NoiseSchedule sched(ScheduleKind::VP, ScheduleFamily::Linear);
    const TrainResult r = train(data, arch_for(data), cfg, sched, sched);
    REQUIRE(r.history.size() >= 200);
    auto window_mean = [&](std::size_t lo, std::size_t hi) {
        double acc = 0.0;
        for (std::size_t i = lo; i < hi; ++i)
            acc += r.history[i].loss_x + r.history[i].loss_lambda;
        return acc / static_cast<double>(hi - lo);
    };
    CHECK(window_mean(r.history.size() - 100, r.history.size()) < window_mean(0, 100));
}

TEST_CASE("trained spectrum score approaches the analytic Gaussian score") {
    // weighted graphs whose spectra are i.i.d. Gaussian draws
    const double mu = 0.8, s0 = 0.6;
    const std::size_t n = 6;
    std::vector<Graph> graphs;
    for (std::size_t k = 0; k < 48; ++k) {
        Rng rng(700 + k);
        Vec lambda(n);
        for (double& v : lambda) v = mu + s0 * rng.gaussian();
        const Mat u = testutil::random_orthonormal(n, rng);
        Mat a = symmetrize(recombine_diag(u, lambda));
        Mat x(n, 1);
        for (std::size_t i = 0; i < n; ++i) x(i, 0) = 1.0;
        graphs.emplace_back(std::move(x), std::move(a), true);
    }
    const auto data = prepare_dataset(graphs);

    TrainConfig cfg;
    cfg.epochs = 400;
    cfg.batch = 16;
    cfg.lr = 3e-3;
    cfg.seed = 11;
    const NoiseSchedule sched(ScheduleKind::VP, ScheduleFamily::Linear);
    ScoreNetArch arch = arch_for(data, 24);
    const TrainResult r = train(data, arch, cfg, sched, sched);

    // probe the learned score near t = 1 on a grid around the marginal mean
    const double t = 0.9;
    const MarginalStats m = sched.marginal(t);
    const double probe_sd = std::sqrt(m.mean_coef * m.mean_coef * s0 * s0 + m.std * m.std);
    double num = 0.0, den = 0.0;
    Rng rng(39);
    const Mat u = testutil::random_orthonormal(n, rng);
    Mat x(n, 1, 1.0);
    for (int k = -4; k <= 4; ++k) {
        Vec lam(n, m.mean_coef * mu + probe_sd * 0.5 * static_cast<double>(k));
        const Vec learned = spectrum_score(r.params, x, lam, u, t, sched);
        const Vec exact = oracles::analytic_gaussian_score(lam, t, mu, s0, sched);
        for (std::size_t i = 0; i < n; ++i) {
            num += (learned[i] - exact[i]) * (learned[i] - exact[i]);
            den += exact[i] * exact[i];
        }
    }
    CHECK(std::sqrt(num / den) < 0.2);
}

TEST_CASE("loss history CSV has the documented columns") {
    std::vector<LossRecord> h = {{1, 1, 0.5, 0.25}, {1, 2, 0.4, 0.2}};
    const std::string csv = loss_history_csv(h);
    CHECK(csv.find("epoch,step,loss_x,loss_lambda\n") == 0);
    CHECK(csv.find("1,2,0.4,0.2\n") != std::string::npos);
}

TEST_SUITE_END();
