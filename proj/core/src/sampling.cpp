#include "gsdm/sampling.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <sstream>
#include <thread>

#include "gsdm/errors.hpp"
#include "gsdm/oracles.hpp"

namespace gsdm {

namespace {

constexpr double kMaxDiscreteBeta = 0.999;

// retained-coordinate mask; entries outside it are pinned to zero
struct QuantileMask {
    std::vector<bool> keep;
    bool active = false;

    void init(std::size_t n, const std::vector<std::size_t>* retained) {
        if (!retained) {
            active = false;
            return;
        }
        active = true;
        keep.assign(n, false);
        for (std::size_t i : *retained) keep[i] = true;
    }
    void apply(Vec& v) const {
        if (!active) return;
        for (std::size_t i = 0; i < v.size(); ++i)
            if (!keep[i]) v[i] = 0.0;
    }
};

double frob(const Vec& v) { return norm2(v); }
double frob(const Mat& m) { return norm2(m.raw()); }

void check_state_finite(const Mat& x, const Vec& lam, std::size_t step) {
    if (!all_finite(x) || !all_finite(lam))
        throw numeric_error("sampler: non-finite state at step " + std::to_string(step));
}

// x <- x + eps*s + sqrt(2 eps)*z with the predictor-corrector step size
// eps = 2 (snr |z| / |s|)^2; a zero score leaves the state untouched.
template <typename T>
void langevin_move(T& state, const T& score, const T& noise, double snr) {
    const double sn = frob(score);
    if (sn == 0.0) return;
    const double zn = frob(noise);
    const double eps = 2.0 * (snr * zn / sn) * (snr * zn / sn);
    const double nscale = std::sqrt(2.0 * eps);
    if constexpr (std::is_same_v<T, Vec>) {
        for (std::size_t i = 0; i < state.size(); ++i)
            state[i] += eps * score[i] + nscale * noise[i];
    } else {
        for (std::size_t i = 0; i < state.size(); ++i)
            state.raw()[i] += eps * score.raw()[i] + nscale * noise.raw()[i];
    }
}

template <typename T>
void predictor_move(T& state, const T& score, const T& noise, double beta_hat) {
    const double grow = 2.0 - std::sqrt(1.0 - beta_hat);
    const double nscale = std::sqrt(beta_hat);
    if constexpr (std::is_same_v<T, Vec>) {
        for (std::size_t i = 0; i < state.size(); ++i)
            state[i] = grow * state[i] + beta_hat * score[i] + nscale * noise[i];
    } else {
        for (std::size_t i = 0; i < state.size(); ++i)
            state.raw()[i] =
                grow * state.raw()[i] + beta_hat * score.raw()[i] + nscale * noise.raw()[i];
    }
}

double discrete_beta(const NoiseSchedule& s, double t, std::size_t steps) {
    const double b = s.beta(t) * (s.terminal_time() / static_cast<double>(steps));
    return std::min(b, kMaxDiscreteBeta);
}

// reverse-time action of the drift+noise part over [t_lo, t_hi]:
// VP grows the state by e^{I/2} and adds variance e^I - 1; VE adds the
// variance accumulated by the forward process on that interval.
struct LinearHalfStep {
    double grow = 1.0;
    double noise = 0.0;
};

LinearHalfStep linear_half(const NoiseSchedule& s, double t_lo, double t_hi) {
    LinearHalfStep h;
    if (s.kind() == ScheduleKind::VP) {
        const double ib = s.integral_beta(t_lo, t_hi);
        h.grow = std::exp(0.5 * ib);
        h.noise = std::sqrt(std::max(0.0, std::exp(ib) - 1.0));
    } else {
        const double lo = s.sigma(t_lo), hi = s.sigma(t_hi);
        h.grow = 1.0;
        h.noise = std::sqrt(std::max(0.0, hi * hi - lo * lo));
    }
    return h;
}

template <typename T>
void apply_half(T& state, const LinearHalfStep& h, Rng& rng) {
    if constexpr (std::is_same_v<T, Vec>) {
        for (double& v : state) v = h.grow * v + h.noise * rng.gaussian();
    } else {
        for (double& v : state.raw()) v = h.grow * v + h.noise * rng.gaussian();
    }
}

}  // namespace

SamplerMode sampler_mode_from_string(const std::string& name) {
    if (name == "pc") return SamplerMode::PC;
    if (name == "splitting") return SamplerMode::Splitting;
    if (name == "fullrank-pc" || name == "fullrank") return SamplerMode::FullRankPC;
    throw format_error("unknown sampler mode: " + name);
}

std::string to_string(SamplerMode m) {
    switch (m) {
        case SamplerMode::PC: return "pc";
        case SamplerMode::Splitting: return "splitting";
        case SamplerMode::FullRankPC: return "fullrank-pc";
    }
    return "?";
}

SampleConfig SampleConfig::from_config(const Config& cfg) {
    SampleConfig s;
    s.steps = cfg.get_uint("sample.steps", s.steps);
    s.snr_r = cfg.get_double("sample.snr_r", s.snr_r);
    s.eps_s = cfg.get_double("sample.eps_s", s.eps_s);
    s.alpha = cfg.get_double("sample.alpha", s.alpha);
    s.corr_alpha = cfg.get_double("sample.corr_alpha", s.corr_alpha);
    s.mode = sampler_mode_from_string(cfg.get_string("sample.mode", "pc"));
    s.seed = cfg.get_uint("sample.seed", s.seed);
    s.threshold = cfg.get_double("postprocess.threshold", s.threshold);
    s.validate();
    return s;
}

void SampleConfig::validate() const {
    if (steps < 1) throw precondition_error("sample: steps must be >= 1");
    if (!(snr_r > 0.0)) throw precondition_error("sample: snr_r must be positive");
    if (!(alpha > 0.0) || alpha > 1.0)
        throw precondition_error("sample: alpha must lie in (0, 1]");
}

SpectralScoreFn network_spectral_scores(const ScoreNetParams& params,
                                        const NoiseSchedule& sched_x,
                                        const NoiseSchedule& sched_lam) {
    return [&params, sched_x, sched_lam](const Mat& x, const Vec& lam, const Mat& u,
                                         double t) -> SpectralScores {
        SpectralScores s;
        s.sx = feature_score(params, x, lam, u, t, sched_x);
        s.slam = spectrum_score(params, x, lam, u, t, sched_lam);
        return s;
    };
}

FullRankScoreFn network_fullrank_scores(const ScoreNetParams& params,
                                        const NoiseSchedule& sched_x,
                                        const NoiseSchedule& sched_a) {
    return [&params, sched_x, sched_a](const Mat& x, const Vec& a_upper,
                                       double t) -> FullRankScores {
        const Mat a = adjacency_from_upper_triangle(a_upper, x.rows());
        const MarginalStats mx = sched_x.marginal(t);
        const MarginalStats ma = sched_a.marginal(t);
        if (mx.std == 0.0 || ma.std == 0.0)
            throw precondition_error("fullrank scores: std(t) = 0");
        FullRankScores s;
        s.sx = feature_raw_fullrank(params, x, a, t);
        for (std::size_t i = 0; i < s.sx.size(); ++i)
            s.sx.raw()[i] = (mx.mean_coef * s.sx.raw()[i] - x.raw()[i]) / (mx.std * mx.std);
        s.sa = pair_raw(params, x, a, a_upper, t);
        for (std::size_t i = 0; i < s.sa.size(); ++i)
            s.sa[i] = (ma.mean_coef * s.sa[i] - a_upper[i]) / (ma.std * ma.std);
        return s;
    };
}

SpectralScoreFn analytic_spectral_scores(double mu0, double s0, const NoiseSchedule& sched_x,
                                         const NoiseSchedule& sched_lam) {
    return [mu0, s0, sched_x, sched_lam](const Mat& x, const Vec& lam, const Mat&,
                                         double t) -> SpectralScores {
        SpectralScores s;
        s.sx = Mat(x.rows(), x.cols());
        const Vec gx = oracles::analytic_gaussian_score(x.raw(), t, mu0, s0, sched_x);
        for (std::size_t i = 0; i < gx.size(); ++i) s.sx.raw()[i] = gx[i];
        s.slam = oracles::analytic_gaussian_score(lam, t, mu0, s0, sched_lam);
        return s;
    };
}

FullRankScoreFn analytic_fullrank_scores(double mu0, double s0, const NoiseSchedule& sched_x,
                                         const NoiseSchedule& sched_a) {
    return [mu0, s0, sched_x, sched_a](const Mat& x, const Vec& a_upper,
                                       double t) -> FullRankScores {
        FullRankScores s;
        s.sx = Mat(x.rows(), x.cols());
        const Vec gx = oracles::analytic_gaussian_score(x.raw(), t, mu0, s0, sched_x);
        for (std::size_t i = 0; i < gx.size(); ++i) s.sx.raw()[i] = gx[i];
        s.sa = oracles::analytic_gaussian_score(a_upper, t, mu0, s0, sched_a);
        return s;
    };
}

SpectralScoreFn zero_spectral_scores() {
    return [](const Mat& x, const Vec& lam, const Mat&, double) -> SpectralScores {
        return {Mat(x.rows(), x.cols()), Vec(lam.size(), 0.0)};
    };
}

std::size_t draw_eigvector_index(const std::vector<SpectralGraph>& dataset, std::size_t n,
                                 Rng& rng) {
    std::vector<std::size_t> matches;
    for (std::size_t i = 0; i < dataset.size(); ++i)
        if (dataset[i].g.n == n) matches.push_back(i);
    if (matches.empty())
        throw precondition_error("draw_eigvectors: no training graph with " + std::to_string(n) +
                                 " nodes");
    return matches[rng.uniform_index(matches.size())];
}

Mat draw_eigvectors(const std::vector<SpectralGraph>& dataset, std::size_t n, Rng& rng) {
    return dataset[draw_eigvector_index(dataset, n, rng)].spec.u;
}

SpectralSample sample_pc(const SpectralScoreFn& scores, const Mat& u, std::size_t d,
                         const NoiseSchedule& sched_x, const NoiseSchedule& sched_lam,
                         const SampleConfig& cfg, Rng& rng,
                         const std::vector<std::size_t>* mask_idx,
                         std::vector<Vec>* lambda_trace) {
    if (sched_x.kind() != ScheduleKind::VP || sched_lam.kind() != ScheduleKind::VP)
        throw precondition_error("sample_pc: VP schedules required");
    cfg.validate();
    const std::size_t n = u.rows();
    const std::size_t M = cfg.steps;
    const double T = sched_x.terminal_time();

    QuantileMask mask;
    mask.init(n, mask_idx);

    Mat x(n, d);
    Vec lam(n);
    rng.fill_gaussian(x);
    rng.fill_gaussian(lam);
    mask.apply(lam);

    double t = T;
    for (std::size_t m = M; m-- > 0;) {
        const double bx = discrete_beta(sched_x, t, M);
        const double bl = discrete_beta(sched_lam, t, M);
        SpectralScores s = scores(x, lam, u, t);
        mask.apply(s.slam);

        Mat zx(n, d);
        Vec zl(n);
        rng.fill_gaussian(zx);
        rng.fill_gaussian(zl);
        mask.apply(zl);
        predictor_move(x, s.sx, zx, bx);
        predictor_move(lam, s.slam, zl, bl);
        mask.apply(lam);

        const double t_mid = t - T / (2.0 * static_cast<double>(M));
        s = scores(x, lam, u, t_mid);
        mask.apply(s.slam);
        rng.fill_gaussian(zx);
        rng.fill_gaussian(zl);
        mask.apply(zl);
        langevin_move(x, s.sx, zx, cfg.snr_r);
        langevin_move(lam, s.slam, zl, cfg.snr_r);
        mask.apply(lam);

        t = t_mid - T / (2.0 * static_cast<double>(M));
        check_state_finite(x, lam, m);
        if (lambda_trace) lambda_trace->push_back(lam);
    }

    SpectralSample out;
    out.x0 = std::move(x);
    out.a0_cont = symmetrize(recombine_diag(u, lam));
    out.lambda0 = std::move(lam);
    return out;
}

SpectralSample sample_splitting(const SpectralScoreFn& scores, const Mat& u, std::size_t d,
                                const NoiseSchedule& sched_x, const NoiseSchedule& sched_lam,
                                const SampleConfig& cfg, Rng& rng,
                                const std::vector<std::size_t>* mask_idx,
                                std::vector<Vec>* lambda_trace) {
    cfg.validate();
    const std::size_t n = u.rows();
    const std::size_t M = cfg.steps;
    const double T = sched_x.terminal_time();
    const double dt = T / static_cast<double>(M);

    QuantileMask mask;
    mask.init(n, mask_idx);

    Mat x(n, d);
    Vec lam(n);
    rng.fill_gaussian(x);
    rng.fill_gaussian(lam);
    mask.apply(lam);

    double t = T;
    for (std::size_t m = M; m-- > 0;) {
        SpectralScores s = scores(x, lam, u, t);
        mask.apply(s.slam);

        if (cfg.corr_alpha != 0.0) {
            Mat zx(n, d);
            rng.fill_gaussian(zx);
            const double ax = cfg.corr_alpha > 0.0
                                  ? cfg.corr_alpha
                                  : (frob(s.sx) > 0.0
                                         ? 2.0 * std::pow(cfg.snr_r * frob(zx) / frob(s.sx), 2)
                                         : 0.0);
            for (std::size_t i = 0; i < x.size(); ++i)
                x.raw()[i] += 0.5 * ax * s.sx.raw()[i] +
                              cfg.eps_s * std::sqrt(ax) * zx.raw()[i];
            Vec zl(n);
            rng.fill_gaussian(zl);
            mask.apply(zl);
            const double al = cfg.corr_alpha > 0.0
                                  ? cfg.corr_alpha
                                  : (norm2(s.slam) > 0.0
                                         ? 2.0 * std::pow(cfg.snr_r * norm2(zl) / norm2(s.slam), 2)
                                         : 0.0);
            for (std::size_t i = 0; i < n; ++i)
                lam[i] += 0.5 * al * s.slam[i] + cfg.eps_s * std::sqrt(al) * zl[i];
            mask.apply(lam);
        }

        const double t_mid = std::max(0.0, t - 0.5 * dt);
        const double t_lo = std::max(0.0, t - dt);

        apply_half(x, linear_half(sched_x, t_mid, t), rng);
        apply_half(lam, linear_half(sched_lam, t_mid, t), rng);
        mask.apply(lam);

        const double g2x = sched_x.diffusion_coef_sq(t);
        const double g2l = sched_lam.diffusion_coef_sq(t);
        for (std::size_t i = 0; i < x.size(); ++i) x.raw()[i] += g2x * s.sx.raw()[i] * dt;
        for (std::size_t i = 0; i < n; ++i) lam[i] += g2l * s.slam[i] * dt;
        mask.apply(lam);

        apply_half(x, linear_half(sched_x, t_lo, t_mid), rng);
        apply_half(lam, linear_half(sched_lam, t_lo, t_mid), rng);
        mask.apply(lam);

        t = t_lo;
        check_state_finite(x, lam, m);
        if (lambda_trace) lambda_trace->push_back(lam);
    }

    SpectralSample out;
    out.x0 = std::move(x);
    out.a0_cont = symmetrize(recombine_diag(u, lam));
    out.lambda0 = std::move(lam);
    return out;
}

FullRankSample sample_fullrank(const FullRankScoreFn& scores, std::size_t n, std::size_t d,
                               const NoiseSchedule& sched_x, const NoiseSchedule& sched_a,
                               const SampleConfig& cfg, Rng& rng) {
    if (sched_x.kind() != ScheduleKind::VP || sched_a.kind() != ScheduleKind::VP)
        throw precondition_error("sample_fullrank: VP schedules required");
    cfg.validate();
    const std::size_t M = cfg.steps;
    const double T = sched_x.terminal_time();
    const std::size_t npairs = n * (n - 1) / 2;

    Mat x(n, d);
    Vec av(npairs);
    rng.fill_gaussian(x);
    rng.fill_gaussian(av);

    double t = T;
    for (std::size_t m = M; m-- > 0;) {
        const double bx = discrete_beta(sched_x, t, M);
        const double ba = discrete_beta(sched_a, t, M);
        FullRankScores s = scores(x, av, t);

        Mat zx(n, d);
        Vec za(npairs);
        rng.fill_gaussian(zx);
        rng.fill_gaussian(za);
        predictor_move(x, s.sx, zx, bx);
        predictor_move(av, s.sa, za, ba);

        const double t_mid = t - T / (2.0 * static_cast<double>(M));
        s = scores(x, av, t_mid);
        rng.fill_gaussian(zx);
        rng.fill_gaussian(za);
        langevin_move(x, s.sx, zx, cfg.snr_r);
        langevin_move(av, s.sa, za, cfg.snr_r);

        t = t_mid - T / (2.0 * static_cast<double>(M));
        check_state_finite(x, av, m);
    }

    FullRankSample out;
    out.x0 = std::move(x);
    out.a0_cont = adjacency_from_upper_triangle(av, n);
    return out;
}

GeneratedBatch generate_batch(const ScoreNetParams& params,
                              const std::vector<SpectralGraph>& dataset, std::size_t count,
                              const SampleConfig& cfg, const NoiseSchedule& sched_x,
                              const NoiseSchedule& sched_lam, std::size_t threads) {
    if (count < 1) throw precondition_error("generate_batch: count must be >= 1");
    if (dataset.empty()) throw precondition_error("generate_batch: empty dataset");
    const std::size_t d = dataset.front().g.d;
    const bool weighted = dataset.front().g.weighted;

    GeneratedBatch batch;
    batch.graphs.resize(count);
    batch.millis.resize(count);
    batch.sizes.resize(count);

    auto run_chain = [&](std::size_t c) {
        Rng rng(cfg.seed, {0xc4a17u, c});
        const auto t0 = std::chrono::steady_clock::now();
        // node count from the empirical training-size distribution
        const std::size_t n = dataset[rng.uniform_index(dataset.size())].g.n;
        Graph g;
        if (cfg.mode == SamplerMode::FullRankPC) {
            const auto fn = network_fullrank_scores(params, sched_x, sched_lam);
            FullRankSample s = sample_fullrank(fn, n, d, sched_x, sched_lam, cfg, rng);
            g = weighted ? Graph(std::move(s.x0), std::move(s.a0_cont), true)
                         : Graph(std::move(s.x0), binarize(s.a0_cont, cfg.threshold));
        } else {
            const std::size_t src = draw_eigvector_index(dataset, n, rng);
            const Mat& u = dataset[src].spec.u;
            std::vector<std::size_t> retained;
            const std::vector<std::size_t>* mask = nullptr;
            if (cfg.alpha < 1.0) {
                retained = top_k_by_magnitude(dataset[src].spec.lambda, cfg.alpha);
                mask = &retained;
            }
            const auto fn = network_spectral_scores(params, sched_x, sched_lam);
            SpectralSample s =
                cfg.mode == SamplerMode::PC
                    ? sample_pc(fn, u, d, sched_x, sched_lam, cfg, rng, mask)
                    : sample_splitting(fn, u, d, sched_x, sched_lam, cfg, rng, mask);
            g = weighted ? Graph(std::move(s.x0), std::move(s.a0_cont), true)
                         : Graph(std::move(s.x0), binarize(s.a0_cont, cfg.threshold));
        }
        const auto t1 = std::chrono::steady_clock::now();
        batch.graphs[c] = std::move(g);
        batch.sizes[c] = n;
        batch.millis[c] = std::chrono::duration<double, std::milli>(t1 - t0).count();
    };

    if (threads <= 1) {
        for (std::size_t c = 0; c < count; ++c) run_chain(c);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        const std::size_t workers = std::min(threads, count);
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t c = next.fetch_add(1); c < count; c = next.fetch_add(1))
                    run_chain(c);
            });
        for (auto& th : pool) th.join();
    }
    return batch;
}

std::string timing_csv(const GeneratedBatch& batch) {
    std::ostringstream out;
    out << "chain,n,wall_ms\n";
    out.precision(6);
    for (std::size_t c = 0; c < batch.graphs.size(); ++c)
        out << c << ',' << batch.sizes[c] << ',' << std::fixed << batch.millis[c] << '\n';
    return out.str();
}

}  // namespace gsdm
