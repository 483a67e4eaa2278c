#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gsdm/config.hpp"
#include "gsdm/datasets.hpp"
#include "gsdm/graph.hpp"
#include "gsdm/rng.hpp"
#include "gsdm/schedule.hpp"
#include "gsdm/scorenet.hpp"

namespace gsdm {

enum class SamplerMode { PC, Splitting, FullRankPC };

SamplerMode sampler_mode_from_string(const std::string& name);
std::string to_string(SamplerMode m);

struct SampleConfig {
    std::size_t steps = 1000;   // M
    double snr_r = 0.16;        // corrector signal-to-noise target
    double eps_s = 1.0;         // corrector noise scaling (splitting solver)
    double alpha = 1.0;         // quantile fraction in (0, 1]
    double corr_alpha = -1.0;   // splitting Langevin step size; < 0 = auto, 0 = off
    SamplerMode mode = SamplerMode::PC;
    std::uint64_t seed = 0;
    double threshold = 0.5;     // binarization threshold for binary datasets

    // sample.steps, sample.snr_r, sample.eps_s, sample.alpha, sample.mode,
    // sample.corr_alpha, sample.seed, postprocess.threshold
    static SampleConfig from_config(const Config& cfg);
    void validate() const;
};

// Score estimates for the spectral state (X, Lambda) at time t.
struct SpectralScores {
    Mat sx;    // n x d
    Vec slam;  // n
};
using SpectralScoreFn =
    std::function<SpectralScores(const Mat& x, const Vec& lam, const Mat& u, double t)>;

// Score estimates for the full-rank state (X, upper-triangle A) at time t.
struct FullRankScores {
    Mat sx;
    Vec sa;
};
using FullRankScoreFn =
    std::function<FullRankScores(const Mat& x, const Vec& a_upper, double t)>;

SpectralScoreFn network_spectral_scores(const ScoreNetParams& params,
                                        const NoiseSchedule& sched_x,
                                        const NoiseSchedule& sched_lam);
FullRankScoreFn network_fullrank_scores(const ScoreNetParams& params,
                                        const NoiseSchedule& sched_x,
                                        const NoiseSchedule& sched_a);
// exact score of Gaussian data N(mu0, s0^2), applied to every coordinate
SpectralScoreFn analytic_spectral_scores(double mu0, double s0, const NoiseSchedule& sched_x,
                                         const NoiseSchedule& sched_lam);
FullRankScoreFn analytic_fullrank_scores(double mu0, double s0, const NoiseSchedule& sched_x,
                                         const NoiseSchedule& sched_a);
SpectralScoreFn zero_spectral_scores();

// Uniformly drawn eigenvector matrix among training graphs with exactly n
// nodes; throws when no such graph exists.
Mat draw_eigvectors(const std::vector<SpectralGraph>& dataset, std::size_t n, Rng& rng);
// same draw, returning the source graph index
std::size_t draw_eigvector_index(const std::vector<SpectralGraph>& dataset, std::size_t n,
                                 Rng& rng);

struct SpectralSample {
    Mat x0;
    Vec lambda0;
    Mat a0_cont;  // U diag(lambda0) U^T
};

// Reverse-time VP predictor-corrector sampler on the spectral state.
// `mask` (optional) lists the retained eigen-coordinates; all others are
// pinned to zero throughout. `lambda_trace`, when non-null, records the
// spectrum after every iteration.
SpectralSample sample_pc(const SpectralScoreFn& scores, const Mat& u, std::size_t d,
                         const NoiseSchedule& sched_x, const NoiseSchedule& sched_lam,
                         const SampleConfig& cfg, Rng& rng,
                         const std::vector<std::size_t>* mask = nullptr,
                         std::vector<Vec>* lambda_trace = nullptr);

// Symmetric-splitting reverse solver: Langevin correction, half-step
// linear transition, score drift, second half-step.
SpectralSample sample_splitting(const SpectralScoreFn& scores, const Mat& u, std::size_t d,
                                const NoiseSchedule& sched_x, const NoiseSchedule& sched_lam,
                                const SampleConfig& cfg, Rng& rng,
                                const std::vector<std::size_t>* mask = nullptr,
                                std::vector<Vec>* lambda_trace = nullptr);

struct FullRankSample {
    Mat x0;
    Mat a0_cont;  // symmetric by construction
};

// Baseline: predictor-corrector on (X, vec-upper-triangle(A)).
FullRankSample sample_fullrank(const FullRankScoreFn& scores, std::size_t n, std::size_t d,
                               const NoiseSchedule& sched_x, const NoiseSchedule& sched_a,
                               const SampleConfig& cfg, Rng& rng);

struct GeneratedBatch {
    std::vector<Graph> graphs;
    std::vector<double> millis;       // wall-clock per chain
    std::vector<std::size_t> sizes;   // node count per chain
};

// Draws node counts from the training-set empirical size distribution,
// runs the configured sampler per chain (chains own independent seed
// streams; results ordered by chain index), applies the alpha-quantile
// mask, and binarizes unless the dataset is weighted.
GeneratedBatch generate_batch(const ScoreNetParams& params,
                              const std::vector<SpectralGraph>& dataset, std::size_t count,
                              const SampleConfig& cfg, const NoiseSchedule& sched_x,
                              const NoiseSchedule& sched_lam, std::size_t threads = 1);

std::string timing_csv(const GeneratedBatch& batch);

}  // namespace gsdm
