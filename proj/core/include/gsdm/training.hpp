#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gsdm/config.hpp"
#include "gsdm/datasets.hpp"
#include "gsdm/schedule.hpp"
#include "gsdm/scorenet.hpp"

namespace gsdm {

enum class Optimizer { Adam, SGD };

struct TrainConfig {
    std::size_t epochs = 10;  // K
    std::size_t batch = 16;   // b
    double lr = 1e-3;         // eta
    Optimizer optimizer = Optimizer::Adam;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t seed = 0;
    double t_eps = 1e-5;             // lower bound of the time draw
    std::size_t ckpt_interval = 0;   // steps between checkpoints; 0 = final only
    std::string ckpt_dir;            // empty = no checkpoints written

    // train.epochs, train.batch, train.lr, train.optimizer, train.seed,
    // train.t_eps, train.ckpt_interval
    static TrainConfig from_config(const Config& cfg);
    void validate() const;
};

struct LossRecord {
    std::size_t epoch = 0;
    std::size_t step = 0;  // global optimizer step
    double loss_x = 0.0;
    double loss_lambda = 0.0;
};

struct TrainResult {
    ScoreNetParams params;
    OptState opt;
    std::vector<LossRecord> history;
    std::string last_checkpoint;
};

// Denoising score-matching training. Deterministic for a fixed
// (dataset, arch, config): shuffling and noise streams are derived from
// the seed and the global step, so a run split across resume segments
// reproduces the unsplit run bit for bit. Graphs arrive pre-decomposed;
// no eigendecomposition happens inside the loop.
TrainResult train(const std::vector<SpectralGraph>& dataset, const ScoreNetArch& arch,
                  const TrainConfig& cfg, const NoiseSchedule& sched_x,
                  const NoiseSchedule& sched_lam);

// Continue from a checkpoint written by train(); the arch comes from the
// file and must match dataset dimensions. Runs until cfg.epochs total.
TrainResult resume(const std::string& checkpoint_path,
                   const std::vector<SpectralGraph>& dataset, const TrainConfig& cfg,
                   const NoiseSchedule& sched_x, const NoiseSchedule& sched_lam);

std::string loss_history_csv(const std::vector<LossRecord>& history);

}  // namespace gsdm
