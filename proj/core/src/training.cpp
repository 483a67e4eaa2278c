#include "gsdm/training.hpp"

#include <cmath>
#include <filesystem>
#include <numeric>
#include <sstream>

#include "gsdm/diffusion.hpp"
#include "gsdm/errors.hpp"
#include "gsdm/rng.hpp"

namespace gsdm {

TrainConfig TrainConfig::from_config(const Config& cfg) {
    TrainConfig c;
    c.epochs = cfg.get_uint("train.epochs", c.epochs);
    c.batch = cfg.get_uint("train.batch", c.batch);
    c.lr = cfg.get_double("train.lr", c.lr);
    const std::string opt = cfg.get_string("train.optimizer", "adam");
    if (opt == "adam")
        c.optimizer = Optimizer::Adam;
    else if (opt == "sgd")
        c.optimizer = Optimizer::SGD;
    else
        throw format_error("unknown optimizer: " + opt);
    c.seed = cfg.get_uint("train.seed", c.seed);
    c.t_eps = cfg.get_double("train.t_eps", c.t_eps);
    c.ckpt_interval = cfg.get_uint("train.ckpt_interval", c.ckpt_interval);
    c.validate();
    return c;
}

void TrainConfig::validate() const {
    if (batch < 1) throw precondition_error("train: batch must be >= 1");
    if (!(lr > 0.0)) throw precondition_error("train: lr must be positive");
    if (!(t_eps > 0.0 && t_eps < 1.0))
        throw precondition_error("train: t_eps must lie in (0, 1)");
}

namespace {

TrainExample make_example(const SpectralGraph& sg, double t, const NoiseSchedule& sched_x,
                          const NoiseSchedule& sched_lam, NetVariant variant, Rng& rng) {
    TrainExample ex;
    ex.t = t;
    ex.marg_x = sched_x.marginal(t);
    ex.marg_lambda = sched_lam.marginal(t);
    const std::size_t n = sg.g.n;

    {
        PerturbResult px = perturb(sg.g.x.raw(), t, sched_x, rng);
        ex.x_t = Mat(n, sg.g.d);
        ex.eps_x = Mat(n, sg.g.d);
        ex.x_t.raw() = std::move(px.x_t);
        ex.eps_x.raw() = std::move(px.eps);
    }
    if (variant == NetVariant::Spectral) {
        PerturbResult pl = perturb(sg.spec.lambda, t, sched_lam, rng);
        ex.lambda_t = std::move(pl.x_t);
        ex.eps_lambda = std::move(pl.eps);
        ex.u = sg.spec.u;
    } else {
        const Vec a0 = adjacency_upper_triangle(sg.g.a);
        PerturbResult pa = perturb(a0, t, sched_lam, rng);
        ex.a_t = adjacency_from_upper_triangle(pa.x_t, n);
        ex.lambda_t = std::move(pa.x_t);
        ex.eps_lambda = std::move(pa.eps);
    }
    return ex;
}

struct Trainer {
    const std::vector<SpectralGraph>& dataset;
    const TrainConfig& cfg;
    const NoiseSchedule& sched_x;
    const NoiseSchedule& sched_lam;

    ScoreNetParams params;
    OptState opt;
    std::vector<LossRecord> history;
    std::string last_checkpoint;

    std::size_t steps_per_epoch() const {
        return (dataset.size() + cfg.batch - 1) / cfg.batch;
    }

    void write_ckpt(const std::string& name) {
        if (cfg.ckpt_dir.empty()) return;
        std::filesystem::create_directories(cfg.ckpt_dir);
        const std::string path = cfg.ckpt_dir + "/" + name;
        save_checkpoint(params, opt, path);
        last_checkpoint = path;
    }

    void optimizer_update(ScoreNetParams& grads) {
        std::vector<Vec*> pt, gt;
        params.for_each_tensor([&](const std::string&, Vec& v) { pt.push_back(&v); });
        grads.for_each_tensor([&](const std::string&, Vec& v) { gt.push_back(&v); });
        if (cfg.optimizer == Optimizer::SGD) {
            for (std::size_t k = 0; k < pt.size(); ++k)
                for (std::size_t i = 0; i < pt[k]->size(); ++i)
                    (*pt[k])[i] -= cfg.lr * (*gt[k])[i];
            return;
        }
        const double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2;
        const double c1 = 1.0 - std::pow(b1, static_cast<double>(opt.step));
        const double c2 = 1.0 - std::pow(b2, static_cast<double>(opt.step));
        std::size_t flat = 0;
        for (std::size_t k = 0; k < pt.size(); ++k) {
            for (std::size_t i = 0; i < pt[k]->size(); ++i, ++flat) {
                const double g = (*gt[k])[i];
                opt.m[flat] = b1 * opt.m[flat] + (1.0 - b1) * g;
                opt.v[flat] = b2 * opt.v[flat] + (1.0 - b2) * g * g;
                const double mhat = opt.m[flat] / c1;
                const double vhat = opt.v[flat] / c2;
                (*pt[k])[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.adam_eps);
            }
        }
    }

    void run(std::size_t total_epochs) {
        const std::size_t spe = steps_per_epoch();
        // resume picks up mid-run from the recorded global step
        std::size_t epoch = opt.step / spe;
        while (epoch < total_epochs) {
            ++epoch;
            // deterministic shuffle per epoch
            std::vector<std::size_t> order(dataset.size());
            std::iota(order.begin(), order.end(), 0);
            Rng shuffle_rng(cfg.seed, {0x5fffe1u, epoch});
            for (std::size_t i = order.size(); i > 1; --i)
                std::swap(order[i - 1], order[shuffle_rng.uniform_index(i)]);

            const std::size_t start_pos = opt.step % spe;  // nonzero only on resume
            for (std::size_t pos = start_pos; pos < spe; ++pos) {
                ++opt.step;
                std::vector<TrainExample> batch;
                const std::size_t lo = pos * cfg.batch;
                const std::size_t hi = std::min(lo + cfg.batch, dataset.size());
                batch.reserve(hi - lo);
                for (std::size_t k = lo; k < hi; ++k) {
                    Rng rng(cfg.seed, {0x901feu, opt.step, k - lo});
                    const double t = cfg.t_eps + (1.0 - cfg.t_eps) * rng.uniform();
                    batch.push_back(make_example(dataset[order[k]], t, sched_x, sched_lam,
                                                 params.arch.variant, rng));
                }
                ScoreNetParams grads = params.zeros_like();
                LossBreakdown loss;
                try {
                    loss = loss_and_grads(params, batch, grads);
                } catch (const numeric_error& e) {
                    throw numeric_error(std::string(e.what()) + " at step " +
                                        std::to_string(opt.step) +
                                        (last_checkpoint.empty()
                                             ? "; no checkpoint written"
                                             : "; last good checkpoint: " + last_checkpoint));
                }
                optimizer_update(grads);
                history.push_back({epoch, opt.step, loss.loss_x, loss.loss_lambda});
                if (cfg.ckpt_interval > 0 && opt.step % cfg.ckpt_interval == 0)
                    write_ckpt("ckpt_step_" + std::to_string(opt.step) + ".bin");
            }
        }
        write_ckpt("ckpt_final.bin");
    }
};

}  // namespace

TrainResult train(const std::vector<SpectralGraph>& dataset, const ScoreNetArch& arch,
                  const TrainConfig& cfg, const NoiseSchedule& sched_x,
                  const NoiseSchedule& sched_lam) {
    if (dataset.empty()) throw precondition_error("train: empty dataset");
    cfg.validate();
    if (arch.d != dataset.front().g.d)
        throw precondition_error("train: arch feature dimension disagrees with dataset");
    Trainer tr{dataset, cfg, sched_x, sched_lam,
               ScoreNetParams::init(arch, cfg.seed), OptState{}, {}, {}};
    tr.opt.m.assign(tr.params.count(), 0.0);
    tr.opt.v.assign(tr.params.count(), 0.0);
    tr.run(cfg.epochs);
    return {std::move(tr.params), std::move(tr.opt), std::move(tr.history),
            std::move(tr.last_checkpoint)};
}

TrainResult resume(const std::string& checkpoint_path,
                   const std::vector<SpectralGraph>& dataset, const TrainConfig& cfg,
                   const NoiseSchedule& sched_x, const NoiseSchedule& sched_lam) {
    if (dataset.empty()) throw precondition_error("resume: empty dataset");
    cfg.validate();
    OptState opt;
    ScoreNetParams params = load_checkpoint(checkpoint_path, &opt);
    if (params.arch.d != dataset.front().g.d)
        throw precondition_error("resume: checkpoint feature dimension disagrees with dataset");
    Trainer tr{dataset, cfg, sched_x, sched_lam, std::move(params), std::move(opt), {}, {}};
    tr.run(cfg.epochs);
    return {std::move(tr.params), std::move(tr.opt), std::move(tr.history),
            std::move(tr.last_checkpoint)};
}

std::string loss_history_csv(const std::vector<LossRecord>& history) {
    std::ostringstream out;
    out << "epoch,step,loss_x,loss_lambda\n";
    out.precision(12);
    for (const LossRecord& r : history)
        out << r.epoch << ',' << r.step << ',' << r.loss_x << ',' << r.loss_lambda << '\n';
    return out.str();
}

}  // namespace gsdm
