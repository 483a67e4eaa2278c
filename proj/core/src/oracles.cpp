#include "gsdm/oracles.hpp"

#include <cmath>

#include "gsdm/errors.hpp"

namespace gsdm::oracles {

Vec analytic_gaussian_score(const Vec& x, double t, double mu0, double s0,
                            const NoiseSchedule& schedule) {
    if (t <= 0.0 || t > 1.0)
        throw precondition_error("analytic_gaussian_score: t must lie in (0, 1]");
    const MarginalStats m = schedule.marginal(t);
    const double var = m.mean_coef * m.mean_coef * s0 * s0 + m.std * m.std;
    if (var == 0.0) throw precondition_error("analytic_gaussian_score: degenerate marginal");
    Vec s(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) s[i] = -(x[i] - m.mean_coef * mu0) / var;
    return s;
}

McEstimate mc_covariance(const Mat& u0, const KernelIndex& idx, std::size_t n_samples, Rng& rng) {
    if (n_samples < 1000) throw precondition_error("mc_covariance: need at least 1e3 samples");
    const std::size_t n = u0.rows();
    const double s = std::min(idx.s, idx.t);
    const double t = std::max(idx.s, idx.t);
    // when the caller passed (s, t) swapped, the entry pairs swap with them
    const bool swapped = idx.s > idx.t;
    const std::size_t i = swapped ? idx.k : idx.i, j = swapped ? idx.l : idx.j;
    const std::size_t k = swapped ? idx.i : idx.k, l = swapped ? idx.j : idx.l;

    Vec g(n);
    double sum_a = 0.0, sum_b = 0.0, sum_ab = 0.0, sum_sq = 0.0;
    std::vector<double> prods(n_samples);
    std::vector<double> as(n_samples), bs(n_samples);
    for (std::size_t rep = 0; rep < n_samples; ++rep) {
        // joint Brownian values at s <= t, per eigen-coordinate
        double a = 0.0, b = 0.0;
        for (std::size_t h = 0; h < n; ++h) {
            const double bs_h = std::sqrt(s) * rng.gaussian();
            const double bt_h = bs_h + std::sqrt(t - s) * rng.gaussian();
            a += u0(i, h) * u0(j, h) * bs_h;
            b += u0(k, h) * u0(l, h) * bt_h;
        }
        as[rep] = a;
        bs[rep] = b;
        prods[rep] = a * b;
        sum_a += a;
        sum_b += b;
        sum_ab += a * b;
        sum_sq += a * b * a * b;
    }
    const double nn = static_cast<double>(n_samples);
    McEstimate est;
    est.samples = n_samples;
    est.estimate = sum_ab / nn - (sum_a / nn) * (sum_b / nn);

    // leave-one-out jackknife over the covariance statistic
    double jack_mean = 0.0;
    std::vector<double> jack(n_samples);
    for (std::size_t rep = 0; rep < n_samples; ++rep) {
        const double m1 = (sum_ab - prods[rep]) / (nn - 1.0);
        const double ma = (sum_a - as[rep]) / (nn - 1.0);
        const double mb = (sum_b - bs[rep]) / (nn - 1.0);
        jack[rep] = m1 - ma * mb;
        jack_mean += jack[rep];
    }
    jack_mean /= nn;
    double var = 0.0;
    for (double v : jack) var += (v - jack_mean) * (v - jack_mean);
    est.std_error = std::sqrt((nn - 1.0) / nn * var);
    return est;
}

namespace {

double dist_for(const Vec& x, const Vec& y, MmdKernel kernel) {
    const std::size_t n = std::max(x.size(), y.size());
    if (kernel == MmdKernel::GaussianTV) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double a = i < x.size() ? x[i] : 0.0;
            const double b = i < y.size() ? y[i] : 0.0;
            acc += a >= b ? a - b : b - a;
        }
        return acc / 2.0;
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = i < x.size() ? x[i] : 0.0;
        const double b = i < y.size() ? y[i] : 0.0;
        acc += (a - b) * (a - b);
    }
    return std::sqrt(acc);
}

}  // namespace

double naive_mmd(const std::vector<Vec>& set_a, const std::vector<Vec>& set_b, MmdKernel kernel,
                 double bandwidth) {
    if (set_a.empty() || set_b.empty()) throw precondition_error("naive_mmd: empty set");
    const double inv2bw2 = 1.0 / (2.0 * bandwidth * bandwidth);
    double total = 0.0;
    const double na = static_cast<double>(set_a.size());
    const double nb = static_cast<double>(set_b.size());
    for (std::size_t p = 0; p < set_a.size(); ++p)
        for (std::size_t q = 0; q < set_a.size(); ++q) {
            const double d = dist_for(set_a[p], set_a[q], kernel);
            total += std::exp(-d * d * inv2bw2) / (na * na);
        }
    for (std::size_t p = 0; p < set_b.size(); ++p)
        for (std::size_t q = 0; q < set_b.size(); ++q) {
            const double d = dist_for(set_b[p], set_b[q], kernel);
            total += std::exp(-d * d * inv2bw2) / (nb * nb);
        }
    for (std::size_t p = 0; p < set_a.size(); ++p)
        for (std::size_t q = 0; q < set_b.size(); ++q) {
            const double d = dist_for(set_a[p], set_b[q], kernel);
            total -= 2.0 * std::exp(-d * d * inv2bw2) / (na * nb);
        }
    return total;
}

namespace {

double log_gaussian(const Vec& x, const Vec& mean, double var) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - mean[i];
        acc += -0.5 * d * d / var;
    }
    return acc - 0.5 * static_cast<double>(x.size()) *
                     std::log(2.0 * 3.14159265358979323846 * var);
}

}  // namespace

Vec fd_conditional_score(const Vec& x_t, const Vec& x0, double t, const NoiseSchedule& schedule,
                         double h) {
    const MarginalStats m = schedule.marginal(t);
    Vec mean(x0.size());
    for (std::size_t i = 0; i < x0.size(); ++i) mean[i] = m.mean_coef * x0[i];
    const double var = m.std * m.std;
    Vec grad(x_t.size());
    Vec probe = x_t;
    for (std::size_t i = 0; i < x_t.size(); ++i) {
        probe[i] = x_t[i] + h;
        const double up = log_gaussian(probe, mean, var);
        probe[i] = x_t[i] - h;
        const double dn = log_gaussian(probe, mean, var);
        probe[i] = x_t[i];
        grad[i] = (up - dn) / (2.0 * h);
    }
    return grad;
}

Vec fd_gaussian_marginal_score(const Vec& x, double t, double mu0, double s0,
                               const NoiseSchedule& schedule, double h) {
    const MarginalStats m = schedule.marginal(t);
    const double var = m.mean_coef * m.mean_coef * s0 * s0 + m.std * m.std;
    Vec mean(x.size(), m.mean_coef * mu0);
    Vec grad(x.size());
    Vec probe = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        probe[i] = x[i] + h;
        const double up = log_gaussian(probe, mean, var);
        probe[i] = x[i] - h;
        const double dn = log_gaussian(probe, mean, var);
        probe[i] = x[i];
        grad[i] = (up - dn) / (2.0 * h);
    }
    return grad;
}

std::vector<Vec> orbit_counts_reference(const Graph& g) {
    const std::size_t n = g.n;
    std::vector<Vec> counts(n, Vec(kGraphletTypes, 0.0));
    auto adj = [&](std::size_t a, std::size_t b) { return g.a(a, b) != 0.0; };
    auto bump = [&](std::size_t type, std::initializer_list<std::size_t> nodes) {
        for (std::size_t v : nodes) counts[v][type] += 1.0;
    };

    // path4 (type 0): pick the middle edge {b,c}, then non-adjacent ends
    for (std::size_t b = 0; b < n; ++b)
        for (std::size_t c = b + 1; c < n; ++c) {
            if (!adj(b, c)) continue;
            for (std::size_t a = 0; a < n; ++a) {
                if (a == b || a == c || !adj(a, b) || adj(a, c)) continue;
                for (std::size_t d = 0; d < n; ++d) {
                    if (d == a || d == b || d == c) continue;
                    if (adj(c, d) && !adj(b, d) && !adj(a, d)) bump(0, {a, b, c, d});
                }
            }
        }

    // star4 (type 1): center with a pairwise non-adjacent neighbor triple
    for (std::size_t c = 0; c < n; ++c) {
        std::vector<std::size_t> nb;
        for (std::size_t j = 0; j < n; ++j)
            if (j != c && adj(c, j)) nb.push_back(j);
        for (std::size_t p = 0; p < nb.size(); ++p)
            for (std::size_t q = p + 1; q < nb.size(); ++q)
                for (std::size_t r = q + 1; r < nb.size(); ++r)
                    if (!adj(nb[p], nb[q]) && !adj(nb[p], nb[r]) && !adj(nb[q], nb[r]))
                        bump(1, {c, nb[p], nb[q], nb[r]});
    }

    // cycle4 (type 2): chordless quadrilateral a-u-b-w-a with a the smallest
    // label and u < w to count each cycle once
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t u = 0; u < n; ++u) {
            if (u <= a || !adj(a, u)) continue;
            for (std::size_t w = u + 1; w < n; ++w) {
                if (w == a || !adj(a, w) || adj(u, w)) continue;
                for (std::size_t b = a + 1; b < n; ++b) {
                    if (b == u || b == w) continue;
                    if (adj(u, b) && adj(w, b) && !adj(a, b)) bump(2, {a, u, b, w});
                }
            }
        }

    // tailed triangle (type 3): triangle plus a pendant on exactly one vertex
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            if (!adj(i, j)) continue;
            for (std::size_t k = j + 1; k < n; ++k) {
                if (!adj(i, k) || !adj(j, k)) continue;
                for (std::size_t d = 0; d < n; ++d) {
                    if (d == i || d == j || d == k) continue;
                    const int links = int(adj(d, i)) + int(adj(d, j)) + int(adj(d, k));
                    if (links == 1) bump(3, {i, j, k, d});
                }
            }
        }

    // diamond (type 4): shared edge {i,j} plus two non-adjacent common
    // neighbors
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            if (!adj(i, j)) continue;
            std::vector<std::size_t> common;
            for (std::size_t u = 0; u < n; ++u)
                if (u != i && u != j && adj(i, u) && adj(j, u)) common.push_back(u);
            for (std::size_t p = 0; p < common.size(); ++p)
                for (std::size_t q = p + 1; q < common.size(); ++q)
                    if (!adj(common[p], common[q])) bump(4, {i, j, common[p], common[q]});
        }

    // clique4 (type 5): triangles among the neighbors of the smallest member
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            if (!adj(i, j)) continue;
            for (std::size_t k = j + 1; k < n; ++k) {
                if (!adj(i, k) || !adj(j, k)) continue;
                for (std::size_t l = k + 1; l < n; ++l)
                    if (adj(i, l) && adj(j, l) && adj(k, l)) bump(5, {i, j, k, l});
            }
        }

    return counts;
}

double beta_quadrature(const NoiseSchedule& schedule, double t0, double t1, std::size_t panels) {
    if (t0 > t1) throw precondition_error("beta_quadrature: t0 > t1");
    std::vector<double> cuts{t0, t1};
    if (schedule.family() == ScheduleFamily::TwoLevel && t0 < 0.5 && 0.5 < t1)
        cuts.insert(cuts.begin() + 1, 0.5);
    double total = 0.0;
    for (std::size_t seg = 0; seg + 1 < cuts.size(); ++seg) {
        const double lo = cuts[seg], hi = cuts[seg + 1];
        const std::size_t m = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::ceil(static_cast<double>(panels) * (hi - lo) /
                                                  std::max(1e-300, t1 - t0))));
        const double dt = (hi - lo) / static_cast<double>(m);
        // evaluate just inside segment ends so jump points read the correct side
        double prev = schedule.beta(std::min(lo + 1e-13, 1.0));
        for (std::size_t k = 1; k <= m; ++k) {
            const double t = k == m ? std::max(hi - 1e-13, 0.0) : lo + dt * static_cast<double>(k);
            const double cur = schedule.beta(t);
            total += 0.5 * (prev + cur) * dt;
            prev = cur;
        }
    }
    return total;
}

double covariance_kernel_mutated(const Mat& u0, const KernelIndex& idx) {
    const std::size_t n = u0.rows();
    double sum = 0.0;
    for (std::size_t h = 0; h < n; ++h)
        sum += u0(idx.i, h) * u0(idx.j, h) * u0(idx.k, h) * u0(idx.l, h);
    return idx.s * idx.t * sum;
}

}  // namespace gsdm::oracles
