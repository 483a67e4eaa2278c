#include "gsdm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gsdm/errors.hpp"

namespace gsdm {

const char* const kGraphletNames[kGraphletTypes] = {"path4",    "star4",    "cycle4",
                                                    "tailed_tri", "diamond", "clique4"};

StatHistogram degree_hist(const Graph& g, std::size_t pad_to) {
    const auto deg = g.degrees();
    std::size_t maxd = 0;
    for (std::size_t d : deg) maxd = std::max(maxd, d);
    StatHistogram h;
    h.bins.assign(std::max(maxd + 1, std::max<std::size_t>(pad_to, 1)), 0.0);
    h.support = "degree 0..";
    if (g.n == 0) return h;
    const double w = 1.0 / static_cast<double>(g.n);
    for (std::size_t d : deg) h.bins[d] += w;
    return h;
}

std::vector<std::size_t> triangle_counts(const Graph& g) {
    std::vector<std::size_t> tri(g.n, 0);
    for (std::size_t i = 0; i < g.n; ++i)
        for (std::size_t j = i + 1; j < g.n; ++j) {
            if (g.a(i, j) == 0.0) continue;
            for (std::size_t k = j + 1; k < g.n; ++k)
                if (g.a(i, k) != 0.0 && g.a(j, k) != 0.0) {
                    ++tri[i];
                    ++tri[j];
                    ++tri[k];
                }
        }
    return tri;
}

StatHistogram clustering_hist(const Graph& g) {
    StatHistogram h;
    h.bins.assign(100, 0.0);
    h.support = "clustering coefficient, 100 bins on [0,1]";
    if (g.n == 0) return h;
    const auto deg = g.degrees();
    const auto tri = triangle_counts(g);
    const double w = 1.0 / static_cast<double>(g.n);
    for (std::size_t i = 0; i < g.n; ++i) {
        double c = 0.0;
        if (deg[i] >= 2) {
            const double pairs = 0.5 * static_cast<double>(deg[i]) *
                                 static_cast<double>(deg[i] - 1);
            c = static_cast<double>(tri[i]) / pairs;
        }
        const std::size_t bin = std::min<std::size_t>(99, static_cast<std::size_t>(c * 100.0));
        h.bins[bin] += w;
    }
    return h;
}

namespace {

// classify a 4-node induced subgraph; -1 when disconnected
int classify_graphlet(int edges, const int deg[4]) {
    if (edges < 3) return -1;
    int mind = 4, maxd = 0;
    for (int k = 0; k < 4; ++k) {
        mind = std::min(mind, deg[k]);
        maxd = std::max(maxd, deg[k]);
    }
    switch (edges) {
        case 3:
            if (mind == 0) return -1;  // triangle + isolated node
            return maxd == 3 ? 1 : 0;  // star : path
        case 4: return maxd == 3 ? 3 : 2;  // tailed triangle : cycle
        case 5: return 4;                  // diamond
        default: return 5;                 // clique
    }
}

}  // namespace

std::vector<Vec> orbit_counts(const Graph& g) {
    std::vector<Vec> counts(g.n, Vec(kGraphletTypes, 0.0));
    if (g.n < 4) return counts;
    std::size_t sub[4];
    for (sub[0] = 0; sub[0] < g.n; ++sub[0])
        for (sub[1] = sub[0] + 1; sub[1] < g.n; ++sub[1])
            for (sub[2] = sub[1] + 1; sub[2] < g.n; ++sub[2])
                for (sub[3] = sub[2] + 1; sub[3] < g.n; ++sub[3]) {
                    int edges = 0;
                    int deg[4] = {0, 0, 0, 0};
                    for (int p = 0; p < 4; ++p)
                        for (int q = p + 1; q < 4; ++q)
                            if (g.a(sub[p], sub[q]) != 0.0) {
                                ++edges;
                                ++deg[p];
                                ++deg[q];
                            }
                    const int type = classify_graphlet(edges, deg);
                    if (type < 0) continue;
                    for (int p = 0; p < 4; ++p) counts[sub[p]][type] += 1.0;
                }
    return counts;
}

Vec mean_orbit_counts(const Graph& g) {
    Vec mean(kGraphletTypes, 0.0);
    if (g.n == 0) return mean;
    const auto per_node = orbit_counts(g);
    for (const Vec& row : per_node)
        for (std::size_t k = 0; k < kGraphletTypes; ++k) mean[k] += row[k];
    for (double& v : mean) v /= static_cast<double>(g.n);
    return mean;
}

namespace {

double tv_distance(const Vec& p, const Vec& q) {
    const std::size_t n = std::max(p.size(), q.size());
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = i < p.size() ? p[i] : 0.0;
        const double b = i < q.size() ? q[i] : 0.0;
        s += std::fabs(a - b);
    }
    return 0.5 * s;
}

double euclid_distance(const Vec& p, const Vec& q) {
    const std::size_t n = std::max(p.size(), q.size());
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = i < p.size() ? p[i] : 0.0;
        const double b = i < q.size() ? q[i] : 0.0;
        s += (a - b) * (a - b);
    }
    return std::sqrt(s);
}

double kernel_value(const Vec& x, const Vec& y, MmdKernel kernel, double bw) {
    const double d = kernel == MmdKernel::GaussianTV ? tv_distance(x, y) : euclid_distance(x, y);
    return std::exp(-d * d / (2.0 * bw * bw));
}

}  // namespace

MMDResult mmd(const std::vector<Vec>& set_a, const std::vector<Vec>& set_b, MmdKernel kernel,
              double bandwidth) {
    if (set_a.empty() || set_b.empty()) throw precondition_error("mmd: empty input set");
    const double na = static_cast<double>(set_a.size());
    const double nb = static_cast<double>(set_b.size());
    double kaa = 0.0, kbb = 0.0, kab = 0.0;
    for (const Vec& x : set_a)
        for (const Vec& y : set_a) kaa += kernel_value(x, y, kernel, bandwidth);
    for (const Vec& x : set_b)
        for (const Vec& y : set_b) kbb += kernel_value(x, y, kernel, bandwidth);
    for (const Vec& x : set_a)
        for (const Vec& y : set_b) kab += kernel_value(x, y, kernel, bandwidth);
    MMDResult r;
    r.bandwidth = bandwidth;
    r.value = std::max(0.0, kaa / (na * na) + kbb / (nb * nb) - 2.0 * kab / (na * nb));
    return r;
}

MMDResult adjacency_mmd(const std::vector<Graph>& graphs_a, const std::vector<Graph>& graphs_b,
                        double bandwidth) {
    if (graphs_a.empty() || graphs_b.empty())
        throw precondition_error("adjacency_mmd: empty input set");
    const std::size_t n = graphs_a.front().n;
    std::vector<Vec> va, vb;
    for (const Graph& g : graphs_a) {
        if (g.n != n) throw precondition_error("adjacency_mmd: mixed node counts");
        va.push_back(g.a.raw());
    }
    for (const Graph& g : graphs_b) {
        if (g.n != n) throw precondition_error("adjacency_mmd: mixed node counts");
        vb.push_back(g.a.raw());
    }
    MMDResult r = mmd(va, vb, MmdKernel::GaussianRBF, bandwidth);
    r.statistic = "adjacency";
    return r;
}

EvalTable evaluate(const std::vector<Graph>& generated, const std::vector<Graph>& test,
                   const EvalOptions& opt) {
    if (generated.empty() || test.empty()) throw precondition_error("evaluate: empty input set");

    std::size_t maxd = 0;
    for (const Graph& g : generated)
        for (std::size_t d : g.degrees()) maxd = std::max(maxd, d);
    for (const Graph& g : test)
        for (std::size_t d : g.degrees()) maxd = std::max(maxd, d);

    auto hist_set = [&](const std::vector<Graph>& gs, auto fn) {
        std::vector<Vec> out;
        out.reserve(gs.size());
        for (const Graph& g : gs) out.push_back(fn(g));
        return out;
    };

    EvalTable t;
    {
        auto a = hist_set(generated, [&](const Graph& g) { return degree_hist(g, maxd + 1).bins; });
        auto b = hist_set(test, [&](const Graph& g) { return degree_hist(g, maxd + 1).bins; });
        MMDResult r = mmd(a, b, MmdKernel::GaussianTV, opt.bw_degree);
        t.rows.push_back({"degree", r.value, r.bandwidth});
    }
    {
        auto a = hist_set(generated, [](const Graph& g) { return clustering_hist(g).bins; });
        auto b = hist_set(test, [](const Graph& g) { return clustering_hist(g).bins; });
        MMDResult r = mmd(a, b, MmdKernel::GaussianTV, opt.bw_cluster);
        t.rows.push_back({"cluster", r.value, r.bandwidth});
    }
    {
        auto a = hist_set(generated, [](const Graph& g) { return mean_orbit_counts(g); });
        auto b = hist_set(test, [](const Graph& g) { return mean_orbit_counts(g); });
        MMDResult r = mmd(a, b, MmdKernel::GaussianRBF, opt.bw_orbit);
        t.rows.push_back({"orbit", r.value, r.bandwidth});
    }
    for (const EvalRow& row : t.rows) t.avg += row.mmd;
    t.avg /= static_cast<double>(t.rows.size());
    return t;
}

std::string evaluate_csv(const EvalTable& table, const std::string& dataset,
                         const std::string& method, std::size_t n_generated, std::size_t n_test,
                         std::uint64_t seed) {
    std::ostringstream out;
    out << "dataset,method,statistic,mmd,bandwidth,n_generated,n_test,seed\n";
    out.precision(12);
    for (const EvalRow& row : table.rows)
        out << dataset << ',' << method << ',' << row.statistic << ',' << row.mmd << ','
            << row.bandwidth << ',' << n_generated << ',' << n_test << ',' << seed << '\n';
    out << dataset << ',' << method << ",avg," << table.avg << ",," << n_generated << ','
        << n_test << ',' << seed << '\n';
    return out.str();
}

}  // namespace gsdm
