#include "gsdm/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "gsdm/errors.hpp"
#include "gsdm/rng.hpp"

namespace gsdm {

DatasetSpec DatasetSpec::from_config(const Config& cfg, const std::string& prefix) {
    DatasetSpec s;
    s.name = cfg.get_string(prefix + "name", s.name);
    s.count = cfg.get_uint(prefix + "count", s.count);
    s.seed = cfg.get_uint(prefix + "seed", s.seed);
    s.split = cfg.get_double(prefix + "split", s.split);
    s.n_min = cfg.get_uint(prefix + "n_min", s.n_min);
    s.n_max = cfg.get_uint(prefix + "n_max", s.n_max);
    s.p_intra = cfg.get_double(prefix + "p_intra", s.p_intra);
    s.inter_rate = cfg.get_double(prefix + "inter_rate", s.inter_rate);
    s.d_max = cfg.get_uint(prefix + "d_max", s.d_max);
    s.side_min = cfg.get_uint(prefix + "side_min", s.side_min);
    s.side_max = cfg.get_uint(prefix + "side_max", s.side_max);
    s.ego_n_min = cfg.get_uint(prefix + "ego_n_min", s.ego_n_min);
    s.ego_n_max = cfg.get_uint(prefix + "ego_n_max", s.ego_n_max);
    s.ego_base_n = cfg.get_uint(prefix + "ego_base_n", s.ego_base_n);
    s.eig_dist = cfg.get_string(prefix + "eig_dist", s.eig_dist);
    s.synth_n = cfg.get_uint(prefix + "synth_n", s.synth_n);
    if (s.count < 1) throw precondition_error("dataset: count must be >= 1");
    if (!(s.split > 0.0 && s.split < 1.0))
        throw precondition_error("dataset: split must lie in (0, 1)");
    return s;
}

Mat one_hot_degree_features(const Mat& adjacency, std::size_t d_max) {
    const std::size_t n = adjacency.rows();
    Mat x(n, d_max + 1);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t deg = 0;
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && adjacency(i, j) != 0.0) ++deg;
        x(i, std::min(deg, d_max)) = 1.0;
    }
    return x;
}

std::vector<Graph> gen_community_small(const DatasetSpec& spec) {
    if (spec.n_min < 2 || spec.n_max < spec.n_min)
        throw precondition_error("community_small: bad node range");
    std::vector<Graph> out;
    out.reserve(spec.count);
    for (std::size_t g = 0; g < spec.count; ++g) {
        Rng rng(spec.seed, {0xc0551u, g});
        const std::size_t n = spec.n_min + rng.uniform_index(spec.n_max - spec.n_min + 1);
        const std::size_t c1 = (n + 1) / 2;  // first community, ceil(n/2)
        Mat a(n, n);
        auto add_edge = [&](std::size_t i, std::size_t j) {
            a(i, j) = 1.0;
            a(j, i) = 1.0;
        };
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const bool same = (i < c1) == (j < c1);
                if (same && rng.uniform() <= spec.p_intra) add_edge(i, j);
            }
        }
        // bridging edges: expected count inter_rate * n, at least one
        const double pairs = static_cast<double>(c1) * static_cast<double>(n - c1);
        const double q = std::min(1.0, spec.inter_rate * static_cast<double>(n) / pairs);
        std::size_t added = 0;
        for (std::size_t i = 0; i < c1; ++i)
            for (std::size_t j = c1; j < n; ++j)
                if (rng.uniform() <= q) {
                    add_edge(i, j);
                    ++added;
                }
        if (added == 0) {
            const std::size_t i = rng.uniform_index(c1);
            const std::size_t j = c1 + rng.uniform_index(n - c1);
            add_edge(i, j);
        }
        out.emplace_back(one_hot_degree_features(a, spec.d_max), std::move(a));
    }
    return out;
}

std::vector<Graph> gen_grid(const DatasetSpec& spec) {
    if (spec.side_min < 2 || spec.side_max < spec.side_min)
        throw precondition_error("grid: bad side range");
    std::vector<Graph> out;
    out.reserve(spec.count);
    for (std::size_t g = 0; g < spec.count; ++g) {
        Rng rng(spec.seed, {0x92121du, g});
        const std::size_t w = spec.side_min + rng.uniform_index(spec.side_max - spec.side_min + 1);
        const std::size_t h = spec.side_min + rng.uniform_index(spec.side_max - spec.side_min + 1);
        const std::size_t n = w * h;
        Mat a(n, n);
        auto id = [&](std::size_t r, std::size_t c) { return r * w + c; };
        for (std::size_t r = 0; r < h; ++r)
            for (std::size_t c = 0; c < w; ++c) {
                if (c + 1 < w) {
                    a(id(r, c), id(r, c + 1)) = 1.0;
                    a(id(r, c + 1), id(r, c)) = 1.0;
                }
                if (r + 1 < h) {
                    a(id(r, c), id(r + 1, c)) = 1.0;
                    a(id(r + 1, c), id(r, c)) = 1.0;
                }
            }
        out.emplace_back(one_hot_degree_features(a, spec.d_max), std::move(a));
    }
    return out;
}

namespace {

// Barabasi-Albert preferential attachment, two edges per new node.
Mat scale_free_adjacency(std::size_t n, Rng& rng) {
    const std::size_t m = 2;
    Mat a(n, n);
    std::vector<std::size_t> endpoints;  // degree-proportional sampling pool
    for (std::size_t i = 0; i < std::min<std::size_t>(3, n); ++i)
        for (std::size_t j = i + 1; j < std::min<std::size_t>(3, n); ++j) {
            a(i, j) = 1.0;
            a(j, i) = 1.0;
            endpoints.push_back(i);
            endpoints.push_back(j);
        }
    for (std::size_t v = 3; v < n; ++v) {
        std::vector<std::size_t> targets;
        while (targets.size() < m) {
            const std::size_t cand = endpoints[rng.uniform_index(endpoints.size())];
            if (std::find(targets.begin(), targets.end(), cand) == targets.end())
                targets.push_back(cand);
        }
        for (std::size_t t : targets) {
            a(v, t) = 1.0;
            a(t, v) = 1.0;
            endpoints.push_back(v);
            endpoints.push_back(t);
        }
    }
    return a;
}

}  // namespace

std::vector<Graph> gen_ego_small(const DatasetSpec& spec) {
    Rng base_rng(spec.seed, {0xe90u});
    const Mat base = scale_free_adjacency(spec.ego_base_n, base_rng);
    std::vector<Graph> out;
    out.reserve(spec.count);
    std::size_t attempts = 0;
    Rng pick(spec.seed, {0xe90u, 1u});
    while (out.size() < spec.count) {
        if (++attempts > spec.count * 1000)
            throw convergence_error("ego_small: could not collect enough ego graphs in range");
        const std::size_t center = pick.uniform_index(spec.ego_base_n);
        std::vector<std::size_t> nodes{center};
        for (std::size_t j = 0; j < spec.ego_base_n; ++j)
            if (j != center && base(center, j) != 0.0) nodes.push_back(j);
        const std::size_t n = nodes.size();
        if (n < spec.ego_n_min || n > spec.ego_n_max) continue;
        Mat a(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (base(nodes[i], nodes[j]) != 0.0) {
                    a(i, j) = 1.0;
                    a(j, i) = 1.0;
                }
        out.emplace_back(one_hot_degree_features(a, spec.d_max), std::move(a));
    }
    return out;
}

namespace {

// orthonormalize the columns of a random Gaussian matrix (modified
// Gram-Schmidt with one re-orthogonalization pass)
Mat random_orthonormal(std::size_t n, Rng& rng) {
    Mat q(n, n);
    rng.fill_gaussian(q);
    for (std::size_t c = 0; c < n; ++c) {
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t p = 0; p < c; ++p) {
                double proj = 0.0;
                for (std::size_t r = 0; r < n; ++r) proj += q(r, c) * q(r, p);
                for (std::size_t r = 0; r < n; ++r) q(r, c) -= proj * q(r, p);
            }
        }
        double norm = 0.0;
        for (std::size_t r = 0; r < n; ++r) norm += q(r, c) * q(r, c);
        norm = std::sqrt(norm);
        if (norm < 1e-12) throw convergence_error("random_orthonormal: degenerate column");
        for (std::size_t r = 0; r < n; ++r) q(r, c) /= norm;
    }
    return q;
}

}  // namespace

std::vector<Graph> gen_synthetic_spectrum(const DatasetSpec& spec, const std::string& dist) {
    if (dist != "even" && dist != "moderate" && dist != "skewed")
        throw precondition_error("synthetic_spectrum: unknown eigenvalue distribution " + dist);
    const std::size_t n = spec.synth_n;
    std::vector<Graph> out;
    out.reserve(spec.count);
    for (std::size_t g = 0; g < spec.count; ++g) {
        Rng rng(spec.seed, {0x5e17u, g});
        Vec lambda(n);
        if (dist == "even") {
            for (double& v : lambda) v = rng.uniform(-1.0, 1.0);
        } else if (dist == "moderate") {
            for (std::size_t i = 0; i < n; ++i) {
                const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
                lambda[i] = sign * std::pow(0.7, static_cast<double>(i + 1));
            }
        } else {
            lambda[0] = 0.5 * static_cast<double>(n);  // dominant eigenvalue
            for (std::size_t i = 1; i < n; ++i) lambda[i] = rng.uniform(-0.08, 0.08);
        }
        const Mat u = random_orthonormal(n, rng);
        Mat a = symmetrize(recombine_diag(u, lambda));
        // weighted degree, scaled; adjacency is not binary here
        Mat x(n, 1);
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += a(i, j);
            x(i, 0) = s / static_cast<double>(n);
        }
        out.emplace_back(std::move(x), std::move(a), true);
    }
    return out;
}

std::vector<Graph> generate_dataset(const DatasetSpec& spec) {
    if (spec.name == "community_small") return gen_community_small(spec);
    if (spec.name == "grid") return gen_grid(spec);
    if (spec.name == "ego_small") return gen_ego_small(spec);
    if (spec.name == "synthetic_spectrum") return gen_synthetic_spectrum(spec, spec.eig_dist);
    throw precondition_error("unknown dataset name: " + spec.name);
}

void save_dataset(const std::vector<Graph>& graphs, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw format_error("save_dataset: cannot write " + path);
    char buf[64];
    for (const Graph& g : graphs) {
        out << "{\"n\":" << g.n << ",\"d\":" << g.d
            << ",\"weighted\":" << (g.weighted ? "true" : "false") << ",\"x\":[";
        for (std::size_t i = 0; i < g.x.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", g.x.raw()[i]);
            out << (i ? "," : "") << buf;
        }
        out << "],\"a\":[";
        for (std::size_t i = 0; i < g.a.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", g.a.raw()[i]);
            out << (i ? "," : "") << buf;
        }
        out << "]}\n";
    }
}

std::vector<Graph> load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw format_error("load_dataset: cannot open " + path);
    std::vector<Graph> graphs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
            const std::size_t n = j.at("n").get<std::size_t>();
            const std::size_t d = j.at("d").get<std::size_t>();
            const bool weighted = j.at("weighted").get<bool>();
            const auto& xv = j.at("x");
            const auto& av = j.at("a");
            if (xv.size() != n * d || av.size() != n * n)
                throw format_error("field lengths disagree with n/d");
            Mat x(n, d), a(n, n);
            for (std::size_t i = 0; i < x.size(); ++i) x.raw()[i] = xv[i].get<double>();
            for (std::size_t i = 0; i < a.size(); ++i) a.raw()[i] = av[i].get<double>();
            graphs.emplace_back(std::move(x), std::move(a), weighted);
        } catch (const std::exception& e) {
            throw format_error("load_dataset: " + path + " line " + std::to_string(lineno) +
                               ": " + e.what());
        }
    }
    if (graphs.empty())
        std::cerr << "warning: " << path << " contains no graph records\n";
    return graphs;
}

std::pair<std::vector<Graph>, std::vector<Graph>> split_dataset(const std::vector<Graph>& graphs,
                                                                double split,
                                                                std::uint64_t seed) {
    if (!(split > 0.0 && split < 1.0))
        throw precondition_error("split_dataset: split must lie in (0, 1)");
    std::vector<std::size_t> perm(graphs.size());
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(seed, {0x5b117u});
    for (std::size_t i = perm.size(); i > 1; --i)
        std::swap(perm[i - 1], perm[rng.uniform_index(i)]);
    const auto n_train = static_cast<std::size_t>(
        std::llround(split * static_cast<double>(graphs.size())));
    std::pair<std::vector<Graph>, std::vector<Graph>> out;
    for (std::size_t i = 0; i < perm.size(); ++i)
        (i < n_train ? out.first : out.second).push_back(graphs[perm[i]]);
    return out;
}

std::vector<SpectralGraph> prepare_dataset(const std::vector<Graph>& graphs, EigOrder order) {
    std::vector<SpectralGraph> out;
    out.reserve(graphs.size());
    for (const Graph& g : graphs) out.push_back({g, eig_decompose(g.a, order)});
    return out;
}

}  // namespace gsdm
