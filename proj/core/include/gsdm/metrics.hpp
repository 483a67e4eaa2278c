#pragma once

#include <string>
#include <vector>

#include "gsdm/graph.hpp"
#include "gsdm/linalg.hpp"

namespace gsdm {

// Normalized distribution of a per-node statistic.
struct StatHistogram {
    Vec bins;             // non-negative, sums to 1 for non-empty graphs
    std::string support;  // human-readable bin description
};

struct MMDResult {
    double value = 0.0;  // squared MMD, biased estimator, clipped at 0
    std::string statistic;
    double bandwidth = 0.0;
};

enum class MmdKernel {
    GaussianTV,   // exp(-tv(p,q)^2 / (2 bw^2)), tv = half L1 of histograms
    GaussianRBF,  // exp(-|x-y|^2 / (2 bw^2)) on raw vectors
};

// Degree distribution; bins 0..max degree, optionally padded so sets of
// graphs share a common support.
StatHistogram degree_hist(const Graph& g, std::size_t pad_to = 0);

// Local clustering coefficients binned into 100 equal bins on [0, 1].
StatHistogram clustering_hist(const Graph& g);

// number of triangles through each node (brute force; used by the
// clustering computation and exposed for tests)
std::vector<std::size_t> triangle_counts(const Graph& g);

// The six connected 4-node graphlet types, in this order:
// path, star, cycle, tailed triangle, diamond, clique.
constexpr std::size_t kGraphletTypes = 6;
extern const char* const kGraphletNames[kGraphletTypes];

// Per-node membership counts in each connected 4-node graphlet type,
// by exhaustive enumeration of all C(n,4) node subsets.
std::vector<Vec> orbit_counts(const Graph& g);

// Per-graph orbit statistic for MMD: node-averaged counts.
Vec mean_orbit_counts(const Graph& g);

// Biased squared-MMD estimator between two sets of statistic vectors.
MMDResult mmd(const std::vector<Vec>& set_a, const std::vector<Vec>& set_b, MmdKernel kernel,
              double bandwidth);

// Gaussian-RBF MMD over flattened adjacency matrices; all graphs must
// share one node count.
MMDResult adjacency_mmd(const std::vector<Graph>& graphs_a, const std::vector<Graph>& graphs_b,
                        double bandwidth);

struct EvalOptions {
    double bw_degree = 1.0;
    double bw_cluster = 0.1;
    double bw_orbit = 30.0;
};

struct EvalRow {
    std::string statistic;
    double mmd = 0.0;
    double bandwidth = 0.0;
};

struct EvalTable {
    std::vector<EvalRow> rows;  // degree, cluster, orbit
    double avg = 0.0;
};

// Degree / clustering / orbit MMDs plus their mean ("Avg").
EvalTable evaluate(const std::vector<Graph>& generated, const std::vector<Graph>& test,
                   const EvalOptions& opt = {});

// CSV with columns dataset,method,statistic,mmd,bandwidth,n_generated,n_test,seed
std::string evaluate_csv(const EvalTable& table, const std::string& dataset,
                         const std::string& method, std::size_t n_generated, std::size_t n_test,
                         std::uint64_t seed);

}  // namespace gsdm
