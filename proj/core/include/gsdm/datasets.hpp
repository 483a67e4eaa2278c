#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gsdm/config.hpp"
#include "gsdm/graph.hpp"

namespace gsdm {

struct DatasetSpec {
    std::string name = "community_small";
    std::size_t count = 100;
    std::uint64_t seed = 0;
    double split = 0.8;  // train fraction

    // community_small
    std::size_t n_min = 12, n_max = 20;
    double p_intra = 0.7;
    double inter_rate = 0.05;  // expected inter-community edges = rate * n
    std::size_t d_max = 10;    // one-hot degree cap -> feature dim d_max + 1

    // grid
    std::size_t side_min = 10, side_max = 20;

    // ego_small
    std::size_t ego_n_min = 4, ego_n_max = 18;
    std::size_t ego_base_n = 200;  // scale-free source graph size

    // synthetic_spectrum
    std::string eig_dist = "even";  // even | moderate | skewed
    std::size_t synth_n = 16;

    // reads dataset.name, dataset.count, dataset.seed, dataset.split,
    // dataset.p_intra, dataset.inter_rate, dataset.d_max, dataset.eig_dist,
    // dataset.synth_n, ...
    static DatasetSpec from_config(const Config& cfg, const std::string& prefix = "dataset.");
};

// One-hot encoding of min(degree, d_max); feature dimension d_max + 1.
Mat one_hot_degree_features(const Mat& adjacency, std::size_t d_max);

// Two equal communities with dense intra-community edges and a handful of
// bridging edges (at least one).
std::vector<Graph> gen_community_small(const DatasetSpec& spec);

// 2D lattices, w x h with w,h uniform in [side_min, side_max].
std::vector<Graph> gen_grid(const DatasetSpec& spec);

// 1-hop ego networks extracted from one seeded scale-free graph; sizes
// clamped to [ego_n_min, ego_n_max].
std::vector<Graph> gen_ego_small(const DatasetSpec& spec);

// Weighted graphs assembled from a drawn eigenvalue distribution and a
// random orthonormal basis: A = U diag(lambda) U^T.
std::vector<Graph> gen_synthetic_spectrum(const DatasetSpec& spec, const std::string& dist);

// dispatch on spec.name
std::vector<Graph> generate_dataset(const DatasetSpec& spec);

// One JSON object per line: {"n":..,"d":..,"weighted":..,"x":[..],"a":[..]}.
// Floats are written with 17 significant digits so round-trips are
// bit-exact. Malformed records raise format_error with the line number.
void save_dataset(const std::vector<Graph>& graphs, const std::string& path);
std::vector<Graph> load_dataset(const std::string& path);

// Deterministic seeded permutation split (train fraction `split`).
std::pair<std::vector<Graph>, std::vector<Graph>> split_dataset(const std::vector<Graph>& graphs,
                                                                double split,
                                                                std::uint64_t seed);

// Graph paired with its eigendecomposition; decomposition happens once at
// load time, never inside training or sampling loops.
struct SpectralGraph {
    Graph g;
    Spectrum spec;
};

std::vector<SpectralGraph> prepare_dataset(const std::vector<Graph>& graphs,
                                           EigOrder order = EigOrder::Magnitude);

}  // namespace gsdm
