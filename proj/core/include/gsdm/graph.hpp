#pragma once

#include <cstddef>
#include <vector>

#include "gsdm/linalg.hpp"

namespace gsdm {

// A graph is a node-feature matrix paired with a symmetric adjacency
// matrix. Binary datasets keep entries in {0,1} with a zero diagonal;
// synthetic-spectrum datasets carry weighted adjacencies and set
// `weighted`.
struct Graph {
    std::size_t n = 0;  // node count
    std::size_t d = 0;  // feature dimension
    Mat x;              // n x d node features
    Mat a;              // n x n adjacency, symmetric
    bool weighted = false;

    Graph() = default;
    Graph(Mat features, Mat adjacency, bool weighted_flag = false);

    std::size_t edge_count() const;  // undirected edges, binary adjacency
    std::vector<std::size_t> degrees() const;
};

enum class EigOrder {
    Magnitude,  // descending |lambda| (default)
    Signed,     // descending lambda
};

// Eigendecomposition of a symmetric matrix: columns of u are orthonormal
// eigenvectors, lambda the matching eigenvalues, order the permutation
// that was applied to the raw Jacobi output.
struct Spectrum {
    Mat u;
    Vec lambda;
    std::vector<std::size_t> order;

    std::size_t n() const { return lambda.size(); }
};

// Cyclic Jacobi eigendecomposition. Converges when the off-diagonal
// Frobenius norm drops below 1e-12; throws convergence_error (reporting
// the residual) after 100 sweeps otherwise. Deterministic for a fixed
// input: fixed sweep order, eigenvector sign fixed by making each
// column's largest-magnitude component positive.
Spectrum eig_decompose(const Mat& a, EigOrder order = EigOrder::Magnitude);

// u * diag(lambda) * u^T, symmetrized exactly.
Mat recompose(const Spectrum& s);

// Keep the top floor(alpha*n) eigenpairs under the |lambda| ranking
// (at least one); discarded eigenvalues are zeroed, eigenvectors kept so
// recomposition shapes are unchanged.
Spectrum truncate_spectrum(const Spectrum& s, double alpha);

// Indices of the floor(alpha*n) largest-|lambda| entries (>= 1 kept).
std::vector<std::size_t> top_k_by_magnitude(const Vec& lambda, double alpha);

// Symmetrize by averaging, threshold, zero the diagonal.
Mat binarize(const Mat& a_cont, double threshold = 0.5);

}  // namespace gsdm
