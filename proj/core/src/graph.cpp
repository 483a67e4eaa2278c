#include "gsdm/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace gsdm {

Graph::Graph(Mat features, Mat adjacency, bool weighted_flag)
    : n(adjacency.rows()),
      d(features.cols()),
      x(std::move(features)),
      a(std::move(adjacency)),
      weighted(weighted_flag) {
    if (a.rows() != a.cols()) throw precondition_error("Graph: adjacency not square");
    if (x.rows() != a.rows()) throw precondition_error("Graph: X/A row mismatch");
    if (!is_symmetric(a, 0.0)) throw precondition_error("Graph: adjacency not symmetric");
}

std::size_t Graph::edge_count() const {
    std::size_t m = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (a(i, j) != 0.0) ++m;
    return m;
}

std::vector<std::size_t> Graph::degrees() const {
    std::vector<std::size_t> deg(n, 0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && a(i, j) != 0.0) ++deg[i];
    return deg;
}

namespace {

constexpr double kOffDiagTol = 1e-12;
constexpr int kMaxSweeps = 100;

// One Jacobi rotation zeroing a(p,q), accumulating eigenvectors in v.
void rotate(Mat& a, Mat& v, std::size_t p, std::size_t q) {
    const double apq = a(p, q);
    if (apq == 0.0) return;
    const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
    const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                     (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
    const double c = 1.0 / std::sqrt(t * t + 1.0);
    const double s = t * c;
    const std::size_t n = a.rows();
    for (std::size_t k = 0; k < n; ++k) {
        const double akp = a(k, p), akq = a(k, q);
        a(k, p) = c * akp - s * akq;
        a(k, q) = s * akp + c * akq;
    }
    for (std::size_t k = 0; k < n; ++k) {
        const double apk = a(p, k), aqk = a(q, k);
        a(p, k) = c * apk - s * aqk;
        a(q, k) = s * apk + c * aqk;
    }
    for (std::size_t k = 0; k < n; ++k) {
        const double vkp = v(k, p), vkq = v(k, q);
        v(k, p) = c * vkp - s * vkq;
        v(k, q) = s * vkp + c * vkq;
    }
}

}  // namespace

Spectrum eig_decompose(const Mat& input, EigOrder order) {
    if (input.rows() != input.cols()) throw precondition_error("eig_decompose: matrix not square");
    if (!is_symmetric(input, 1e-12))
        throw precondition_error("eig_decompose: matrix not symmetric within 1e-12");
    const std::size_t n = input.rows();

    Mat a = symmetrize(input);  // work on an exactly symmetric copy
    Mat v = Mat::identity(n);

    double off = off_diagonal_frobenius(a);
    int sweep = 0;
    while (off >= kOffDiagTol) {
        if (sweep++ >= kMaxSweeps)
            throw convergence_error("eig_decompose: no convergence in " +
                                    std::to_string(kMaxSweeps) +
                                    " sweeps, off-diagonal norm " + std::to_string(off));
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) rotate(a, v, p, q);
        off = off_diagonal_frobenius(a);
    }

    Vec lambda(n);
    for (std::size_t i = 0; i < n; ++i) lambda[i] = a(i, i);

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    if (order == EigOrder::Magnitude) {
        std::stable_sort(perm.begin(), perm.end(), [&](std::size_t i, std::size_t j) {
            return std::fabs(lambda[i]) > std::fabs(lambda[j]);
        });
    } else {
        std::stable_sort(perm.begin(), perm.end(),
                         [&](std::size_t i, std::size_t j) { return lambda[i] > lambda[j]; });
    }

    Spectrum s;
    s.lambda.resize(n);
    s.u = Mat(n, n);
    s.order = perm;
    for (std::size_t col = 0; col < n; ++col) {
        const std::size_t src = perm[col];
        s.lambda[col] = lambda[src];
        // sign convention: largest-magnitude component positive
        std::size_t arg = 0;
        double best = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (std::fabs(v(i, src)) > best) {
                best = std::fabs(v(i, src));
                arg = i;
            }
        }
        const double sign = v(arg, src) < 0.0 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < n; ++i) s.u(i, col) = sign * v(i, src);
    }
    return s;
}

Mat recompose(const Spectrum& s) {
    if (s.u.cols() != s.lambda.size())
        throw precondition_error("recompose: U/lambda dimension mismatch");
    return symmetrize(recombine_diag(s.u, s.lambda));
}

std::vector<std::size_t> top_k_by_magnitude(const Vec& lambda, double alpha) {
    if (!(alpha > 0.0) || alpha > 1.0)
        throw precondition_error("alpha must lie in (0, 1]");
    const std::size_t n = lambda.size();
    std::size_t k = static_cast<std::size_t>(std::floor(alpha * static_cast<double>(n)));
    k = std::max<std::size_t>(k, 1);
    k = std::min(k, n);
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) {
        return std::fabs(lambda[i]) > std::fabs(lambda[j]);
    });
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

Spectrum truncate_spectrum(const Spectrum& s, double alpha) {
    const auto keep = top_k_by_magnitude(s.lambda, alpha);
    Spectrum out = s;
    Vec zeroed(s.lambda.size(), 0.0);
    for (std::size_t i : keep) zeroed[i] = s.lambda[i];
    out.lambda = std::move(zeroed);
    return out;
}

Mat binarize(const Mat& a_cont, double threshold) {
    if (a_cont.rows() != a_cont.cols()) throw precondition_error("binarize: matrix not square");
    const std::size_t n = a_cont.rows();
    Mat b(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double avg = 0.5 * (a_cont(i, j) + a_cont(j, i));
            const double e = avg > threshold ? 1.0 : 0.0;
            b(i, j) = e;
            b(j, i) = e;
        }
    }
    return b;
}

}  // namespace gsdm
