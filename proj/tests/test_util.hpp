#pragma once

#include <cmath>
#include <cstdint>

#include "gsdm/graph.hpp"
#include "gsdm/linalg.hpp"
#include "gsdm/rng.hpp"

namespace gsdm::testutil {

inline Mat random_symmetric(std::size_t n, Rng& rng, double scale = 1.0) {
    Mat a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            const double v = scale * rng.gaussian();
            a(i, j) = v;
            a(j, i) = v;
        }
    return a;
}

inline Mat random_orthonormal(std::size_t n, Rng& rng) {
    Mat q(n, n);
    rng.fill_gaussian(q);
    for (std::size_t c = 0; c < n; ++c) {
        for (int pass = 0; pass < 2; ++pass)
            for (std::size_t p = 0; p < c; ++p) {
                double proj = 0.0;
                for (std::size_t r = 0; r < n; ++r) proj += q(r, c) * q(r, p);
                for (std::size_t r = 0; r < n; ++r) q(r, c) -= proj * q(r, p);
            }
        double norm = 0.0;
        for (std::size_t r = 0; r < n; ++r) norm += q(r, c) * q(r, c);
        norm = std::sqrt(norm);
        for (std::size_t r = 0; r < n; ++r) q(r, c) /= norm;
    }
    return q;
}

struct Moments {
    double mean = 0.0;
    double var = 0.0;
    std::size_t n = 0;
    double se_mean() const { return std::sqrt(var / static_cast<double>(n)); }
    // standard error of the sample variance under approximate normality
    double se_var() const { return var * std::sqrt(2.0 / static_cast<double>(n)); }
};

inline Moments moments(const Vec& xs) {
    Moments m;
    m.n = xs.size();
    for (double x : xs) m.mean += x;
    m.mean /= static_cast<double>(m.n);
    for (double x : xs) m.var += (x - m.mean) * (x - m.mean);
    m.var /= static_cast<double>(m.n - 1);
    return m;
}

inline Graph binary_graph(const Mat& a) {
    Mat x(a.rows(), 1);
    for (std::size_t i = 0; i < a.rows(); ++i) x(i, 0) = 1.0;
    return Graph(std::move(x), Mat(a));
}

inline Graph random_er_graph(std::size_t n, double p, Rng& rng) {
    Mat a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (rng.uniform() < p) {
                a(i, j) = 1.0;
                a(j, i) = 1.0;
            }
    return binary_graph(a);
}

}  // namespace gsdm::testutil
