#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "gsdm/errors.hpp"

namespace gsdm {

using Vec = std::vector<double>;

// Dense row-major matrix of doubles. Everything in this project is
// desk-scale (n <= 400), so no sparsity or blocking.
class Mat {
  public:
    Mat() = default;
    Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Mat identity(std::size_t n) {
        Mat m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    Vec& raw() { return data_; }
    const Vec& raw() const { return data_; }

    bool operator==(const Mat& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
    }

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Vec data_;
};

inline Mat matmul(const Mat& a, const Mat& b) {
    if (a.cols() != b.rows()) throw precondition_error("matmul: inner dimensions differ");
    Mat c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    }
    return c;
}

inline Mat transpose(const Mat& a) {
    Mat t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

// u * diag(d) * u^T without forming diag(d).
inline Mat recombine_diag(const Mat& u, const Vec& d) {
    if (u.cols() != d.size()) throw precondition_error("recombine_diag: dimension mismatch");
    const std::size_t n = u.rows(), m = u.cols();
    Mat out(n, n);
    for (std::size_t h = 0; h < m; ++h) {
        const double dh = d[h];
        if (dh == 0.0) continue;
        for (std::size_t i = 0; i < n; ++i) {
            const double uih = u(i, h) * dh;
            for (std::size_t j = 0; j < n; ++j) out(i, j) += uih * u(j, h);
        }
    }
    return out;
}

inline double max_abs_diff(const Mat& a, const Mat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw precondition_error("max_abs_diff: shape mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::fabs(a.raw()[i] - b.raw()[i]));
    return m;
}

inline double max_abs(const Mat& a) {
    double m = 0.0;
    for (double v : a.raw()) m = std::max(m, std::fabs(v));
    return m;
}

inline double frobenius(const Mat& a) {
    double s = 0.0;
    for (double v : a.raw()) s += v * v;
    return std::sqrt(s);
}

inline double off_diagonal_frobenius(const Mat& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
}

inline bool is_symmetric(const Mat& a, double tol) {
    if (a.rows() != a.cols()) return false;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = i + 1; j < a.cols(); ++j)
            if (std::fabs(a(i, j) - a(j, i)) > tol) return false;
    return true;
}

inline Mat symmetrize(const Mat& a) {
    if (a.rows() != a.cols()) throw precondition_error("symmetrize: matrix not square");
    Mat s(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) s(i, j) = 0.5 * (a(i, j) + a(j, i));
    return s;
}

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

inline bool all_finite(const Vec& a) {
    return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

inline bool all_finite(const Mat& a) { return all_finite(a.raw()); }

}  // namespace gsdm
