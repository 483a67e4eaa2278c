#include "gsdm/scorenet.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "gsdm/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace gsdm {

namespace {

Mat with_bias(Mat m, const Vec& b) {
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) += b[j];
    return m;
}

Mat tanh_of(const Mat& m) {
    Mat t = m;
    for (double& v : t.raw()) v = std::tanh(v);
    return t;
}

// dA = dH * (1 - H^2) for H = tanh(A)
Mat tanh_backward(const Mat& dh, const Mat& h) {
    Mat da = dh;
    for (std::size_t i = 0; i < da.size(); ++i)
        da.raw()[i] *= 1.0 - h.raw()[i] * h.raw()[i];
    return da;
}

Vec col_sums(const Mat& m) {
    Vec s(m.cols(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) s[j] += m(i, j);
    return s;
}

void add_to(Mat& acc, const Mat& g) {
    for (std::size_t i = 0; i < acc.size(); ++i) acc.raw()[i] += g.raw()[i];
}
void add_to(Vec& acc, const Vec& g) {
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += g[i];
}

// adjacency rows scaled by 1/(1 + sum |row|)
Mat normalize_rows(const Mat& a) {
    Mat out = a;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 1.0;
        for (std::size_t j = 0; j < a.cols(); ++j) s += std::fabs(a(i, j));
        const double inv = 1.0 / s;
        for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) *= inv;
    }
    return out;
}

void check_finite_inputs(const Mat& x, const Vec& lam) {
    if (!all_finite(x) || !all_finite(lam))
        throw precondition_error("score network: non-finite inputs");
}

// ---- message-passing trunk (two rounds), shared by all heads ----

struct TrunkCache {
    Mat anorm, x;
    Mat m0, h1, m1, h2;
};

TrunkCache trunk_forward(Mat anorm, Mat x, const Mat& w1, const Mat& v1, const Vec& b1,
                         const Mat& w2, const Mat& v2, const Vec& b2) {
    TrunkCache c;
    c.anorm = std::move(anorm);
    c.x = std::move(x);
    c.m0 = matmul(c.anorm, c.x);
    Mat a1 = with_bias(matmul(c.m0, w1), b1);
    add_to(a1, matmul(c.x, v1));
    c.h1 = tanh_of(a1);
    c.m1 = matmul(c.anorm, c.h1);
    Mat a2 = with_bias(matmul(c.m1, w2), b2);
    add_to(a2, matmul(c.h1, v2));
    c.h2 = tanh_of(a2);
    return c;
}

void trunk_backward(const TrunkCache& c, const Mat& dh2, const Mat& w2, const Mat& v2,
                    Mat& dw1, Mat& dv1, Vec& db1, Mat& dw2, Mat& dv2, Vec& db2) {
    const Mat da2 = tanh_backward(dh2, c.h2);
    add_to(dw2, matmul(transpose(c.m1), da2));
    add_to(dv2, matmul(transpose(c.h1), da2));
    add_to(db2, col_sums(da2));
    Mat dh1 = matmul(transpose(c.anorm), matmul(da2, transpose(w2)));
    add_to(dh1, matmul(da2, transpose(v2)));
    const Mat da1 = tanh_backward(dh1, c.h1);
    add_to(dw1, matmul(transpose(c.m0), da1));
    add_to(dv1, matmul(transpose(c.x), da1));
    add_to(db1, col_sums(da1));
}

// ---- feature head ----

struct FeatureCache {
    TrunkCache trunk;
    Mat z, h3, out;
};

FeatureCache feature_forward(const ScoreNetParams& p, const Mat& x_t, const Mat& adjacency,
                             double t) {
    const std::size_t n = x_t.rows();
    const std::size_t hh = p.arch.hidden, ee = p.arch.temb;
    FeatureCache c;
    c.trunk = trunk_forward(normalize_rows(adjacency), x_t, p.theta.w1, p.theta.v1, p.theta.b1,
                            p.theta.w2, p.theta.v2, p.theta.b2);
    const Vec emb = time_embedding(t, ee);
    const std::size_t dd = p.arch.d;
    c.z = Mat(n, hh + dd + ee);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < hh; ++j) c.z(i, j) = c.trunk.h2(i, j);
        for (std::size_t j = 0; j < dd; ++j) c.z(i, hh + j) = x_t(i, j);
        for (std::size_t j = 0; j < ee; ++j) c.z(i, hh + dd + j) = emb[j];
    }
    c.h3 = tanh_of(with_bias(matmul(c.z, p.theta.h1), p.theta.c1));
    c.out = with_bias(matmul(c.h3, p.theta.h2), p.theta.c2);
    return c;
}

void feature_backward(const ScoreNetParams& p, const FeatureCache& c, const Mat& dout,
                      FeatureNetParams& g) {
    add_to(g.h2, matmul(transpose(c.h3), dout));
    add_to(g.c2, col_sums(dout));
    const Mat da3 = tanh_backward(matmul(dout, transpose(p.theta.h2)), c.h3);
    add_to(g.h1, matmul(transpose(c.z), da3));
    add_to(g.c1, col_sums(da3));
    const Mat dz = matmul(da3, transpose(p.theta.h1));
    Mat dh2(c.trunk.h2.rows(), c.trunk.h2.cols());
    for (std::size_t i = 0; i < dh2.rows(); ++i)
        for (std::size_t j = 0; j < dh2.cols(); ++j) dh2(i, j) = dz(i, j);
    trunk_backward(c.trunk, dh2, p.theta.w2, p.theta.v2, g.w1, g.v1, g.b1, g.w2, g.v2, g.b2);
}

// ---- spectrum head ----

struct SpectrumCache {
    Mat z;       // n x in
    Mat h1, h2;  // n x H
    Vec out;     // n
    Vec xmean;   // 1 x d (kept as Vec)
};

std::size_t spectrum_in_dim(const ScoreNetArch& a) {
    return 1 + (a.use_u_features ? 3 : 0) + 2 + a.temb + a.temb;
}

SpectrumCache spectrum_forward(const ScoreNetParams& p, const Mat& x_t, const Vec& lambda_t,
                               const Mat& u, double t) {
    const std::size_t n = lambda_t.size();
    const std::size_t ee = p.arch.temb;
    SpectrumCache c;
    c.xmean.assign(p.arch.d, 0.0);
    if (x_t.rows() > 0) {
        for (std::size_t i = 0; i < x_t.rows(); ++i)
            for (std::size_t j = 0; j < x_t.cols(); ++j) c.xmean[j] += x_t(i, j);
        for (double& v : c.xmean) v /= static_cast<double>(x_t.rows());
    }
    Vec xproj(ee, 0.0);
    for (std::size_t j = 0; j < p.arch.d; ++j)
        for (std::size_t k = 0; k < ee; ++k) xproj[k] += c.xmean[j] * p.phi.wx(j, k);

    double mean_lam = 0.0, max_abs_lam = 0.0;
    for (double v : lambda_t) {
        mean_lam += v;
        max_abs_lam = std::max(max_abs_lam, std::fabs(v));
    }
    mean_lam /= static_cast<double>(n);
    const Vec emb = time_embedding(t, ee);

    const std::size_t in = spectrum_in_dim(p.arch);
    c.z = Mat(n, in);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t col = 0;
        c.z(i, col++) = lambda_t[i];
        if (p.arch.use_u_features) {
            // eigenvector-identity channel: entry sum, cube sum and inverse
            // participation ratio of column i
            double s1 = 0.0, s3 = 0.0, ipr = 0.0;
            for (std::size_t r = 0; r < u.rows(); ++r) {
                const double v = u(r, i);
                s1 += v;
                s3 += v * v * v;
                ipr += v * v * v * v;
            }
            c.z(i, col++) = s1;
            c.z(i, col++) = s3;
            c.z(i, col++) = ipr;
        }
        c.z(i, col++) = mean_lam;
        c.z(i, col++) = max_abs_lam;
        for (std::size_t k = 0; k < ee; ++k) c.z(i, col++) = xproj[k];
        for (std::size_t k = 0; k < ee; ++k) c.z(i, col++) = emb[k];
    }
    c.h1 = tanh_of(with_bias(matmul(c.z, p.phi.w1), p.phi.b1));
    c.h2 = tanh_of(with_bias(matmul(c.h1, p.phi.w2), p.phi.b2));
    const Mat o = with_bias(matmul(c.h2, p.phi.w3), p.phi.b3);
    c.out.resize(n);
    for (std::size_t i = 0; i < n; ++i) c.out[i] = o(i, 0);
    return c;
}

void spectrum_backward(const ScoreNetParams& p, const SpectrumCache& c, const Vec& dout,
                       SpectrumNetParams& g) {
    const std::size_t n = dout.size();
    Mat do_(n, 1);
    for (std::size_t i = 0; i < n; ++i) do_(i, 0) = dout[i];
    add_to(g.w3, matmul(transpose(c.h2), do_));
    add_to(g.b3, col_sums(do_));
    const Mat da2 = tanh_backward(matmul(do_, transpose(p.phi.w3)), c.h2);
    add_to(g.w2, matmul(transpose(c.h1), da2));
    add_to(g.b2, col_sums(da2));
    const Mat da1 = tanh_backward(matmul(da2, transpose(p.phi.w2)), c.h1);
    add_to(g.w1, matmul(transpose(c.z), da1));
    add_to(g.b1, col_sums(da1));
    // xproj columns of z receive shared gradient; route into wx
    const Mat dz = matmul(da1, transpose(p.phi.w1));
    const std::size_t ee = p.arch.temb;
    const std::size_t xproj_col = 1 + (p.arch.use_u_features ? 3 : 0) + 2;
    Vec dxproj(ee, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < ee; ++k) dxproj[k] += dz(i, xproj_col + k);
    for (std::size_t j = 0; j < p.arch.d; ++j)
        for (std::size_t k = 0; k < ee; ++k) g.wx(j, k) += c.xmean[j] * dxproj[k];
}

// ---- pair head (full-rank adjacency scores) ----

struct PairCache {
    TrunkCache trunk;
    Mat zp;  // P x (2H+1+E)
    Mat g1;  // P x H
    Vec out;
    std::size_t n = 0;
};

PairCache pair_forward(const ScoreNetParams& p, const Mat& x_t, const Mat& a_t,
                       const Vec& a_upper, double t) {
    const std::size_t n = x_t.rows();
    const std::size_t hh = p.arch.hidden, ee = p.arch.temb;
    PairCache c;
    c.n = n;
    c.trunk = trunk_forward(normalize_rows(a_t), x_t, p.psi.w1, p.psi.v1, p.psi.b1, p.psi.w2,
                            p.psi.v2, p.psi.b2);
    const Vec emb = time_embedding(t, ee);
    const std::size_t npairs = n * (n - 1) / 2;
    if (a_upper.size() != npairs)
        throw precondition_error("pair_forward: upper-triangle size mismatch");
    c.zp = Mat(npairs, 2 * hh + 1 + ee);
    std::size_t r = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j, ++r) {
            for (std::size_t k = 0; k < hh; ++k) {
                c.zp(r, k) = c.trunk.h2(i, k) + c.trunk.h2(j, k);
                c.zp(r, hh + k) = c.trunk.h2(i, k) * c.trunk.h2(j, k);
            }
            c.zp(r, 2 * hh) = a_upper[r];
            for (std::size_t k = 0; k < ee; ++k) c.zp(r, 2 * hh + 1 + k) = emb[k];
        }
    }
    c.g1 = tanh_of(with_bias(matmul(c.zp, p.psi.p1), p.psi.q1));
    const Mat o = with_bias(matmul(c.g1, p.psi.p2), p.psi.q2);
    c.out.resize(npairs);
    for (std::size_t k = 0; k < npairs; ++k) c.out[k] = o(k, 0);
    return c;
}

void pair_backward(const ScoreNetParams& p, const PairCache& c, const Vec& dout,
                   PairNetParams& g) {
    const std::size_t hh = p.arch.hidden;
    const std::size_t npairs = dout.size();
    Mat do_(npairs, 1);
    for (std::size_t k = 0; k < npairs; ++k) do_(k, 0) = dout[k];
    add_to(g.p2, matmul(transpose(c.g1), do_));
    add_to(g.q2, col_sums(do_));
    const Mat da1 = tanh_backward(matmul(do_, transpose(p.psi.p2)), c.g1);
    add_to(g.p1, matmul(transpose(c.zp), da1));
    add_to(g.q1, col_sums(da1));
    const Mat dzp = matmul(da1, transpose(p.psi.p1));
    Mat dh2(c.n, hh);
    std::size_t r = 0;
    for (std::size_t i = 0; i < c.n; ++i) {
        for (std::size_t j = i + 1; j < c.n; ++j, ++r) {
            for (std::size_t k = 0; k < hh; ++k) {
                dh2(i, k) += dzp(r, k) + dzp(r, hh + k) * c.trunk.h2(j, k);
                dh2(j, k) += dzp(r, k) + dzp(r, hh + k) * c.trunk.h2(i, k);
            }
        }
    }
    trunk_backward(c.trunk, dh2, p.psi.w2, p.psi.v2, g.w1, g.v1, g.b1, g.w2, g.v2, g.b2);
}

void fill_fan_in(Mat& m, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(m.rows()));
    for (double& v : m.raw()) v = rng.uniform(-bound, bound);
}

}  // namespace

Vec adjacency_upper_triangle(const Mat& a) {
    const std::size_t n = a.rows();
    Vec u;
    u.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) u.push_back(a(i, j));
    return u;
}

Mat adjacency_from_upper_triangle(const Vec& upper, std::size_t n) {
    if (upper.size() != n * (n - 1) / 2)
        throw precondition_error("adjacency_from_upper_triangle: size mismatch");
    Mat a(n, n);
    std::size_t r = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j, ++r) {
            a(i, j) = upper[r];
            a(j, i) = upper[r];
        }
    }
    return a;
}

Vec time_embedding(double t, std::size_t dim) {
    if (dim < 2 || dim % 2 != 0)
        throw precondition_error("time_embedding: dim must be even and >= 2");
    const std::size_t half = dim / 2;
    Vec e(dim);
    for (std::size_t k = 0; k < half; ++k) {
        const double expo = half == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(half - 1);
        const double w = std::pow(1.0e4, expo);
        e[2 * k] = std::sin(w * t);
        e[2 * k + 1] = std::cos(w * t);
    }
    return e;
}

ScoreNetParams ScoreNetParams::init(const ScoreNetArch& arch, std::uint64_t seed) {
    if (arch.hidden == 0 || arch.d == 0)
        throw precondition_error("score net: arch dimensions must be positive");
    if (arch.temb < 2 || arch.temb % 2 != 0)
        throw precondition_error("score net: temb must be even and >= 2");
    Rng rng(seed, {0x5c03e11e7u});
    ScoreNetParams p;
    p.arch = arch;
    const std::size_t d = arch.d, hh = arch.hidden, ee = arch.temb;

    p.theta.w1 = Mat(d, hh);
    p.theta.v1 = Mat(d, hh);
    p.theta.b1 = Vec(hh, 0.0);
    p.theta.w2 = Mat(hh, hh);
    p.theta.v2 = Mat(hh, hh);
    p.theta.b2 = Vec(hh, 0.0);
    p.theta.h1 = Mat(hh + d + ee, hh);
    p.theta.c1 = Vec(hh, 0.0);
    p.theta.h2 = Mat(hh, d);  // zero: score starts at 0
    p.theta.c2 = Vec(d, 0.0);
    fill_fan_in(p.theta.w1, rng);
    fill_fan_in(p.theta.v1, rng);
    fill_fan_in(p.theta.w2, rng);
    fill_fan_in(p.theta.v2, rng);
    fill_fan_in(p.theta.h1, rng);

    if (arch.variant == NetVariant::Spectral) {
        p.phi.wx = Mat(d, ee);
        p.phi.w1 = Mat(spectrum_in_dim(arch), hh);
        p.phi.b1 = Vec(hh, 0.0);
        p.phi.w2 = Mat(hh, hh);
        p.phi.b2 = Vec(hh, 0.0);
        p.phi.w3 = Mat(hh, 1);  // zero
        p.phi.b3 = Vec(1, 0.0);
        fill_fan_in(p.phi.wx, rng);
        fill_fan_in(p.phi.w1, rng);
        fill_fan_in(p.phi.w2, rng);
    } else {
        p.psi.w1 = Mat(d, hh);
        p.psi.v1 = Mat(d, hh);
        p.psi.b1 = Vec(hh, 0.0);
        p.psi.w2 = Mat(hh, hh);
        p.psi.v2 = Mat(hh, hh);
        p.psi.b2 = Vec(hh, 0.0);
        p.psi.p1 = Mat(2 * hh + 1 + ee, hh);
        p.psi.q1 = Vec(hh, 0.0);
        p.psi.p2 = Mat(hh, 1);  // zero
        p.psi.q2 = Vec(1, 0.0);
        fill_fan_in(p.psi.w1, rng);
        fill_fan_in(p.psi.v1, rng);
        fill_fan_in(p.psi.w2, rng);
        fill_fan_in(p.psi.v2, rng);
        fill_fan_in(p.psi.p1, rng);
    }
    return p;
}

void ScoreNetParams::for_each_tensor(const std::function<void(const std::string&, Vec&)>& fn) {
    fn("theta.w1", theta.w1.raw());
    fn("theta.v1", theta.v1.raw());
    fn("theta.b1", theta.b1);
    fn("theta.w2", theta.w2.raw());
    fn("theta.v2", theta.v2.raw());
    fn("theta.b2", theta.b2);
    fn("theta.h1", theta.h1.raw());
    fn("theta.c1", theta.c1);
    fn("theta.h2", theta.h2.raw());
    fn("theta.c2", theta.c2);
    if (arch.variant == NetVariant::Spectral) {
        fn("phi.wx", phi.wx.raw());
        fn("phi.w1", phi.w1.raw());
        fn("phi.b1", phi.b1);
        fn("phi.w2", phi.w2.raw());
        fn("phi.b2", phi.b2);
        fn("phi.w3", phi.w3.raw());
        fn("phi.b3", phi.b3);
    } else {
        fn("psi.w1", psi.w1.raw());
        fn("psi.v1", psi.v1.raw());
        fn("psi.b1", psi.b1);
        fn("psi.w2", psi.w2.raw());
        fn("psi.v2", psi.v2.raw());
        fn("psi.b2", psi.b2);
        fn("psi.p1", psi.p1.raw());
        fn("psi.q1", psi.q1);
        fn("psi.p2", psi.p2.raw());
        fn("psi.q2", psi.q2);
    }
}

void ScoreNetParams::for_each_tensor(
    const std::function<void(const std::string&, const Vec&)>& fn) const {
    const_cast<ScoreNetParams*>(this)->for_each_tensor(
        [&](const std::string& name, Vec& v) { fn(name, v); });
}

std::size_t ScoreNetParams::count() const {
    std::size_t c = 0;
    for_each_tensor([&](const std::string&, const Vec& v) { c += v.size(); });
    return c;
}

bool ScoreNetParams::all_finite() const {
    bool ok = true;
    for_each_tensor([&](const std::string&, const Vec& v) {
        for (double x : v)
            if (!std::isfinite(x)) ok = false;
    });
    return ok;
}

ScoreNetParams ScoreNetParams::zeros_like() const {
    ScoreNetParams z = *this;
    z.for_each_tensor([](const std::string&, Vec& v) { std::fill(v.begin(), v.end(), 0.0); });
    return z;
}

Vec spectrum_raw(const ScoreNetParams& p, const Mat& x_t, const Vec& lambda_t, const Mat& u,
                 double t) {
    if (p.arch.variant != NetVariant::Spectral)
        throw precondition_error("spectrum_raw: params are not the spectral variant");
    check_finite_inputs(x_t, lambda_t);
    return spectrum_forward(p, x_t, lambda_t, u, t).out;
}

Mat feature_raw(const ScoreNetParams& p, const Mat& x_t, const Vec& lambda_t, const Mat& u,
                double t) {
    check_finite_inputs(x_t, lambda_t);
    const Mat adj = recombine_diag(u, lambda_t);
    return feature_forward(p, x_t, adj, t).out;
}

Mat feature_raw_fullrank(const ScoreNetParams& p, const Mat& x_t, const Mat& a_t, double t) {
    check_finite_inputs(x_t, a_t.raw());
    return feature_forward(p, x_t, a_t, t).out;
}

Vec pair_raw(const ScoreNetParams& p, const Mat& x_t, const Mat& a_t, const Vec& a_upper_t,
             double t) {
    if (p.arch.variant != NetVariant::FullRank)
        throw precondition_error("pair_raw: params are not the full-rank variant");
    check_finite_inputs(x_t, a_upper_t);
    return pair_forward(p, x_t, a_t, a_upper_t, t).out;
}

Vec spectrum_score(const ScoreNetParams& p, const Mat& x_t, const Vec& lambda_t, const Mat& u,
                   double t, const NoiseSchedule& schedule) {
    const MarginalStats m = schedule.marginal(t);
    if (m.std == 0.0) throw precondition_error("spectrum_score: std(t) = 0");
    Vec x0_hat = spectrum_raw(p, x_t, lambda_t, u, t);
    const double inv_var = 1.0 / (m.std * m.std);
    for (std::size_t i = 0; i < x0_hat.size(); ++i)
        x0_hat[i] = (m.mean_coef * x0_hat[i] - lambda_t[i]) * inv_var;
    return x0_hat;
}

Mat feature_score(const ScoreNetParams& p, const Mat& x_t, const Vec& lambda_t, const Mat& u,
                  double t, const NoiseSchedule& schedule) {
    const MarginalStats m = schedule.marginal(t);
    if (m.std == 0.0) throw precondition_error("feature_score: std(t) = 0");
    Mat x0_hat = feature_raw(p, x_t, lambda_t, u, t);
    const double inv_var = 1.0 / (m.std * m.std);
    for (std::size_t i = 0; i < x0_hat.size(); ++i)
        x0_hat.raw()[i] = (m.mean_coef * x0_hat.raw()[i] - x_t.raw()[i]) * inv_var;
    return x0_hat;
}

namespace {

LossBreakdown loss_impl(const ScoreNetParams& p, const std::vector<TrainExample>& batch,
                        ScoreNetParams* grads) {
    if (batch.empty()) throw precondition_error("loss: empty batch");
    for (const TrainExample& ex : batch)
        if (ex.marg_x.std <= 0.0 || ex.marg_lambda.std <= 0.0)
            throw precondition_error("loss: degenerate marginal (t = 0?)");
    LossBreakdown L;
    const double bn = static_cast<double>(batch.size());
    for (const TrainExample& ex : batch) {
        const std::size_t n = ex.x_t.rows();
        const double nd = static_cast<double>(ex.x_t.size());
        // residual of the assembled noise prediction:
        // (mc * x0_hat - x_t)/std + eps, whose square is the
        // std^2-weighted score-matching error
        const double gx = ex.marg_x.mean_coef / ex.marg_x.std;
        const double gl = ex.marg_lambda.mean_coef / ex.marg_lambda.std;
        if (p.arch.variant == NetVariant::Spectral) {
            const Mat adj = recombine_diag(ex.u, ex.lambda_t);
            FeatureCache fc = feature_forward(p, ex.x_t, adj, ex.t);
            SpectrumCache sc = spectrum_forward(p, ex.x_t, ex.lambda_t, ex.u, ex.t);
            double lx = 0.0, ll = 0.0;
            Mat dout_x(fc.out.rows(), fc.out.cols());
            Vec dout_l(n);
            for (std::size_t i = 0; i < fc.out.size(); ++i) {
                const double r = gx * fc.out.raw()[i] - ex.x_t.raw()[i] / ex.marg_x.std +
                                 ex.eps_x.raw()[i];
                lx += r * r;
                dout_x.raw()[i] = 2.0 * r * gx / (nd * bn);
            }
            for (std::size_t i = 0; i < n; ++i) {
                const double r = gl * sc.out[i] - ex.lambda_t[i] / ex.marg_lambda.std +
                                 ex.eps_lambda[i];
                ll += r * r;
                dout_l[i] = 2.0 * r * gl / (static_cast<double>(n) * bn);
            }
            L.loss_x += lx / nd / bn;
            L.loss_lambda += ll / static_cast<double>(n) / bn;
            if (grads) {
                feature_backward(p, fc, dout_x, grads->theta);
                spectrum_backward(p, sc, dout_l, grads->phi);
            }
        } else {
            FeatureCache fc = feature_forward(p, ex.x_t, ex.a_t, ex.t);
            PairCache pc = pair_forward(p, ex.x_t, ex.a_t, ex.lambda_t, ex.t);
            double lx = 0.0, la = 0.0;
            Mat dout_x(fc.out.rows(), fc.out.cols());
            Vec dout_a(pc.out.size());
            for (std::size_t i = 0; i < fc.out.size(); ++i) {
                const double r = gx * fc.out.raw()[i] - ex.x_t.raw()[i] / ex.marg_x.std +
                                 ex.eps_x.raw()[i];
                lx += r * r;
                dout_x.raw()[i] = 2.0 * r * gx / (nd * bn);
            }
            const double np = static_cast<double>(pc.out.size());
            for (std::size_t i = 0; i < pc.out.size(); ++i) {
                const double r = gl * pc.out[i] - ex.lambda_t[i] / ex.marg_lambda.std +
                                 ex.eps_lambda[i];
                la += r * r;
                dout_a[i] = 2.0 * r * gl / (np * bn);
            }
            L.loss_x += lx / nd / bn;
            L.loss_lambda += la / np / bn;
            if (grads) {
                feature_backward(p, fc, dout_x, grads->theta);
                pair_backward(p, pc, dout_a, grads->psi);
            }
        }
    }
    L.total = L.loss_x + L.loss_lambda;
    if (!std::isfinite(L.total)) throw numeric_error("loss: non-finite value");
    return L;
}

}  // namespace

LossBreakdown loss_and_grads(const ScoreNetParams& p, const std::vector<TrainExample>& batch,
                             ScoreNetParams& grads) {
    grads = p.zeros_like();
    return loss_impl(p, batch, &grads);
}

LossBreakdown loss_only(const ScoreNetParams& p, const std::vector<TrainExample>& batch) {
    return loss_impl(p, batch, nullptr);
}

double grad_check(const ScoreNetParams& p, const std::vector<TrainExample>& batch, double h) {
    if (h <= 0.0) throw precondition_error("grad_check: h must be positive");
    ScoreNetParams grads = p.zeros_like();
    loss_and_grads(p, batch, grads);

    ScoreNetParams work = p;
    std::vector<Vec*> work_tensors, grad_tensors;
    work.for_each_tensor([&](const std::string&, Vec& v) { work_tensors.push_back(&v); });
    grads.for_each_tensor([&](const std::string&, Vec& v) { grad_tensors.push_back(&v); });

    double worst = 0.0;
    for (std::size_t ti = 0; ti < work_tensors.size(); ++ti) {
        Vec& tensor = *work_tensors[ti];
        const Vec& analytic = *grad_tensors[ti];
        for (std::size_t k = 0; k < tensor.size(); ++k) {
            const double saved = tensor[k];
            tensor[k] = saved + h;
            const double up = loss_only(work, batch).total;
            tensor[k] = saved - h;
            const double dn = loss_only(work, batch).total;
            tensor[k] = saved;
            const double cd = (up - dn) / (2.0 * h);
            const double a = analytic[k];
            const double rel = std::fabs(a - cd) / (std::fabs(a) + std::fabs(cd) + 1e-12);
            worst = std::max(worst, rel);
        }
    }
    return worst;
}

// ---- checkpoint I/O ----

namespace {

constexpr char kNetMagic[8] = {'G', 'S', 'D', 'M', 'N', 'E', 'T', '1'};
constexpr char kOptMagic[8] = {'G', 'S', 'D', 'M', 'O', 'P', 'T', '1'};

void write_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void write_u64(std::ostream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
std::uint32_t read_u32(std::istream& in) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw format_error("checkpoint: truncated header");
    return v;
}
std::uint64_t read_u64(std::istream& in) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw format_error("checkpoint: truncated header");
    return v;
}
void write_doubles(std::ostream& out, const Vec& v) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
}
void read_doubles(std::istream& in, Vec& v) {
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (!in) throw format_error("checkpoint: truncated tensor data");
}

void write_params_stream(const ScoreNetParams& p, std::ostream& out) {
    out.write(kNetMagic, sizeof kNetMagic);
    write_u32(out, 1);
    write_u32(out, static_cast<std::uint32_t>(p.arch.variant));
    write_u32(out, static_cast<std::uint32_t>(p.arch.d));
    write_u32(out, static_cast<std::uint32_t>(p.arch.hidden));
    write_u32(out, static_cast<std::uint32_t>(p.arch.temb));
    write_u32(out, p.arch.use_u_features ? 1u : 0u);
    p.for_each_tensor([&](const std::string&, const Vec& v) { write_doubles(out, v); });
}

ScoreNetParams read_params_stream(std::istream& in) {
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kNetMagic, sizeof magic) != 0)
        throw format_error("checkpoint: bad magic");
    const std::uint32_t version = read_u32(in);
    if (version != 1) throw format_error("checkpoint: unsupported version");
    ScoreNetArch arch;
    const std::uint32_t variant = read_u32(in);
    if (variant > 1) throw format_error("checkpoint: unknown variant tag");
    arch.variant = static_cast<NetVariant>(variant);
    arch.d = read_u32(in);
    arch.hidden = read_u32(in);
    arch.temb = read_u32(in);
    arch.use_u_features = read_u32(in) != 0;
    ScoreNetParams p = ScoreNetParams::init(arch, 0);
    p.for_each_tensor([&](const std::string&, Vec& v) { read_doubles(in, v); });
    return p;
}

}  // namespace

void save_params(const ScoreNetParams& p, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw format_error("checkpoint: cannot write " + path);
    write_params_stream(p, out);
}

ScoreNetParams load_params(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw format_error("checkpoint: cannot open " + path);
    return read_params_stream(in);
}

void save_checkpoint(const ScoreNetParams& p, const OptState& opt, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw format_error("checkpoint: cannot write " + path);
    write_params_stream(p, out);
    out.write(kOptMagic, sizeof kOptMagic);
    write_u64(out, opt.step);
    write_doubles(out, opt.m);
    write_doubles(out, opt.v);
}

ScoreNetParams load_checkpoint(const std::string& path, OptState* opt) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw format_error("checkpoint: cannot open " + path);
    ScoreNetParams p = read_params_stream(in);
    if (opt) {
        char magic[8];
        in.read(magic, sizeof magic);
        if (!in || std::memcmp(magic, kOptMagic, sizeof magic) != 0)
            throw format_error("checkpoint: missing optimizer state");
        opt->step = read_u64(in);
        opt->m.assign(p.count(), 0.0);
        opt->v.assign(p.count(), 0.0);
        read_doubles(in, opt->m);
        read_doubles(in, opt->v);
    }
    return p;
}

}  // namespace gsdm
