#include "gsdm/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gsdm/errors.hpp"

namespace gsdm::svg {

namespace {

constexpr int kW = 640, kH = 400;
constexpr int kMarginL = 70, kMarginR = 20, kMarginT = 40, kMarginB = 60;
const char* const kColors[] = {"#4878d0", "#ee854a", "#6acc64", "#d65f5f",
                               "#956cb4", "#8c613c"};

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string fmt(double v) {
    std::ostringstream ss;
    ss.precision(4);
    ss << v;
    return ss.str();
}

struct Canvas {
    std::ostringstream body;

    void text(double x, double y, const std::string& s, int size = 12,
              const std::string& anchor = "middle") {
        body << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" font-size=\"" << size
             << "\" font-family=\"sans-serif\" text-anchor=\"" << anchor << "\">" << escape(s)
             << "</text>\n";
    }
    void line(double x1, double y1, double x2, double y2, const std::string& stroke = "#333",
              double width = 1.0) {
        body << "<line x1=\"" << fmt(x1) << "\" y1=\"" << fmt(y1) << "\" x2=\"" << fmt(x2)
             << "\" y2=\"" << fmt(y2) << "\" stroke=\"" << stroke << "\" stroke-width=\""
             << fmt(width) << "\"/>\n";
    }
    void rect(double x, double y, double w, double h, const std::string& fill) {
        body << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\"" << fmt(w)
             << "\" height=\"" << fmt(h) << "\" fill=\"" << fill << "\"/>\n";
    }
    std::string finish(const std::string& title) {
        std::ostringstream out;
        out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
            << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\""
            << kH << "\" viewBox=\"0 0 " << kW << " " << kH << "\">\n"
            << "<rect width=\"" << kW << "\" height=\"" << kH << "\" fill=\"white\"/>\n"
            << "<text x=\"" << kW / 2 << "\" y=\"24\" font-size=\"15\" "
            << "font-family=\"sans-serif\" text-anchor=\"middle\">" << escape(title)
            << "</text>\n"
            << body.str() << "</svg>\n";
        return out.str();
    }
};

struct Range {
    double lo = 0.0, hi = 1.0;
    double map(double v, double pix_lo, double pix_hi) const {
        if (hi == lo) return 0.5 * (pix_lo + pix_hi);
        return pix_lo + (v - lo) / (hi - lo) * (pix_hi - pix_lo);
    }
};

Range nice_range(double lo, double hi) {
    if (lo > hi) std::swap(lo, hi);
    if (lo == hi) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double pad = 0.05 * (hi - lo);
    return {std::min(0.0, lo - pad), hi + pad};
}

void y_axis(Canvas& c, const Range& r, const std::string& label) {
    c.line(kMarginL, kMarginT, kMarginL, kH - kMarginB);
    for (int k = 0; k <= 4; ++k) {
        const double v = r.lo + (r.hi - r.lo) * k / 4.0;
        const double y = r.map(v, kH - kMarginB, kMarginT);
        c.line(kMarginL - 4, y, kMarginL, y);
        c.text(kMarginL - 8, y + 4, fmt(v), 10, "end");
    }
    if (!label.empty()) c.text(16, kMarginT - 10, label, 11, "start");
}

}  // namespace

std::string bar_chart(const std::vector<std::string>& labels, const Vec& values,
                      const std::string& title) {
    if (labels.size() != values.size())
        throw precondition_error("bar_chart: labels/values size mismatch");
    Canvas c;
    double hi = 0.0;
    for (double v : values) hi = std::max(hi, v);
    const Range r = nice_range(0.0, hi);
    y_axis(c, r, "");
    c.line(kMarginL, kH - kMarginB, kW - kMarginR, kH - kMarginB);
    const double span = kW - kMarginL - kMarginR;
    const double slot = span / std::max<std::size_t>(1, values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double x = kMarginL + slot * (static_cast<double>(i) + 0.2);
        const double y = r.map(values[i], kH - kMarginB, kMarginT);
        c.rect(x, y, slot * 0.6, (kH - kMarginB) - y, kColors[i % 6]);
        c.text(x + slot * 0.3, kH - kMarginB + 16, labels[i], 11);
        c.text(x + slot * 0.3, y - 4, fmt(values[i]), 10);
    }
    return c.finish(title);
}

std::string line_chart(const std::vector<Series>& series, const std::string& title,
                       const std::string& x_label, const std::string& y_label) {
    Canvas c;
    double xlo = 0.0, xhi = 1.0, ylo = 0.0, yhi = 1.0;
    bool first = true;
    for (const Series& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (first) {
                xlo = xhi = s.x[i];
                ylo = yhi = s.y[i];
                first = false;
            }
            xlo = std::min(xlo, s.x[i]);
            xhi = std::max(xhi, s.x[i]);
            ylo = std::min(ylo, s.y[i]);
            yhi = std::max(yhi, s.y[i]);
        }
    const Range rx = {xlo, xhi == xlo ? xlo + 1.0 : xhi};
    const Range ry = nice_range(ylo, yhi);
    y_axis(c, ry, y_label);
    c.line(kMarginL, kH - kMarginB, kW - kMarginR, kH - kMarginB);
    c.text((kMarginL + kW - kMarginR) / 2.0, kH - 16, x_label, 11);
    for (int k = 0; k <= 4; ++k) {
        const double v = rx.lo + (rx.hi - rx.lo) * k / 4.0;
        const double x = rx.map(v, kMarginL, kW - kMarginR);
        c.line(x, kH - kMarginB, x, kH - kMarginB + 4);
        c.text(x, kH - kMarginB + 16, fmt(v), 10);
    }
    for (std::size_t si = 0; si < series.size(); ++si) {
        const Series& s = series[si];
        const std::string color = kColors[si % 6];
        for (std::size_t i = 0; i + 1 < s.x.size(); ++i)
            c.line(rx.map(s.x[i], kMarginL, kW - kMarginR),
                   ry.map(s.y[i], kH - kMarginB, kMarginT),
                   rx.map(s.x[i + 1], kMarginL, kW - kMarginR),
                   ry.map(s.y[i + 1], kH - kMarginB, kMarginT), color, 1.8);
        c.text(kW - kMarginR - 4, kMarginT + 16.0 * (static_cast<double>(si) + 1.0),
               s.name, 11, "end");
    }
    return c.finish(title);
}

std::string box_plot(const std::vector<std::string>& labels, const std::vector<Vec>& groups,
                     const std::string& title) {
    if (labels.size() != groups.size())
        throw precondition_error("box_plot: labels/groups size mismatch");
    Canvas c;
    double lo = 0.0, hi = 1.0;
    bool first = true;
    for (const Vec& g : groups)
        for (double v : g) {
            if (first) {
                lo = hi = v;
                first = false;
            }
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    const Range r = nice_range(lo, hi);
    y_axis(c, r, "");
    c.line(kMarginL, kH - kMarginB, kW - kMarginR, kH - kMarginB);
    const double span = kW - kMarginL - kMarginR;
    const double slot = span / std::max<std::size_t>(1, groups.size());
    for (std::size_t i = 0; i < groups.size(); ++i) {
        Vec v = groups[i];
        if (v.empty()) continue;
        std::sort(v.begin(), v.end());
        auto q = [&](double p) {
            const double idx = p * static_cast<double>(v.size() - 1);
            const std::size_t k = static_cast<std::size_t>(idx);
            const double frac = idx - static_cast<double>(k);
            return k + 1 < v.size() ? v[k] * (1.0 - frac) + v[k + 1] * frac : v[k];
        };
        const double cx = kMarginL + slot * (static_cast<double>(i) + 0.5);
        const double w = slot * 0.4;
        const double ymin = r.map(v.front(), kH - kMarginB, kMarginT);
        const double ymax = r.map(v.back(), kH - kMarginB, kMarginT);
        const double yq1 = r.map(q(0.25), kH - kMarginB, kMarginT);
        const double yq3 = r.map(q(0.75), kH - kMarginB, kMarginT);
        const double ymed = r.map(q(0.5), kH - kMarginB, kMarginT);
        c.line(cx, ymin, cx, ymax, "#555");
        c.rect(cx - w / 2, yq3, w, yq1 - yq3, kColors[i % 6]);
        c.line(cx - w / 2, ymed, cx + w / 2, ymed, "#000", 1.5);
        c.text(cx, kH - kMarginB + 16, labels[i], 11);
    }
    return c.finish(title);
}

void write_file(const std::string& path, const std::string& svg) {
    std::ofstream out(path);
    if (!out) throw format_error("svg: cannot write " + path);
    out << svg;
}

}  // namespace gsdm::svg
