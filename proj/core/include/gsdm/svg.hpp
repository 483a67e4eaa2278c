#pragma once

#include <string>
#include <vector>

#include "gsdm/linalg.hpp"

namespace gsdm::svg {

// Self-contained static SVG charts; no external renderer involved.

std::string bar_chart(const std::vector<std::string>& labels, const Vec& values,
                      const std::string& title);

struct Series {
    std::string name;
    Vec x, y;
};
std::string line_chart(const std::vector<Series>& series, const std::string& title,
                       const std::string& x_label, const std::string& y_label);

// one box per group: median, quartiles, whiskers at min/max
std::string box_plot(const std::vector<std::string>& labels,
                     const std::vector<Vec>& groups, const std::string& title);

void write_file(const std::string& path, const std::string& svg);

}  // namespace gsdm::svg
