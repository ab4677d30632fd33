#pragma once

// Minimal SVG line charts for sweep reports.

#include <string>
#include <utility>
#include <vector>

namespace abstain {

struct ChartSeries {
    std::string name;
    std::vector<std::pair<double, double>> points;  // drawn in the given order
};

std::string line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::vector<ChartSeries>& series);

}  // namespace abstain
