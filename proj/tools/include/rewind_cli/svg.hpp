// Minimal standalone SVG line/scatter plots.
#pragma once

#include <string>
#include <vector>

namespace rewindlab::svg {

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
    std::string color = "#1f77b4";
    bool scatter = false;
};

struct Guide {
    double y;
    std::string label;
};

struct Plot {
    std::string title;
    std::string xlabel;
    std::string ylabel;
    std::vector<Series> series;
    std::vector<Guide> guides;  ///< dashed horizontal lines
    double width = 640;
    double height = 420;
    bool log_x = false;
};

std::string render(const Plot& plot);

/// Several plots stacked vertically in one document.
std::string render_panels(const std::vector<Plot>& plots);

/// Colour i of a fixed palette.
const char* palette(std::size_t i);

}  // namespace rewindlab::svg
