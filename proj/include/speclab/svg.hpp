#pragma once

#include <string>
#include <vector>

namespace speclab {

/// Minimal self-contained SVG line chart: inline polylines, axes, ticks, and
/// a legend; no scripts or external assets. Output is deterministic for
/// identical inputs.
class SvgLineChart {
public:
    SvgLineChart(std::string title, std::string x_label, std::string y_label);

    /// Adds one series; colors cycle through a fixed palette.
    void add_series(std::string name, std::vector<double> xs, std::vector<double> ys);

    /// Free-form annotation drawn under the title.
    void set_note(std::string note);

    std::string render() const;

private:
    std::string title_;
    std::string x_label_;
    std::string y_label_;
    std::string note_;
    struct Series {
        std::string name;
        std::vector<double> xs;
        std::vector<double> ys;
    };
    std::vector<Series> series_;
};

}  // namespace speclab
