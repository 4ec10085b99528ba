#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace advd {

/// CSV writer: comma separators, '.' decimals, LF line endings, and a footer
/// comment recording the master seed and config hash.
class CsvWriter {
public:
    CsvWriter& header(const std::vector<std::string>& columns);
    CsvWriter& cell(const std::string& v);
    CsvWriter& cell(double v);
    CsvWriter& cell(std::size_t v);
    CsvWriter& cell(int v);
    CsvWriter& end_row();
    void write(const std::string& path, std::uint64_t seed, const std::string& config_hash);
    const std::string& text() const { return buf_; }

private:
    void sep();
    std::string buf_;
    bool row_open_ = false;
};

std::string format_double(double v);

struct ChartSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

/// Minimal self-contained SVG line chart (axes, ticks, legend, polylines).
void write_svg_chart(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<ChartSeries>& series, double x_min, double x_max,
                     double y_min, double y_max);

}  // namespace advd
