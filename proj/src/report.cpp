#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "advd/report.hpp"

namespace advd {

std::string format_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

void CsvWriter::sep() {
    if (row_open_) buf_ += ",";
    row_open_ = true;
}

CsvWriter& CsvWriter::header(const std::vector<std::string>& columns) {
    for (const auto& c : columns) cell(c);
    return end_row();
}

CsvWriter& CsvWriter::cell(const std::string& v) {
    sep();
    buf_ += v;
    return *this;
}
CsvWriter& CsvWriter::cell(double v) { return cell(format_double(v)); }
CsvWriter& CsvWriter::cell(std::size_t v) { return cell(std::to_string(v)); }
CsvWriter& CsvWriter::cell(int v) { return cell(std::to_string(v)); }

CsvWriter& CsvWriter::end_row() {
    buf_ += "\n";
    row_open_ = false;
    return *this;
}

void CsvWriter::write(const std::string& path, std::uint64_t seed,
                      const std::string& config_hash) {
    std::string out = buf_;
    out += "# seed=" + std::to_string(seed) + " config_hash=" + config_hash + "\n";
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + path);
    f.write(out.data(), std::streamsize(out.size()));
    if (!f.good()) throw std::runtime_error("write failure on " + path);
}

namespace {

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                          "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

}  // namespace

void write_svg_chart(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<ChartSeries>& series, double x_min, double x_max,
                     double y_min, double y_max) {
    const double W = 640, H = 480;
    const double L = 70, R = 150, T = 45, B = 55;  // margins (legend on the right)
    const double pw = W - L - R, ph = H - T - B;
    if (x_max <= x_min) x_max = x_min + 1;
    if (y_max <= y_min) y_max = y_min + 1;

    auto X = [&](double x) { return L + (x - x_min) / (x_max - x_min) * pw; };
    auto Y = [&](double y) { return T + ph - (y - y_min) / (y_max - y_min) * ph; };

    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
         "viewBox=\"0 0 640 480\">\n";
    s += "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
    s += "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-size=\"16\" "
         "font-family=\"sans-serif\">" + title + "</text>\n";

    // axes
    s += "<line x1=\"" + svg_num(L) + "\" y1=\"" + svg_num(T) + "\" x2=\"" + svg_num(L) +
         "\" y2=\"" + svg_num(T + ph) + "\" stroke=\"black\"/>\n";
    s += "<line x1=\"" + svg_num(L) + "\" y1=\"" + svg_num(T + ph) + "\" x2=\"" +
         svg_num(L + pw) + "\" y2=\"" + svg_num(T + ph) + "\" stroke=\"black\"/>\n";

    for (int i = 0; i <= 5; ++i) {
        const double fx = x_min + (x_max - x_min) * i / 5.0;
        const double fy = y_min + (y_max - y_min) * i / 5.0;
        s += "<line x1=\"" + svg_num(X(fx)) + "\" y1=\"" + svg_num(T + ph) + "\" x2=\"" +
             svg_num(X(fx)) + "\" y2=\"" + svg_num(T + ph + 5) + "\" stroke=\"black\"/>\n";
        s += "<text x=\"" + svg_num(X(fx)) + "\" y=\"" + svg_num(T + ph + 20) +
             "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">" +
             format_double(fx) + "</text>\n";
        s += "<line x1=\"" + svg_num(L - 5) + "\" y1=\"" + svg_num(Y(fy)) + "\" x2=\"" +
             svg_num(L) + "\" y2=\"" + svg_num(Y(fy)) + "\" stroke=\"black\"/>\n";
        s += "<text x=\"" + svg_num(L - 9) + "\" y=\"" + svg_num(Y(fy) + 4) +
             "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">" +
             format_double(fy) + "</text>\n";
    }
    s += "<text x=\"" + svg_num(L + pw / 2) + "\" y=\"" + svg_num(H - 12) +
         "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\">" + x_label +
         "</text>\n";
    s += "<text x=\"18\" y=\"" + svg_num(T + ph / 2) +
         "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\" "
         "transform=\"rotate(-90 18 " + svg_num(T + ph / 2) + ")\">" + y_label + "</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& sr = series[k];
        const char* color = kPalette[k % 8];
        std::string pts;
        for (std::size_t i = 0; i < sr.x.size(); ++i) {
            if (i) pts += " ";
            pts += svg_num(X(sr.x[i])) + "," + svg_num(Y(sr.y[i]));
        }
        s += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
             "\" stroke-width=\"1.8\" points=\"" + pts + "\"/>\n";
        const double ly = T + 16 + 18 * double(k);
        s += "<line x1=\"" + svg_num(L + pw + 12) + "\" y1=\"" + svg_num(ly) + "\" x2=\"" +
             svg_num(L + pw + 34) + "\" y2=\"" + svg_num(ly) + "\" stroke=\"" + color +
             "\" stroke-width=\"2.5\"/>\n";
        s += "<text x=\"" + svg_num(L + pw + 40) + "\" y=\"" + svg_num(ly + 4) +
             "\" font-size=\"12\" font-family=\"sans-serif\">" + sr.name + "</text>\n";
    }
    s += "</svg>\n";

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + path);
    f.write(s.data(), std::streamsize(s.size()));
}

}  // namespace advd
