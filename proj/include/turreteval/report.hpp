#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "io.hpp"

namespace turreteval {

inline std::string fmt_fixed(double v, int prec = 2) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
    return std::string(buf);
}

inline std::string fmt_sig(double v, int sig = 6) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", sig, v);
    return std::string(buf);
}

inline void write_csv(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write file: " + path);
    for (std::size_t i = 0; i < header.size(); ++i)
        out << header[i] << (i + 1 < header.size() ? "," : "");
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << row[i] << (i + 1 < row.size() ? "," : "");
        out << '\n';
    }
}

// Small static SVG chart writer: line series, scatter series, and bar series
// over a single x/y frame with ticks, labels, and a legend. Output is
// deterministic (fixed-precision coordinates, insertion-ordered elements).
class SvgPlot {
public:
    SvgPlot(std::string title, std::string x_label, std::string y_label)
        : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

    void add_line(const std::string& name, const std::vector<double>& x,
                  const std::vector<double>& y) {
        series_.push_back({name, x, y, Kind::Line});
    }

    void add_scatter(const std::string& name, const std::vector<double>& x,
                     const std::vector<double>& y) {
        series_.push_back({name, x, y, Kind::Scatter});
    }

    // bars centered on x with the given width in data units
    void add_bars(const std::string& name, const std::vector<double>& x,
                  const std::vector<double>& y, double bar_width) {
        series_.push_back({name, x, y, Kind::Bars, bar_width});
    }

    void write(const std::string& path) const {
        double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
        bool any = false;
        for (const auto& s : series_) {
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!any) {
                    xmin = xmax = s.x[i];
                    ymin = ymax = s.y[i];
                    any = true;
                } else {
                    xmin = std::min(xmin, s.x[i]);
                    xmax = std::max(xmax, s.x[i]);
                    ymin = std::min(ymin, s.y[i]);
                    ymax = std::max(ymax, s.y[i]);
                }
            }
            if (s.kind == Kind::Bars) ymin = std::min(ymin, 0.0);
        }
        if (!any) {
            xmin = ymin = 0;
            xmax = ymax = 1;
        }
        if (xmax == xmin) {
            xmax += 1;
            xmin -= 1;
        }
        if (ymax == ymin) {
            ymax += 1;
            ymin -= 1;
        }
        const double xpad = 0.05 * (xmax - xmin), ypad = 0.05 * (ymax - ymin);
        xmin -= xpad; xmax += xpad; ymin -= ypad; ymax += ypad;

        auto sx = [&](double x) { return kMl + (x - xmin) / (xmax - xmin) * (kW - kMl - kMr); };
        auto sy = [&](double y) { return kH - kMb - (y - ymin) / (ymax - ymin) * (kH - kMt - kMb); };

        std::ofstream out(path);
        if (!out) throw ValidationError("cannot write file: " + path);
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
            << "\" viewBox=\"0 0 " << kW << " " << kH << "\">\n";
        out << "<rect width=\"" << kW << "\" height=\"" << kH << "\" fill=\"white\"/>\n";
        out << "<text x=\"" << kW / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\" "
               "font-family=\"sans-serif\">" << escape(title_) << "</text>\n";

        // axes
        out << "<line x1=\"" << kMl << "\" y1=\"" << kH - kMb << "\" x2=\"" << kW - kMr
            << "\" y2=\"" << kH - kMb << "\" stroke=\"black\"/>\n";
        out << "<line x1=\"" << kMl << "\" y1=\"" << kMt << "\" x2=\"" << kMl << "\" y2=\""
            << kH - kMb << "\" stroke=\"black\"/>\n";
        for (int i = 0; i <= 5; ++i) {
            const double fx = xmin + (xmax - xmin) * i / 5.0;
            const double fy = ymin + (ymax - ymin) * i / 5.0;
            out << "<line x1=\"" << fmt_fixed(sx(fx)) << "\" y1=\"" << kH - kMb << "\" x2=\""
                << fmt_fixed(sx(fx)) << "\" y2=\"" << kH - kMb + 4 << "\" stroke=\"black\"/>\n";
            out << "<text x=\"" << fmt_fixed(sx(fx)) << "\" y=\"" << kH - kMb + 16
                << "\" text-anchor=\"middle\" font-size=\"10\" font-family=\"sans-serif\">"
                << fmt_sig(fx, 4) << "</text>\n";
            out << "<line x1=\"" << kMl - 4 << "\" y1=\"" << fmt_fixed(sy(fy)) << "\" x2=\"" << kMl
                << "\" y2=\"" << fmt_fixed(sy(fy)) << "\" stroke=\"black\"/>\n";
            out << "<text x=\"" << kMl - 6 << "\" y=\"" << fmt_fixed(sy(fy) + 3)
                << "\" text-anchor=\"end\" font-size=\"10\" font-family=\"sans-serif\">"
                << fmt_sig(fy, 4) << "</text>\n";
        }
        out << "<text x=\"" << (kMl + kW - kMr) / 2 << "\" y=\"" << kH - 8
            << "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\">"
            << escape(x_label_) << "</text>\n";
        out << "<text x=\"14\" y=\"" << (kMt + kH - kMb) / 2
            << "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\" "
               "transform=\"rotate(-90 14 " << (kMt + kH - kMb) / 2 << ")\">"
            << escape(y_label_) << "</text>\n";

        for (std::size_t si = 0; si < series_.size(); ++si) {
            const auto& s = series_[si];
            const std::string color = kPalette[si % kPalette.size()];
            if (s.kind == Kind::Line) {
                out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
                for (std::size_t i = 0; i < s.x.size(); ++i)
                    out << fmt_fixed(sx(s.x[i])) << ',' << fmt_fixed(sy(s.y[i])) << ' ';
                out << "\"/>\n";
            } else if (s.kind == Kind::Scatter) {
                for (std::size_t i = 0; i < s.x.size(); ++i)
                    out << "<circle cx=\"" << fmt_fixed(sx(s.x[i])) << "\" cy=\""
                        << fmt_fixed(sy(s.y[i])) << "\" r=\"2\" fill=\"" << color << "\"/>\n";
            } else {
                const double half = s.bar_width / 2.0;
                for (std::size_t i = 0; i < s.x.size(); ++i) {
                    const double x0 = sx(s.x[i] - half), x1 = sx(s.x[i] + half);
                    const double y0 = sy(std::max(0.0, s.y[i])), y1 = sy(std::min(0.0, s.y[i]));
                    out << "<rect x=\"" << fmt_fixed(x0) << "\" y=\"" << fmt_fixed(y0) << "\" width=\""
                        << fmt_fixed(x1 - x0) << "\" height=\"" << fmt_fixed(y1 - y0)
                        << "\" fill=\"" << color << "\" fill-opacity=\"0.6\"/>\n";
                }
            }
        }
        // legend
        for (std::size_t si = 0; si < series_.size(); ++si) {
            const double ly = kMt + 14.0 * static_cast<double>(si) + 8;
            out << "<rect x=\"" << kW - kMr - 150 << "\" y=\"" << fmt_fixed(ly - 7)
                << "\" width=\"10\" height=\"10\" fill=\"" << kPalette[si % kPalette.size()]
                << "\"/>\n";
            out << "<text x=\"" << kW - kMr - 136 << "\" y=\"" << fmt_fixed(ly + 2)
                << "\" font-size=\"10\" font-family=\"sans-serif\">" << escape(series_[si].name)
                << "</text>\n";
        }
        out << "</svg>\n";
    }

private:
    enum class Kind { Line, Scatter, Bars };
    struct Series {
        std::string name;
        std::vector<double> x, y;
        Kind kind = Kind::Line;
        double bar_width = 1.0;
    };

    static std::string escape(const std::string& s) {
        std::string out;
        for (char c : s) {
            if (c == '&') out += "&amp;";
            else if (c == '<') out += "&lt;";
            else if (c == '>') out += "&gt;";
            else out += c;
        }
        return out;
    }

    static constexpr int kW = 640, kH = 480, kMl = 64, kMr = 24, kMt = 30, kMb = 44;
    static inline const std::vector<std::string> kPalette = {
        "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

    std::string title_, x_label_, y_label_;
    std::vector<Series> series_;
};

} // namespace turreteval
