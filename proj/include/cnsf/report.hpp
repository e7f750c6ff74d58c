#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "cnsf/errors.hpp"

namespace cnsf {

using Json = nlohmann::json; // objects keep sorted keys, so dumps are stable

/// Shortest round-trip decimal form; identical input bits give identical text.
inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    // trim to the shortest representation that still round-trips
    for (int prec = 1; prec <= 17; ++prec) {
        char cand[40];
        std::snprintf(cand, sizeof cand, "%.*g", prec, x);
        if (std::strtod(cand, nullptr) == x) return cand;
    }
    return buf;
}

struct Cell {
    std::variant<std::string, double, long long> value;

    Cell(const char* s) : value(std::string(s)) {}
    Cell(std::string s) : value(std::move(s)) {}
    Cell(double d) : value(d) {}
    Cell(int i) : value(static_cast<long long>(i)) {}
    Cell(long long i) : value(i) {}
    Cell(uint64_t i) : value(static_cast<long long>(i)) {}

    std::string csv() const {
        if (std::holds_alternative<double>(value)) return format_double(std::get<double>(value));
        if (std::holds_alternative<long long>(value))
            return std::to_string(std::get<long long>(value));
        const std::string& s = std::get<std::string>(value);
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string out = "\"";
        for (char c : s) {
            if (c == '"') out += '"';
            out += c;
        }
        out += '"';
        return out;
    }
};

using Row = std::vector<Cell>;

inline void write_csv(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<Row>& rows) {
    std::ofstream os(path, std::ios::binary); // binary: byte-identical across runs
    if (!os) throw ContractError("cannot open for writing: " + path);
    for (std::size_t i = 0; i < header.size(); ++i)
        os << (i ? "," : "") << Cell(header[i]).csv();
    os << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i].csv();
        os << "\n";
    }
    if (!os) throw ContractError("write failed: " + path);
}

inline void write_json(const std::string& path, const Json& j) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ContractError("cannot open for writing: " + path);
    os << j.dump(2) << "\n";
    if (!os) throw ContractError("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Minimal SVG log-log plot: one polyline per series, labeled axes.
// ---------------------------------------------------------------------------

struct PlotSeries {
    std::string label;
    std::vector<std::pair<double, double>> points; // (x, y), positive for log axes
};

inline void write_svg_plot(const std::string& path, const std::string& title,
                           const std::string& xlabel, const std::string& ylabel,
                           const std::vector<PlotSeries>& series, bool logx = true,
                           bool logy = true) {
    if (series.empty()) throw ContractError("svg plot: no series");
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    bool any = false;
    for (const auto& s : series)
        for (auto [x, y] : s.points) {
            if ((logx && x <= 0) || (logy && y <= 0)) continue;
            any = true;
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    if (!any) throw ContractError("svg plot: no plottable points");
    if (xmax == xmin) xmax = logx ? xmin * 10 : xmin + 1;
    if (ymax == ymin) ymax = logy ? ymin * 10 : ymin + 1;
    const double W = 640, H = 480, L = 70, R = 20, Tm = 40, Bm = 50;
    auto xcoord = [&](double x) { return logx ? std::log10(x) : x; };
    auto ycoord = [&](double y) { return logy ? std::log10(y) : y; };
    auto X = [&](double x) {
        return L + (xcoord(x) - xcoord(xmin)) / (xcoord(xmax) - xcoord(xmin)) * (W - L - R);
    };
    auto Y = [&](double y) {
        return H - Bm - (ycoord(y) - ycoord(ymin)) / (ycoord(ymax) - ycoord(ymin)) * (H - Tm - Bm);
    };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ContractError("cannot open for writing: " + path);
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
       << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    os << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << title
       << "</text>\n";
    os << "<line x1=\"" << L << "\" y1=\"" << H - Bm << "\" x2=\"" << W - R << "\" y2=\"" << H - Bm
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << L << "\" y1=\"" << Tm << "\" x2=\"" << L << "\" y2=\"" << H - Bm
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"" << H - 12
       << "\" text-anchor=\"middle\" font-size=\"13\">" << xlabel << "</text>\n";
    os << "<text x=\"16\" y=\"" << H / 2 << "\" text-anchor=\"middle\" font-size=\"13\" "
       << "transform=\"rotate(-90 16 " << H / 2 << ")\">" << ylabel << "</text>\n";
    auto ticks = [&](bool logscale, double lo, double hi) {
        std::vector<std::pair<double, std::string>> out;
        if (logscale) {
            for (int e = int(std::ceil(std::log10(lo))); e <= int(std::floor(std::log10(hi))); ++e)
                out.push_back({std::pow(10.0, e), "1e" + std::to_string(e)});
        } else {
            for (int i = 0; i <= 4; ++i) {
                const double v = lo + (hi - lo) * i / 4;
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.3g", v);
                out.push_back({v, buf});
            }
        }
        return out;
    };
    for (auto& [x, label] : ticks(logx, xmin, xmax)) {
        os << "<line x1=\"" << X(x) << "\" y1=\"" << H - Bm << "\" x2=\"" << X(x) << "\" y2=\""
           << H - Bm + 5 << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << X(x) << "\" y=\"" << H - Bm + 18
           << "\" text-anchor=\"middle\" font-size=\"11\">" << label << "</text>\n";
    }
    for (auto& [y, label] : ticks(logy, ymin, ymax)) {
        os << "<line x1=\"" << L - 5 << "\" y1=\"" << Y(y) << "\" x2=\"" << L << "\" y2=\"" << Y(y)
           << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << L - 8 << "\" y=\"" << Y(y) + 4
           << "\" text-anchor=\"end\" font-size=\"11\">" << label << "</text>\n";
    }
    int ci = 0;
    for (const auto& s : series) {
        const char* col = colors[ci % 8];
        os << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
        for (auto [x, y] : s.points)
            if (!((logx && x <= 0) || (logy && y <= 0)))
                os << format_double(X(x)) << "," << format_double(Y(y)) << " ";
        os << "\"/>\n";
        for (auto [x, y] : s.points)
            if (!((logx && x <= 0) || (logy && y <= 0)))
                os << "<circle cx=\"" << format_double(X(x)) << "\" cy=\"" << format_double(Y(y))
                   << "\" r=\"3\" fill=\"" << col << "\"/>\n";
        os << "<text x=\"" << W - R - 8 << "\" y=\"" << Tm + 16 + 16 * ci
           << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << col << "\">" << s.label
           << "</text>\n";
        ++ci;
    }
    os << "</svg>\n";
    if (!os) throw ContractError("write failed: " + path);
}

} // namespace cnsf
