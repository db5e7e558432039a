// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "internal.hpp"

namespace sgfio::cli {

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_csv(const std::filesystem::path& file, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows)
{
    std::ofstream f(file);
    if (!f) throw std::runtime_error("cannot write " + file.string());
    for (std::size_t k = 0; k < header.size(); ++k) f << (k ? "," : "") << header[k];
    f << '\n';
    for (const auto& r : rows) {
        for (std::size_t k = 0; k < r.size(); ++k) f << (k ? "," : "") << fmt(r[k]);
        f << '\n';
    }
}

namespace {

constexpr double kW = 640, kH = 420, kMl = 70, kMr = 150, kMt = 40, kMb = 50;

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string escape(const std::string& s)
{
    std::string o;
    for (char c : s) {
        if (c == '<') o += "&lt;";
        else if (c == '>') o += "&gt;";
        else if (c == '&') o += "&amp;";
        else o += c;
    }
    return o;
}

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

// blue - white - red
std::string diverging(double u)
{
    u = std::clamp(u, 0.0, 1.0);
    double r, g, b;
    if (u < 0.5) {
        const double w = u / 0.5;
        r = 0.23 + 0.77 * w, g = 0.30 + 0.70 * w, b = 0.75 + 0.25 * w;
    } else {
        const double w = (u - 0.5) / 0.5;
        r = 1.0 - 0.29 * w, g = 1.0 - 0.98 * w, b = 1.0 - 0.85 * w;
    }
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(r * 255), static_cast<int>(g * 255),
                  static_cast<int>(b * 255));
    return buf;
}

}  // namespace

void write_svg_lines(const std::filesystem::path& file, const std::string& title, const std::string& xlabel,
                     const std::vector<Series>& series, bool log_y)
{
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    auto ty = [&](double y) { return log_y ? std::log10(y) : y; };
    for (const auto& s : series)
        for (std::size_t k = 0; k < s.x.size(); ++k) {
            if (log_y && !(s.y[k] > 0.0)) continue;
            x0 = std::min(x0, s.x[k]), x1 = std::max(x1, s.x[k]);
            y0 = std::min(y0, ty(s.y[k])), y1 = std::max(y1, ty(s.y[k]));
        }
    if (!(x1 > x0)) x0 -= 1, x1 += 1;
    if (!(y1 > y0)) y0 -= 1, y1 += 1;
    const double pw = kW - kMl - kMr, ph = kH - kMt - kMb;
    auto px = [&](double x) { return kMl + (x - x0) / (x1 - x0) * pw; };
    auto py = [&](double y) { return kMt + (1.0 - (ty(y) - y0) / (y1 - y0)) * ph; };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title) << "</text>\n";
    o << "<rect x=\"" << kMl << "\" y=\"" << kMt << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double xv = x0 + (x1 - x0) * k / 4, yv = y0 + (y1 - y0) * k / 4;
        o << "<text x=\"" << px(xv) << "\" y=\"" << kH - kMb + 16 << "\" text-anchor=\"middle\">" << num(xv)
          << "</text>\n";
        const double yy = kMt + (1.0 - static_cast<double>(k) / 4) * ph;
        o << "<text x=\"" << kMl - 6 << "\" y=\"" << yy + 4 << "\" text-anchor=\"end\">"
          << (log_y ? "1e" + num(yv) : num(yv)) << "</text>\n";
    }
    o << "<text x=\"" << kMl + pw / 2 << "\" y=\"" << kH - 12 << "\" text-anchor=\"middle\">" << escape(xlabel)
      << "</text>\n";
    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* c = kColors[s % 6];
        o << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t k = 0; k < series[s].x.size(); ++k) {
            if (log_y && !(series[s].y[k] > 0.0)) continue;
            o << num(px(series[s].x[k])) << "," << num(py(series[s].y[k])) << " ";
        }
        o << "\"/>\n";
        const double ly = kMt + 14 + 18.0 * static_cast<double>(s);
        o << "<line x1=\"" << kW - kMr + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << kW - kMr + 30 << "\" y2=\""
          << ly - 4 << "\" stroke=\"" << c << "\" stroke-width=\"2\"/>\n";
        o << "<text x=\"" << kW - kMr + 34 << "\" y=\"" << ly << "\">" << escape(series[s].name) << "</text>\n";
    }
    o << "</svg>\n";
    std::ofstream f(file);
    if (!f) throw std::runtime_error("cannot write " + file.string());
    f << o.str();
}

void write_svg_heatmap(const std::filesystem::path& file, const std::string& title, const TensorGrid& g,
                       const std::function<double(std::size_t, std::size_t)>& v)
{
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t i = 0; i < g.x.n; ++i)
        for (std::size_t j = 0; j < g.xi.n; ++j) {
            const double z = v(i, j);
            if (std::isfinite(z)) lo = std::min(lo, z), hi = std::max(hi, z);
        }
    // symmetric scale when the data changes sign
    if (lo < 0.0 && hi > 0.0) hi = std::max(hi, -lo), lo = -hi;
    if (!(hi > lo)) lo -= 1, hi += 1;
    const double pw = kW - kMl - kMr, ph = kH - kMt - kMb;
    const double cw = pw / static_cast<double>(g.xi.n), ch = ph / static_cast<double>(g.x.n);

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" font-family=\"sans-serif\" font-size=\"12\" shape-rendering=\"crispEdges\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title) << "</text>\n";
    for (std::size_t i = 0; i < g.x.n; ++i)
        for (std::size_t j = 0; j < g.xi.n; ++j) {
            const double z = v(i, j);
            // x upwards, xi to the right
            o << "<rect x=\"" << num(kMl + cw * static_cast<double>(j)) << "\" y=\""
              << num(kMt + ch * static_cast<double>(g.x.n - 1 - i)) << "\" width=\"" << num(cw + 0.5) << "\" height=\""
              << num(ch + 0.5) << "\" fill=\"" << (std::isfinite(z) ? diverging((z - lo) / (hi - lo)) : "#000000")
              << "\"/>\n";
        }
    o << "<text x=\"" << kMl + pw / 2 << "\" y=\"" << kH - 12 << "\" text-anchor=\"middle\">xi in [" << num(g.xi.start)
      << ", " << num(g.xi.last()) << "]</text>\n";
    o << "<text x=\"18\" y=\"" << kMt + ph / 2 << "\" transform=\"rotate(-90 18 " << kMt + ph / 2
      << ")\" text-anchor=\"middle\">x in [" << num(g.x.start) << ", " << num(g.x.last()) << "]</text>\n";
    for (int k = 0; k <= 10; ++k) {
        const double u = k / 10.0;
        o << "<rect x=\"" << kW - kMr + 20 << "\" y=\"" << kMt + (1 - u) * (ph - 20) << "\" width=\"20\" height=\""
          << (ph - 20) / 10 + 1 << "\" fill=\"" << diverging(u) << "\"/>\n";
    }
    o << "<text x=\"" << kW - kMr + 46 << "\" y=\"" << kMt + 10 << "\">" << num(hi) << "</text>\n";
    o << "<text x=\"" << kW - kMr + 46 << "\" y=\"" << kMt + ph - 10 << "\">" << num(lo) << "</text>\n";
    o << "</svg>\n";
    std::ofstream f(file);
    if (!f) throw std::runtime_error("cannot write " + file.string());
    f << o.str();
}

}  // namespace sgfio::cli
