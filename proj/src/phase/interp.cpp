// SPDX-License-Identifier: Apache-2.0
#include "sgfio/interp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sgfio {

Stencil lagrange_stencil(const Axis& axis, double v, int width)
{
    if (width < 2 || width > kMaxStencil) throw std::invalid_argument("lagrange_stencil: bad width");
    if (axis.n < static_cast<std::size_t>(width)) width = static_cast<int>(axis.n);
    const double u = (v - axis.start) / axis.step;
    const double top = static_cast<double>(axis.n - 1);
    if (!(u >= -1e-9 && u <= top + 1e-9))
        throw DomainError("query " + std::to_string(v) + " outside [" + std::to_string(axis.start) + ", " +
                          std::to_string(axis.last()) + "]");
    Stencil st;
    st.width = width;
    const double nearest = std::round(u);
    if (std::abs(u - nearest) <= 1e-12) {
        // on a node: pick a stencil containing it and return a unit weight
        const auto k = static_cast<std::size_t>(std::clamp(nearest, 0.0, top));
        st.start = static_cast<std::size_t>(std::clamp<long>(static_cast<long>(k) - width / 2, 0,
                                                             static_cast<long>(axis.n) - width));
        st.w.fill(0.0);
        st.w[k - st.start] = 1.0;
        return st;
    }
    const long cell = static_cast<long>(std::floor(u));
    st.start = static_cast<std::size_t>(
        std::clamp<long>(cell - (width / 2 - 1), 0, static_cast<long>(axis.n) - width));
    for (int a = 0; a < width; ++a) {
        const double ua = static_cast<double>(st.start) + a;
        double w = 1.0;
        for (int b = 0; b < width; ++b) {
            if (b == a) continue;
            const double ub = static_cast<double>(st.start) + b;
            w *= (u - ub) / (ua - ub);
        }
        st.w[a] = w;
    }
    return st;
}

std::vector<double> fd_weights(int m, double z, const std::vector<double>& x)
{
    // Fornberg (1988), weights c[j][m] for the m-th derivative
    const int n = static_cast<int>(x.size()) - 1;
    if (n < m) throw std::invalid_argument("fd_weights: stencil too small");
    std::vector<std::vector<double>> c(x.size(), std::vector<double>(m + 1, 0.0));
    double c1 = 1.0;
    double c4 = x[0] - z;
    c[0][0] = 1.0;
    for (int i = 1; i <= n; ++i) {
        const int mn = std::min(i, m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - z;
        for (int j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = c[j][m];
    return out;
}

GridField differentiate_axis(const GridField& f, const TensorGrid& g, bool along_x, int width)
{
    const Axis& ax = along_x ? g.x : g.xi;
    const std::size_t n = ax.n;
    width = std::min<int>(width, static_cast<int>(n));
    // one weight set per position class: interior ones are all the same
    std::vector<std::vector<double>> weights(n);
    std::vector<std::size_t> starts(n);
    for (std::size_t k = 0; k < n; ++k) {
        const long s = std::clamp<long>(static_cast<long>(k) - width / 2, 0, static_cast<long>(n) - width);
        starts[k] = static_cast<std::size_t>(s);
        std::vector<double> nodes(width);
        for (int a = 0; a < width; ++a) nodes[a] = static_cast<double>(s + a) * ax.step;
        weights[k] = fd_weights(1, static_cast<double>(k) * ax.step, nodes);
    }
    GridField out(f.nx(), f.nxi());
    for (std::size_t i = 0; i < f.nx(); ++i) {
        for (std::size_t j = 0; j < f.nxi(); ++j) {
            const std::size_t k = along_x ? i : j;
            double acc = 0.0;
            for (int a = 0; a < width; ++a) {
                const std::size_t idx = starts[k] + static_cast<std::size_t>(a);
                acc += weights[k][a] * (along_x ? f(idx, j) : f(i, idx));
            }
            out(i, j) = acc;
        }
    }
    return out;
}

double interpolate(const GridField& f, const TensorGrid& g, double x, double xi, int width)
{
    const Stencil sx = lagrange_stencil(g.x, x, width);
    const Stencil sxi = lagrange_stencil(g.xi, xi, width);
    double acc = 0.0;
    for (int a = 0; a < sx.width; ++a) {
        if (sx.w[a] == 0.0) continue;
        double row = 0.0;
        for (int b = 0; b < sxi.width; ++b) {
            if (sxi.w[b] == 0.0) continue;
            row += sxi.w[b] * f(sx.start + a, sxi.start + b);
        }
        acc += sx.w[a] * row;
    }
    return acc;
}

}  // namespace sgfio
