// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace sgfio {

/// Japanese bracket <v> = sqrt(1 + v^2).
inline double ang(double v) { return std::sqrt(1.0 + v * v); }

/// Uniform tensor grid on [-x_half, x_half] x [-xi_half, xi_half], endpoints included.
struct SampleGrid {
    double x_half = 4.0;
    double xi_half = 4.0;
    std::size_t nx = 65;
    std::size_t nxi = 65;

    SampleGrid() = default;
    SampleGrid(double x_half_, double xi_half_, std::size_t nx_, std::size_t nxi_)
        : x_half(x_half_), xi_half(xi_half_), nx(nx_), nxi(nxi_)
    {
        validate();
    }

    void validate() const
    {
        if (nx < 2 || nxi < 2) throw std::invalid_argument("SampleGrid: need at least 2 points per axis");
        if (!(x_half > 0.0) || !(xi_half > 0.0)) throw std::invalid_argument("SampleGrid: degenerate range");
    }

    double dx() const { return 2.0 * x_half / static_cast<double>(nx - 1); }
    double dxi() const { return 2.0 * xi_half / static_cast<double>(nxi - 1); }
    double x(std::size_t i) const { return -x_half + static_cast<double>(i) * dx(); }
    double xi(std::size_t j) const { return -xi_half + static_cast<double>(j) * dxi(); }
    std::size_t size() const { return nx * nxi; }

    std::vector<double> xs() const
    {
        std::vector<double> v(nx);
        for (std::size_t i = 0; i < nx; ++i) v[i] = x(i);
        return v;
    }
    std::vector<double> xis() const
    {
        std::vector<double> v(nxi);
        for (std::size_t j = 0; j < nxi; ++j) v[j] = xi(j);
        return v;
    }

    /// Same spacing, extended by `extra` nodes on every side.
    SampleGrid padded(std::size_t extra_x, std::size_t extra_xi) const
    {
        return SampleGrid(x_half + static_cast<double>(extra_x) * dx(), xi_half + static_cast<double>(extra_xi) * dxi(),
                          nx + 2 * extra_x, nxi + 2 * extra_xi);
    }
};

/// Uniform axis start + i*step, i < n.
struct Axis {
    double start = 0.0;
    double step = 1.0;
    std::size_t n = 0;

    double at(std::size_t i) const { return start + static_cast<double>(i) * step; }
    double last() const { return at(n - 1); }
};

/// Tensor product of two uniform axes; SampleGrid and the quantization grid both map onto it.
struct TensorGrid {
    Axis x;
    Axis xi;

    TensorGrid() = default;
    TensorGrid(Axis x_, Axis xi_) : x(x_), xi(xi_)
    {
        if (x.n < 2 || xi.n < 2 || !(x.step > 0.0) || !(xi.step > 0.0))
            throw std::invalid_argument("TensorGrid: degenerate axis");
    }
    TensorGrid(const SampleGrid& g) : TensorGrid(Axis{-g.x_half, g.dx(), g.nx}, Axis{-g.xi_half, g.dxi(), g.nxi}) {}

    std::size_t size() const { return x.n * xi.n; }
    TensorGrid padded(std::size_t ex, std::size_t exi) const
    {
        return {Axis{x.start - static_cast<double>(ex) * x.step, x.step, x.n + 2 * ex},
                Axis{xi.start - static_cast<double>(exi) * xi.step, xi.step, xi.n + 2 * exi}};
    }
};

/// Row-major (x index major) storage of one real value per grid node.
class GridField {
public:
    GridField() = default;
    GridField(std::size_t nx, std::size_t nxi, double fill = 0.0) : nx_(nx), nxi_(nxi), data_(nx * nxi, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data_[i * nxi_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * nxi_ + j]; }
    std::size_t nx() const { return nx_; }
    std::size_t nxi() const { return nxi_; }
    bool empty() const { return data_.empty(); }
    const std::vector<double>& data() const { return data_; }

private:
    std::size_t nx_ = 0;
    std::size_t nxi_ = 0;
    std::vector<double> data_;
};

}  // namespace sgfio
