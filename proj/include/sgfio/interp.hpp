// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <stdexcept>
#include <vector>

#include "sgfio/grid.hpp"

namespace sgfio {

class DomainError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

inline constexpr int kMaxStencil = 10;

/// Lagrange weights for one axis; width consecutive nodes starting at `start`.
struct Stencil {
    std::size_t start = 0;
    int width = 0;
    std::array<double, kMaxStencil> w{};
};

/// Throws DomainError if v lies outside the axis (beyond a 1e-9 step slack).
Stencil lagrange_stencil(const Axis& axis, double v, int width);

/// Fornberg weights for the `deriv`-th derivative at z from nodes `xs`.
std::vector<double> fd_weights(int deriv, double z, const std::vector<double>& xs);

/// Derivative of a node field along x (along_x) or xi, with a width-point stencil shifted at the edges.
GridField differentiate_axis(const GridField& f, const TensorGrid& g, bool along_x, int width);

/// Separable interpolation of a node field.
double interpolate(const GridField& f, const TensorGrid& g, double x, double xi, int width);

}  // namespace sgfio
