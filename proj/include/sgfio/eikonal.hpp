// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <memory>
#include <vector>

#include "sgfio/phase.hpp"
#include "sgfio/symbols.hpp"

namespace sgfio {

class ShootingError : public std::runtime_error {
public:
    ShootingError(const std::string& what, double x, double xi) : std::runtime_error(what), x_(x), xi_(xi) {}
    double x() const { return x_; }
    double xi() const { return xi_; }

private:
    double x_;
    double xi_;
};

/// Characteristics dq = -a_xi, dp = a_x from (y, xi) at time s, integrated by fixed-step RK4.
class CharacteristicFlow {
public:
    struct State {
        double q = 0.0;
        double p = 0.0;
        double action = 0.0;            // int (a - p a_xi) dtheta
        std::array<double, 4> M{};      // d(q,p)/d(y,xi), row major
    };

    CharacteristicFlow(const SgSymbol& a, double h);

    State integrate(double y, double xi, double s, double t) const;
    /// Number of RK4 steps used between s and t.
    int steps(double s, double t) const;

private:
    void rhs(double theta, double s, const double* u, double* du) const;

    double h_;
    std::function<double(const Point&)> a_, ax_, axi_, axx_, axxi_, axixi_;
};

struct EikonalOptions {
    double h = 1e-3;            // RK4 step bound
    double shoot_tol = 1e-12;   // |q(t) - x| relative to max(1, |x|)
    int max_newton = 40;
    GriddedOptions grid;
};

/// phi(t, s, .) on a tensor grid with exact first and second derivatives at the nodes.
class EikonalPhase : public GriddedPhase {
public:
    struct Diagnostics {
        double max_residual = 0.0;   // max |q(t; y) - x| over nodes
        int max_newton = 0;
        long total_newton = 0;
        int rk_steps = 0;
    };

    EikonalPhase(TensorGrid g, std::map<Key, GridField> fields, std::string name, GriddedOptions opt, double t,
                 double s, Diagnostics diag)
        : GriddedPhase(std::move(g), std::move(fields), std::move(name), opt), t_(t), s_(s), diag_(diag)
    {
    }

    double t() const { return t_; }
    double s() const { return s_; }
    const Diagnostics& diagnostics() const { return diag_; }

private:
    double t_;
    double s_;
    Diagnostics diag_;
};

using EikonalPtr = std::shared_ptr<const EikonalPhase>;

/// Solves d_t phi = a(t, x, phi_x), phi(s, s) = x xi, for t >= s.
EikonalPtr solve_eikonal(const SgSymbol& a, double t, double s, const TensorGrid& g, const EikonalOptions& opt = {});

/// Same, for several end times sharing the start s; each level warm-starts from the previous one.
std::vector<EikonalPtr> solve_eikonal_levels(const SgSymbol& a, double s, const std::vector<double>& times,
                                             const TensorGrid& g, const EikonalOptions& opt = {});

/// sup over interior nodes of |d_s phi + a(s, phi_xi, xi)|, d_s by centred differences re-solving at s +- delta.
double verify_backward(const EikonalPhase& phi, const SgSymbol& a, const EikonalOptions& opt = {},
                       double delta = 1e-3);

/// sup over interior nodes of |d_t phi - a(t, x, phi_x)|, d_t by centred differences in t.
double verify_forward(const EikonalPhase& phi, const SgSymbol& a, const EikonalOptions& opt = {},
                      double delta = 1e-3);

}  // namespace sgfio
