// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <memory>
#include <string>
#include <utility>

#include "sgfio/grid.hpp"
#include "sgfio/interp.hpp"
#include "sgfio/symbols.hpp"

namespace sgfio {

/// Real phase phi(x, xi) with partial derivatives D_x^bx D_xi^bxi up to max_order().
class PhaseFunction {
public:
    virtual ~PhaseFunction() = default;

    virtual double derivative(int bx, int bxi, double x, double xi) const = 0;
    virtual int max_order() const = 0;
    virtual std::string name() const = 0;

    /// Fills out(i, j) with the derivative at the nodes of g.
    virtual GridField sample(int bx, int bxi, const TensorGrid& g) const;

    double operator()(double x, double xi) const { return derivative(0, 0, x, xi); }
    double phi_x(double x, double xi) const { return derivative(1, 0, x, xi); }
    double phi_xi(double x, double xi) const { return derivative(0, 1, x, xi); }

protected:
    void check_order(int bx, int bxi) const;
};

using PhasePtr = std::shared_ptr<const PhaseFunction>;

/// D_x^bx D_xi^bxi of x*xi.
inline double xxi_derivative(int bx, int bxi, double x, double xi)
{
    if (bx == 0 && bxi == 0) return x * xi;
    if (bx == 1 && bxi == 0) return xi;
    if (bx == 0 && bxi == 1) return x;
    if (bx == 1 && bxi == 1) return 1.0;
    return 0.0;
}

/// Derivative of J = phi - x*xi.
inline double j_derivative(const PhaseFunction& phi, int bx, int bxi, double x, double xi)
{
    return phi.derivative(bx, bxi, x, xi) - xxi_derivative(bx, bxi, x, xi);
}

/// Phase given by a symbol frozen at (t, s).
class ExprPhase : public PhaseFunction {
public:
    ExprPhase(SgSymbol a, double t = 0.0, double s = 0.0);
    static PhasePtr parse(const std::string& text, int max_order = kDefaultMaxOrder);

    double derivative(int bx, int bxi, double x, double xi) const override;
    GridField sample(int bx, int bxi, const TensorGrid& g) const override;
    int max_order() const override { return a_.max_order(); }
    std::string name() const override { return a_.provenance(); }
    const SgSymbol& symbol() const { return a_; }

private:
    SgSymbol a_;
    double t_;
    double s_;
};

/// phi = x*xi, derivatives exact.
PhasePtr identity_phase();

struct GriddedOptions {
    int max_order = kDefaultMaxOrder;
    int interp_width = 6;
    int fd_width = 7;
};

/// Phase stored as node grids of some derivatives; the rest come from finite differences of those grids.
class GriddedPhase : public PhaseFunction {
public:
    using Key = std::pair<int, int>;

    GriddedPhase(TensorGrid g, std::map<Key, GridField> known, std::string name, GriddedOptions opt = {});

    double derivative(int bx, int bxi, double x, double xi) const override;
    GridField sample(int bx, int bxi, const TensorGrid& g) const override;
    int max_order() const override { return opt_.max_order; }
    std::string name() const override { return name_; }

    const TensorGrid& grid() const { return grid_; }
    const GridField& field(int bx, int bxi) const;
    /// True if the field was supplied rather than differenced.
    bool supplied(int bx, int bxi) const { return supplied_.count({bx, bxi}) > 0; }
    const GriddedOptions& options() const { return opt_; }

private:
    TensorGrid grid_;
    std::map<Key, GridField> fields_;
    std::map<Key, bool> supplied_;
    std::string name_;
    GriddedOptions opt_;
};

/// Same axes up to rounding.
bool same_grid(const TensorGrid& a, const TensorGrid& b);

/// Tabulates any phase onto g (derivatives up to max_order taken from the oracle).
std::shared_ptr<GriddedPhase> tabulate(const PhaseFunction& phi, const TensorGrid& g, int supplied_order = 2,
                                       GriddedOptions opt = {});

struct JSeminorms {
    double j2l = 0.0;       // sum over 2 <= |a+b| <= 2+l of weighted sups
    double jl = 0.0;        // sup over |a+b| <= 1 plus j2l
    double first = 0.0;     // the |a+b| <= 1 sup alone
    double sup_form = 0.0;  // single sup over |a+b| <= 2 (the pointwise bound form)
};

/// Weights: an x-derivative lowers the <x> power, a xi-derivative the <xi> power, base <x><xi>.
JSeminorms j_seminorm(const PhaseFunction& phi, int ell, const TensorGrid& g);

struct BandOptions {
    double annulus = 0.8;  // fraction of the half-widths where the outer annulus starts
    double lo = 0.25;
    double hi = 4.0;
};

struct Certificate {
    double r = 0.0;         // grid inf |phi_x_xi|
    double tau = 0.0;       // ||J||_0
    double tau_sup = 0.0;   // sup form over |a+b| <= 2
    double tau_ell = 0.0;   // ||J||_ell
    int ell = 0;
    double band_lo = 0.0;   // extreme ratios <phi_x>/<xi>, <phi_xi>/<x> on the annulus
    double band_hi = 0.0;
    bool in_P = false;
    std::string cls;        // "P_r(tau,ell)", "P_r(tau)", "P" or "fail"
};

Certificate certify_regular(const PhaseFunction& phi, const TensorGrid& g, int ell, BandOptions band = {});

}  // namespace sgfio
