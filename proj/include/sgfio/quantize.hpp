// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sgfio/grid.hpp"
#include "sgfio/phase.hpp"
#include "sgfio/symbols.hpp"

namespace sgfio {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

class QuantError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Periodic x-grid x_i = -L + i dx (dx = 2L/N) and the matching frequency grid xi_j = (j - N/2) dxi, dxi = pi/L,
/// so that dx * dxi * N = 2 pi.
struct QuantGrid {
    std::size_t N = 256;
    double L = 12.0;

    QuantGrid() = default;
    QuantGrid(std::size_t n, double l);

    double dx() const { return 2.0 * L / static_cast<double>(N); }
    double dxi() const { return M_PI / L; }
    double x(std::size_t i) const { return -L + static_cast<double>(i) * dx(); }
    double xi(std::size_t j) const { return (static_cast<double>(j) - static_cast<double>(N / 2)) * dxi(); }
    Axis x_axis() const { return {-L, dx(), N}; }
    Axis xi_axis() const { return {xi(0), dxi(), N}; }
    TensorGrid tensor() const { return {x_axis(), xi_axis()}; }
    std::vector<double> xs() const;
};

struct GridFunction {
    QuantGrid grid;
    CVector v;

    GridFunction() = default;
    GridFunction(QuantGrid g, CVector values);
    /// Samples f at the x-nodes.
    template <class F>
    static GridFunction sample(const QuantGrid& g, F&& f)
    {
        CVector v(g.N);
        for (std::size_t i = 0; i < g.N; ++i) v[i] = f(g.x(i));
        return {g, std::move(v)};
    }
    /// sqrt(dx sum |u_i|^2)
    double l2() const;
};

enum class OpKind { type1, type2, pseudo, product };
std::string to_string(OpKind k);

struct OperatorMatrix {
    CMatrix m;
    OpKind kind = OpKind::product;

    GridFunction apply(const GridFunction& u) const;
    OperatorMatrix adjoint() const;
    OperatorMatrix operator*(const OperatorMatrix& o) const { return {m * o.m, OpKind::product}; }
};

/// u-hat(xi_j) = sum_i exp(-i x_i xi_j) u_i dx, via FFT.
CVector fourier(const GridFunction& u);
/// u_i = (2 pi)^-1 sum_j exp(i x_i xi_j) uh_j dxi, via FFT.
GridFunction inverse_fourier(const CVector& uh, const QuantGrid& g);
/// Direct O(N K) quadrature of the forward transform at arbitrary frequencies.
CVector fourier_direct(const GridFunction& u, const std::vector<double>& xis);

/// Boundary-to-peak ratios used for the band-limitation precondition.
struct Truncation {
    double x_edge = 0.0;   // max |u| over the outer two x-nodes / max |u|
    double xi_edge = 0.0;  // same for u-hat
    bool ok(double tol = 1e-10) const { return x_edge <= tol && xi_edge <= tol; }
};
Truncation truncation(const GridFunction& u);

struct Applied {
    GridFunction u;
    Truncation input;
    bool warning = false;  // input not effectively band-limited; result carries truncation error of that size
};

Applied apply_type1(const SgSymbol& a, const PhaseFunction& phi, const GridFunction& u, SymbolTime time = {});
Applied apply_type2(const SgSymbol& b, const PhaseFunction& phi, const GridFunction& u, SymbolTime time = {});

/// Amplitude and phase sampled on g.tensor(): row i is x_i, column j is xi_j.
OperatorMatrix type1_matrix(const CMatrix& amplitude, const GridField& phase, const QuantGrid& g);
OperatorMatrix op_matrix(OpKind kind, const SgSymbol& a, const PhaseFunction& phi, const QuantGrid& g,
                         SymbolTime time = {});
/// Op(a): left quantization, phase x xi.
OperatorMatrix pseudo_matrix(const SgSymbol& a, const QuantGrid& g, SymbolTime time = {});
/// I_phi = Op_phi(1).
OperatorMatrix iphi_matrix(const PhaseFunction& phi, const QuantGrid& g);
CMatrix sample_symbol(const SgSymbol& a, const QuantGrid& g, SymbolTime time = {});

/// ||<x>^r <D>^rho u||_{L^2}
double sobolev_norm(const GridFunction& u, double r, double rho);

/// Gaussian-windowed plane waves exp(-(x-c)^2/(2 sigma^2) + i k x), orthonormalised.
struct SubspaceOptions {
    double sigma = 1.0;
    double center_step = 1.0;
    double center_margin = 7.0;  // centres keep this many sigmas away from +-L
    double freq_step = 1.0;
    double freq_max = 8.0;
    double rank_tol = 1e-10;     // relative singular value cut
    double inset = 0.0;          // test subspace drops this many centre and frequency steps at each end
    double solve_frac = 0.75;    // solve space: grid plane waves with |xi_j| <= solve_frac * N/2 * dxi
};

/// Orthonormal (in the plain l2 inner product) basis of the band-limited test subspace.
CMatrix band_basis(const QuantGrid& g, const SubspaceOptions& opt = {});
/// Solve space (plane waves below a frequency cut, invariant under Fourier multipliers) for compressed inverses, and
/// the Gabor test space, taken inside it, on which residuals are measured.
struct BandSpace {
    CMatrix solve;
    CMatrix test;
};
BandSpace band_space(const QuantGrid& g, const SubspaceOptions& opt = {});

/// First `count` Hermite functions on the grid, orthonormal in plain l2. Localised in |x|, |xi| <= sqrt(2 count - 1)
/// with no near-dependent directions, so they stay meaningful for operators that do not commute with periodisation.
CMatrix hermite_basis(const QuantGrid& g, int count);

/// Largest singular value of X P, P with orthonormal columns.
double subspace_norm(const CMatrix& X, const CMatrix& P);

struct Inverse {
    OperatorMatrix Qstar;
    double residual = 0.0;       // ||(I_phi Q* - I) P_test||
    double left_residual = 0.0;  // ||(Q* I_phi - I) P_test||
    double a0_norm = 0.0;        // ||P* A_0 P|| on the solve space; below 1 the Neumann series converges
};

/// Q* = I*_phi P (I + P* A_0 P)^-1 P*, A_0 = I_phi I*_phi - I, P the solve basis.
Inverse invert_Iphi(const PhaseFunction& phi, const QuantGrid& g, const BandSpace& B);
Inverse invert_Iphi(const OperatorMatrix& I, const BandSpace& B);

/// Raised cosine: 1 on |x| <= (1 - frac) L, falling to 0 at |x| = L.
double taper(double x, double L, double frac = 0.25);

struct ProbeOptions {
    double x_frac = 0.5;        // probe |x| <= x_frac L
    double xi_frac = 0.5;       // probe |xi| <= xi_frac * N/2 * dxi
    double taper_frac = 0.25;
    double tau_max = 0.05;      // small-tau working threshold
};

/// Symbol of an operator against a phase, read off by plane-wave probing on a sub-grid of g.tensor().
struct ProbedSymbol {
    TensorGrid grid;            // probed nodes (sub-grid of g.tensor())
    std::size_t i0 = 0, j0 = 0; // offset of the probe grid in g
    CMatrix p;                  // p(x_i, xi_j)
    double sup_abs = 0.0;
    double sup_dev_one = 0.0;   // sup |p - 1|
    double dq_x = 0.0;          // sup <x> |Delta_x p| / dx
    double dq_xi = 0.0;         // sup <xi> |Delta_xi p| / dxi
};

TensorGrid probe_grid(const QuantGrid& g, const ProbeOptions& opt, std::size_t* i0 = nullptr,
                      std::size_t* j0 = nullptr);
/// p(x_i, xi_j) = exp(-i phi(x_i, xi_j)) (A w_j)(x_i), w_j = taper(x) exp(i x xi_j).
ProbedSymbol probe_symbol(const OperatorMatrix& A, const PhaseFunction& phi, const QuantGrid& g,
                          const ProbeOptions& opt = {});

struct Composition {
    std::shared_ptr<GriddedPhase> phi;  // phi_1 # phi_2 on the probe grid
    OperatorMatrix P;                   // I_phi1 I_phi2
    ProbedSymbol p;
    double tau1 = 0.0;
    double tau2 = 0.0;
};

/// I_phi1 I_phi2 = Op_{phi1 # phi2}(p). phi1, phi2 must cover g.tensor() and the padding of the probe grid.
Composition compose_extract_symbol(const PhasePtr& phi1, const PhasePtr& phi2, const QuantGrid& g,
                                   const ProbeOptions& opt = {});

struct ChainFactor {
    SgSymbol a;
    PhasePtr phi;
    double m = 0.0;
    double mu = 0.0;
};

struct ChainComposition {
    OperatorMatrix A;                       // A_1 ... A_M
    std::vector<std::shared_ptr<GriddedPhase>> Phi;  // Phi_1 .. Phi_M on g.tensor() (Phi_1 sampled from phi_1)
    double factorization_residual = 0.0;    // ||(A - R_1...R_M I_Phi_M) P|| / ||A P||, P the test basis
    double max_inverse_residual = 0.0;
    ProbedSymbol a;                         // symbol of A against Phi_M
    double symbol_seminorm = 0.0;           // sup |a| <x>^-m <xi>^-mu over the probe grid
    double factor_seminorm_product = 0.0;   // prod ||a_j||_0
    double C = 0.0;                         // symbol_seminorm / factor_seminorm_product
    double tau0 = 0.0;
};

ChainComposition compose_chain(const std::vector<ChainFactor>& ops, const QuantGrid& g, const BandSpace& B,
                               const ProbeOptions& opt = {});

struct ExpansionCheck {
    std::vector<double> lambdas;
    std::vector<double> ratios;  // ||D u_l|| / ||u_l||
    double slope = 0.0;          // least-squares slope of log ratio against log lambda
};

/// D = Op(p) Op_phi(a) - Op_phi(p(x, phi_x) a) on u(x) exp(i lambda x).
ExpansionCheck first_order_expansion_check(const SgSymbol& p, const SgSymbol& a, const PhaseFunction& phi,
                                           const QuantGrid& g, const GridFunction& u,
                                           const std::vector<double>& lambdas = {4, 8, 16});

}  // namespace sgfio
