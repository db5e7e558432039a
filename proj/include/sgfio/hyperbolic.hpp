// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "sgfio/eikonal.hpp"
#include "sgfio/quantize.hpp"

namespace sgfio {

class HyperbolicError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// D_t + Lambda(t, x, D_x) + R(t, x, D_x), Lambda = diag(lambda_j), R an m x m matrix of lower order symbols.
struct HyperbolicSystem {
    std::vector<SgSymbol> lambda;                         // m entries, real, order (eps, 1)
    std::vector<std::vector<std::optional<SgSymbol>>> R;  // m x m, empty entries are zero
    double eps = 1.0;

    std::size_t m() const { return lambda.size(); }
    bool time_invariant() const;
    void validate() const;
};

struct TimeGrid {
    double T0 = 0.1;
    int K = 16;

    double h() const { return T0 / K; }
    double at(int k) const { return T0 * k / K; }
};

/// Weights for int_0^{n h} on n uniform intervals: composite Simpson, the 3/8 rule closing odd counts, trapezoid for n = 1.
std::vector<double> simpson_weights(int n, double h);

struct HyperbolicOptions {
    QuantGrid grid{128, 12.0};
    TimeGrid time;
    int picard_cap = 8;
    double picard_tol = 1e-12;   // stop at the first order whose norm on the test space is below this
    // coarser RK4 step than the eikonal default: phases are only needed at the time grid levels
    EikonalOptions eikonal = [] {
        EikonalOptions o;
        o.h = 1.0 / 320.0;
        return o;
    }();
    int hermite_count = 32;      // test space for operator norms
    int galerkin_count = 40;     // Hermite span carrying the Picard remainder, contains the test space
    int probe_columns = 16;      // random section of the test space used for the L E_N check
    unsigned seed = 1;
};

/// Pairs (t, s) = (theta_a, theta_b); when the system is time invariant everything depends on a - b only.
/// Levels run to K + 4 so that t-differences can be centred up to T0.
class PairIndex {
public:
    PairIndex() = default;
    PairIndex(bool invariant, int K) : invariant_(invariant), K_(K) {}
    bool invariant() const { return invariant_; }
    int K() const { return K_; }
    int top() const { return K_ + 4; }
    std::size_t size() const;
    std::size_t operator()(int a, int b) const;

private:
    bool invariant_ = true;
    int K_ = 16;
};

struct SystemPhases {
    TimeGrid time;
    QuantGrid grid;
    PairIndex index;
    std::size_t m = 0;
    std::vector<std::vector<EikonalPtr>> phi;  // [pair][j]; null on the diagonal, where phi = x xi exactly
    std::vector<std::vector<CMatrix>> I;       // [pair][j]; exact identity on the diagonal
    double max_shoot_residual = 0.0;
    int max_newton = 0;

    const CMatrix& block(int a, int b, std::size_t j) const { return I[index(a, b)][j]; }
};

/// Eikonal phases with a = -lambda_j (so that d_t phi + lambda_j(t, x, phi_x) = 0) and the blocks I_phi_j(t, s).
SystemPhases build_phases(const HyperbolicSystem& sys, const HyperbolicOptions& opt);

/// W_1(t, s) = -i (D_t I_phi + Lambda I_phi + R I_phi), D_t I_phi = Op_phi(d_t phi) taken from the eikonal equation.
CMatrix residual_W1(const HyperbolicSystem& sys, const SystemPhases& ph, int a, int b);

/// (L I_phi)(t, s) with D_t from 5-point differences of I_phi over the time levels: independent of residual_W1.
CMatrix L_Iphi_differenced(const HyperbolicSystem& sys, const SystemPhases& ph, int a, int b);

/// Block-diagonal I_phi(t, s) times a full block matrix.
CMatrix apply_Iphi(const SystemPhases& ph, int a, int b, const CMatrix& X);

struct FundamentalSolution {
    TimeGrid time;
    QuantGrid grid;
    PairIndex index;
    std::size_t m = 0;
    std::vector<CMatrix> E;                // per pair with a, b <= K
    CMatrix basis;                         // block Hermite basis B of the Galerkin space
    std::vector<CMatrix> W1;               // B* W_1 B
    int N = 0;                             // Picard terms kept
    std::vector<double> order_norms;       // ||W_nu(T0, 0)|| on the test space, nu = 1..N (+ one beyond)
    double telescoping_residual = 0.0;     // at (T0, 0), relative to max(||sum W_nu||, 1)
    double telescoping_abs = 0.0;
    std::vector<double> le_norms;          // ||B* L E_nu(T0, 0)|| on the probe section, nu = 1..N
    std::vector<double> le_predicted;      // ||W_{nu+1}(T0, 0)|| on the same section
    std::vector<double> le_mismatch;       // ||L E_nu - i W_{nu+1}|| on the same section

    const CMatrix& at(int a, int b) const { return E[index(a, b)]; }
};

/// E_N = I_phi + int I_phi(t, th) B S_N(th, s) B* dth, with S_N = W_1 + ... + W_N run in the coefficients of B:
/// the remainder lives where the grid resolves it, I_phi itself stays on the full grid.
FundamentalSolution picard_series(const HyperbolicSystem& sys, const SystemPhases& ph, const HyperbolicOptions& opt);

/// Stacked state: component j occupies rows j*N .. j*N + N - 1.
using Forcing = std::function<CVector(double t)>;

struct Trajectory {
    std::vector<double> t;
    std::vector<CVector> W;
};

/// W(theta_k) = E(theta_k, 0) G + i int_0^theta_k E(theta_k, s) F(s) ds.
Trajectory solve_cauchy(const FundamentalSolution& E, const CVector& G, const Forcing& F = {});

struct ReferenceOptions {
    int substeps = 8;   // RK4 steps per time-grid interval
};

/// Method of lines: dW/dt = -i (Lambda + R) W + i F, RK4. The oracle, not the construction under test.
Trajectory reference_solve(const HyperbolicSystem& sys, const QuantGrid& g, const TimeGrid& tg, const CVector& G,
                           const Forcing& F = {}, ReferenceOptions ro = {});

/// Block-diagonal copies of a per-component basis.
CMatrix block_basis(const CMatrix& P, std::size_t m);
/// sqrt(sum_j ||W_j||_{r, rho}^2)
double system_sobolev_norm(const CVector& W, const QuantGrid& g, std::size_t m, double r, double rho);
double relative_l2(const CVector& a, const CVector& b);

struct FactorialFit {
    double C = 0.0;            // geometric mean of nu * (n_{nu+1} / n_nu) / T0
    double spread = 0.0;       // max over nu of max(C_nu / C, C / C_nu)
    double C_max = 0.0;
    double slope = 0.0;        // least-squares slope of log n_nu + log (nu - 1)! against nu
    std::size_t used = 0;      // orders entering the fit
};

/// Orders with n_nu below floor * n_1 are left out (rounding level).
FactorialFit fit_factorial(const std::vector<double>& norms, double T0, double floor = 1e-12);

/// Largest theta_k with every phi_j(theta_k, 0) certified regular with tau < 1/4.
double largest_certified_T0(const SystemPhases& ph);

}  // namespace sgfio
