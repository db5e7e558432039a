// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "sgfio/phase.hpp"

namespace sgfio {

class ChainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// phi_1, ..., phi_{M+1} with their tau_j; tau_0 = sum tau_j must stay below 1/4.
class PhaseChain {
public:
    PhaseChain(std::vector<PhasePtr> phases, std::vector<double> taus);
    /// Takes every tau_j from certify_regular on g.
    static PhaseChain certified(std::vector<PhasePtr> phases, const TensorGrid& g);

    std::size_t M() const { return phases_.size() - 1; }
    const PhaseFunction& phase(std::size_t j) const { return *phases_.at(j - 1); }  // 1-based
    const PhasePtr& phase_ptr(std::size_t j) const { return phases_.at(j - 1); }
    double tau(std::size_t j) const { return taus_.at(j - 1); }  // 1-based
    double tau0() const { return tau0_; }
    /// tau_1 + ... + tau_k
    double tau_bar(std::size_t k) const;
    const std::vector<PhasePtr>& phases() const { return phases_; }
    const std::vector<double>& taus() const { return taus_; }

private:
    std::vector<PhasePtr> phases_;
    std::vector<double> taus_;
    double tau0_ = 0.0;
};

/// Solution of the critical point system at one (x, xi); vectors are 1-based with a dummy slot 0.
struct CriticalPoint {
    double x = 0.0;
    double xi = 0.0;
    std::vector<double> y, eta;   // y_k, eta_k, k = 1..M
    std::vector<double> z, zeta;  // z^0..z^M, zeta^1..zeta^{M+1}
    std::vector<double> Y, N;     // Y_0 = x, Y_1..Y_M; N_1..N_M, N_{M+1} = xi
    int iterations = 0;
    double residual = 0.0;        // Sigma-norm of T(v) - v at the returned v
    double max_ratio = 0.0;       // largest ratio of successive update norms
    std::vector<double> updates;  // Sigma-norm of each update
};

struct CriticalOptions {
    double tol = 1e-12;
    int max_iter = 200;
    /// ratios are only recorded while the previous update exceeds this (below it rounding dominates)
    double ratio_floor = 1e-11;
};

/// Fixed point of T from zero, or from `start` (y_1..y_M, eta_1..eta_M) when given.
CriticalPoint solve_critical(const PhaseChain& chain, double x, double xi, const CriticalOptions& opt = {},
                             const std::vector<double>* start = nullptr);

/// Sigma-norm of (y, eta) at (x, xi).
double sigma_norm(const std::vector<double>& y, const std::vector<double>& eta, double x, double xi);

/// psi at the critical point.
double multiproduct_value(const PhaseChain& chain, const CriticalPoint& cp);

struct MultiproductStats {
    int max_iterations = 0;
    double max_residual = 0.0;
    double max_ratio = 0.0;
    std::size_t nodes = 0;
    std::size_t bound_violations = 0;  // nodes breaking the y/eta or z/zeta bounds
    double worst_y_ratio = 0.0;        // max |y_k| / (4/3 tau_k <x>)
    double worst_eta_ratio = 0.0;      // max |eta_k| / (4/3 tau_{k+1} <xi>)
    double worst_z_ratio = 0.0;        // max |z^j| / (<x>/3)
    double worst_zeta_ratio = 0.0;     // max |zeta^j| / (<xi>/3)
};

struct Multiproduct {
    std::shared_ptr<GriddedPhase> phase;
    std::vector<GridField> Y;  // Y_1..Y_M at the nodes (index 0 holds Y_1)
    std::vector<GridField> N;  // N_1..N_M
    MultiproductStats stats;
};

Multiproduct multiproduct(const PhaseChain& chain, const TensorGrid& g, const CriticalOptions& opt = {},
                          GriddedOptions gopt = {});

/// Extra nodes needed on each side so that every critical point of a chain with tau_0 stays on the grid.
TensorGrid padded_for_chain(const TensorGrid& target, double tau0, int interp_width = 6);

struct StructureReport {
    double dphi_x = 0.0;             // sup |phi_x - phi_1,x(x, N_1)|, phi_x from differences of the phi grid
    double dphi_xi = 0.0;            // sup |phi_xi - phi_{M+1},xi(Y_M, xi)|
    bool has_associativity = false;
    double assoc_left = 0.0;         // sup |(phi_1 # phi_2) # phi_3 - phi| (M = 2 only)
    double assoc_right = 0.0;        // sup |phi_1 # (phi_2 # phi_3) - phi|
    double assoc = 0.0;              // sup |left - right|
    double c_Y = 0.0;                // fitted constants for the |a+b| <= 1 estimates
    double c_N = 0.0;
    Certificate certificate;
    double k = 0.0;                  // tau(phi) / tau_bar_{M+1}
};

struct StructureOptions {
    int fd_width = 9;
    int edge = 4;                    // nodes skipped at each edge for difference-based checks
    /// grid for intermediate products in the associativity check; must be covered by the chain's phases
    std::optional<TensorGrid> inner_grid;
};

StructureReport verify_structure(const PhaseChain& chain, const Multiproduct& product, const TensorGrid& g,
                                 const StructureOptions& opt = {});

struct DetCheck {
    bool ok = false;
    double det = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double norm = 0.0;  // max column sum
};

/// Checks (1 - c0)^l <= det(I - A) <= (1 + c0)^l; throws if the column-sum norm of A exceeds c0 or c0 >= 1.
DetCheck det_bound_check(const Eigen::MatrixXd& A, double c0);

}  // namespace sgfio
