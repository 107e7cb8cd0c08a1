#pragma once

#include "qnd/dicke.hpp"

#include <vector>

namespace qnd {

// d rho / d omega = tau - rho tr(tau); traceless by construction.
DerivativeState derivative_of_state(const DickeState& rho, const DerivativeState& tau);

// Quantum Fisher information 2 sum_{l_i + l_j > cut} |<i|drho|j>|^2 / (l_i + l_j),
// evaluated block by block; with folded degeneracy the total is the plain sum
// of per-block values.  eps_cut < 0 selects the default 1e-10 * (largest block
// eigenvalue).
double qfi(const DickeState& rho, const DerivativeState& drho, double eps_cut = -1.0);

// Classical FI of the photocurrent record, F = E[(tr tau)^2] over trajectories.
double classical_fi_photocurrent(const std::vector<double>& tr_tau_samples);

// F_yt + mean conditional QFI.
double effective_qfi(double f_yt, const std::vector<double>& qfi_samples);

// Classical FI of a projective J_y measurement: outcomes are the half-integer
// eigenvalues grouped across sectors.
double fi_projective_jy(const SpinOperators& ops, const DickeState& rho,
                        const DerivativeState& drho, double eps_cut = -1.0);

// zeta_y = (<J_z>^2 + <J_x>^2) / (N Var J_y); squeezed along y iff > 1.
double spin_squeezing_witness(const SpinOperators& ops, const DickeState& rho);
double spin_squeezing_witness(int n_atoms, const Expectations& e);

// Unmonitored CSS baseline under local dephasing: Q(t) = N t^2 e^{-2 kappa t},
// whose optimized rate max_t[Q/t] = N/(2 e kappa) is reached at t = 1/(2 kappa).
double css_qfi_analytic(int n_atoms, double kappa, double t);
struct RateOptimum {
  double t_star;
  double rate_star;
};
RateOptimum css_qfi_optimum(int n_atoms, double kappa);

// Bound on any entanglement-enhanced strategy under local dephasing, N/(2 kappa).
double entanglement_bound(int n_atoms, double kappa);

// delta omega = 1 / sqrt(T * max_t[Q/t]).
double crb_uncertainty(double rate_max, double total_time);

// Husimi Q(theta, phi) = <theta,phi| rho |theta,phi> against the maximal
// sector (where the CSS of the sampling kernel lives).
struct SphericalPoint {
  double theta;
  double phi;
};
std::vector<double> husimi_q(const DickeState& rho, const std::vector<SphericalPoint>& grid);

// Figures of merit recorded along a trajectory.
struct MeritRow {
  double tr_tau = 0;
  double qfi_cond = 0;
  double fi_jy = 0;
  double zeta_y = 0;
  double jx = 0, jy = 0, jz = 0;
  double var_jy = 0;
};
constexpr int kMeritFields = 8;

struct MeritSeries {
  std::vector<double> times;
  std::vector<MeritRow> rows;
};

MeritRow evaluate_merits(const SpinOperators& ops, const DickeState& rho,
                         const DerivativeState& tau);

}  // namespace qnd
