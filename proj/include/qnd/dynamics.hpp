#pragma once

#include "qnd/dicke.hpp"

#include <optional>
#include <string>

namespace qnd {

enum class Channel { none, local, collective };

std::string to_string(Channel c);
Channel channel_from_string(const std::string& s);

// Rates are in units of the measurement strength (gamma_meas = 1 defines the
// time unit); dt and t_final are in units of its inverse.
struct ModelParams {
  int n_atoms = 0;
  double omega = 0.0;       // precession frequency, the estimated parameter
  double kappa = 0.0;       // local dephasing rate
  double kappa_coll = 0.0;  // collective dephasing rate
  double gamma = 1.0;       // measurement strength
  double eta = 1.0;         // detection efficiency in [0, 1]
  double dt = 1e-4;
  double t_final = 1.0;

  void validate() const;                 // throws std::invalid_argument
  bool unvalidated_combination() const;  // both dephasing channels active
  Channel channel() const;
  // Local dephasing is the only sector-coupling term; without it a CSS stays
  // in the maximal sector and the simulation can drop the rest of the basis.
  bool symmetric_sector_sufficient() const { return kappa == 0.0; }
};

struct SimulationError : std::runtime_error {
  long step = -1;
  explicit SimulationError(const std::string& what, long step_idx)
      : std::runtime_error(what), step(step_idx) {}
};

// X -> sum_k sigma_z^(k) X sigma_z^(k) on folded Dicke blocks.  Couples sector
// j to j-1, j, j+1 at fixed (m, m'); the weights come from contracting the
// single-site Clebsch-Gordan factors over the degeneracy multiplicities:
//   same j:  N (d-_j/j^2 + d+_j/(j+1)^2)/d_j * m m'
//   j -> j+1: N d+_j/d_j * u(m)u(m'),  u(m) = sqrt((j+m+1)(j-m+1))/(j+1)
//   j -> j-1: N d-_j/d_j * v(m)v(m'),  v(m) = sqrt((j+m)(j-m))/j
// with d+-_j the multiplicities of sectors j +- 1/2 for N-1 qubits.  The map
// conserves the physical trace times N because d_j = d-_j + d+_j.
class LocalDephasing {
 public:
  explicit LocalDephasing(std::shared_ptr<const BlockSpec> spec);

  // out = sum_k sigma_z^(k) x sigma_z^(k)
  void apply(const BlockMatrix& x, BlockMatrix& out) const;
  // out += w * (sandwich map)
  void accumulate(const BlockMatrix& x, double w, BlockMatrix& out) const;

  const BlockSpec& spec() const { return *spec_; }

 private:
  std::shared_ptr<const BlockSpec> spec_;
  std::vector<Eigen::VectorXd> w_same_, w_up_, w_down_;
};

// Full local dissipator sum_k D[sigma_z^(k)] x = sandwich(x) - N x.
BlockMatrix local_dephasing_action(const LocalDephasing& map, const BlockMatrix& x);

// D[J_z] x, block-local: element (m, m') is scaled by -(m - m')^2 / 2.
BlockMatrix collective_dephasing_action(const SpinOperators& ops, const BlockMatrix& x);
// J_z x J_z, block-local: element (m, m') scaled by m m'.
void accumulate_jz_sandwich(const SpinOperators& ops, const BlockMatrix& x, double w,
                            BlockMatrix& out);

// Kraus operator of one Euler-Milstein step,
//   M = 1 - i omega J_z dt - (kappa/4) N dt - (gamma/2) J_y^2 dt
//       + sqrt(eta gamma) J_y dy + (eta gamma / 2) J_y^2 (dy^2 - dt),
// with the (kappa/4) N term replaced by (kappa_coll/2) J_z^2 when collective
// dephasing is active (and both present when both rates are set).
BlockDiagonalOperator kraus_operator(const ModelParams& p, const SpinOperators& ops, double dt,
                                     double dy);

struct StepOutput {
  double dy = 0.0;         // photocurrent increment
  double dw = 0.0;         // Wiener increment consumed
  double pre_trace = 0.0;  // tr rho_tilde before renormalization
};

// One step of the coupled (rho, tau) update.  Owns per-thread scratch; the
// referenced operator tables are shared and immutable.
class SmeStepper {
 public:
  SmeStepper(ModelParams params, std::shared_ptr<const SpinOperators> ops,
             std::shared_ptr<const LocalDephasing> deph);

  // In-place update; dw is the caller-sampled Wiener increment (variance dt).
  // The photocurrent uses the pre-step <J_y> (Ito convention).
  StepOutput step(DickeState& rho, DerivativeState& tau, double dw);
  // Average (eta = 0) dynamics; trajectory independent.
  StepOutput step_unconditional(DickeState& rho, DerivativeState& tau);

  void reset_step_count() { step_count_ = 0; }
  long step_count() const { return step_count_; }
  const ModelParams& params() const { return params_; }

 private:
  StepOutput step_impl(DickeState& rho, DerivativeState& tau, double dw, double eta);

  ModelParams params_;
  std::shared_ptr<const SpinOperators> ops_;
  std::shared_ptr<const LocalDephasing> deph_;  // null when kappa == 0
  long step_count_ = 0;

  // scratch, sized once
  struct SectorScratch {
    Eigen::VectorXcd d0;   // main diagonal of M
    Eigen::VectorXcd off1; // band |k|=1 template factors
    Block w, g;            // W = M X, column-scaled copies
  };
  std::vector<SectorScratch> scratch_;
  BlockMatrix rho_new_, tau_new_, feed_;
};

// Pure wrappers matching the operation contracts (copying semantics).
StepOutput sme_step(DickeState& rho, DerivativeState& tau, double dw, const ModelParams& p,
                    const SpinOperators& ops, const LocalDephasing* deph);
DickeState unconditional_step(const DickeState& rho, const ModelParams& p,
                              const SpinOperators& ops, const LocalDephasing* deph);

}  // namespace qnd
