#pragma once

#include "qnd/dynamics.hpp"
#include "qnd/metrology.hpp"

namespace qnd {
namespace oracle {

// Brute-force reference in the unreduced 2^N Hilbert space, used to validate
// the Dicke-basis implementation.  Dense Eigen products throughout; it shares
// no linear-algebra path with the banded kernels, so agreement is evidence.

constexpr int kMaxAtoms = 6;

struct FullOperators {
  int n_atoms = 0;
  int dim = 0;
  Eigen::VectorXd jz;                  // diagonal
  Eigen::MatrixXcd jx, jy, jy2;
  Eigen::MatrixXd dephasing_factor;    // T(a,b) = sum_k z_k(a) z_k(b)
  explicit FullOperators(int n_atoms);
};

struct FullState {
  Eigen::MatrixXcd rho;
  Eigen::MatrixXcd tau;
};

FullState full_initial_css(int n_atoms);

// Identical contract to the Dicke-basis step: same Kraus operator, same dy
// convention, same Milstein correction, same renormalization.
StepOutput full_sme_step(FullState& st, double dw, const ModelParams& p,
                         const FullOperators& ops);

double full_qfi(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& drho,
                double eps_cut = -1.0);

struct FullMerits {
  double jx, jy, jz, jx2, jy2, jz2, purity, zeta_y, qfi;
};
FullMerits full_merits(const FullState& st, const FullOperators& ops);

// Observables evaluated on both representations; returns the largest absolute
// difference over {J_x, J_y, J_z, J_x^2, J_y^2, J_z^2, purity, zeta_y, QFI}.
double compare_to_dicke(const FullState& full, const FullOperators& fops,
                        const DickeState& rho, const DerivativeState& tau,
                        const SpinOperators& dops);

// Orthonormal |j, m; path> basis of the full space, built by recursive
// angular-momentum coupling.  vectors[sector][i] has d_j * (2j+1) columns
// grouped as [path i, m ascending].  Test support for elementwise checks.
struct DickeBasis {
  std::shared_ptr<const BlockSpec> spec;
  // basis[sector](:, i * dim + r) = |j, m_r; path_i>
  std::vector<Eigen::MatrixXcd> basis;
  explicit DickeBasis(int n_atoms);

  Eigen::MatrixXcd embed(const BlockMatrix& x) const;   // folded blocks -> full
  BlockMatrix extract(const Eigen::MatrixXcd& x) const; // full -> folded blocks
};

}  // namespace oracle
}  // namespace qnd
