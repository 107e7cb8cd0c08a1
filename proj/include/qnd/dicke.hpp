#pragma once

#include <Eigen/Dense>
#include <complex>
#include <memory>
#include <stdexcept>
#include <vector>

// Permutationally invariant representation of an N-qubit state.  The density
// operator is block diagonal over total-spin sectors j = N/2, N/2-1, ..., with
// one dense complex block per sector.  Degeneracy factors are folded into the
// stored blocks, so the physical trace is the plain sum of block traces and
// collective-operator expectations are plain sums of block traces as well.

namespace qnd {

using Complex = std::complex<double>;
using Block = Eigen::MatrixXcd;

struct Sector {
  int twice_j = 0;          // 2j, kept integral to avoid float sector keys
  int dim = 0;              // 2j + 1
  double degeneracy = 0.0;  // exact integer value; stored as double since the
                            // counts exceed 64-bit range for N > ~66
  double j() const { return 0.5 * twice_j; }
  double m_of(int row) const { return -0.5 * twice_j + row; }  // rows ascend in m
};

struct BlockSpec {
  int n_atoms = 0;
  std::vector<Sector> sectors;  // ordered by j descending

  static std::shared_ptr<const BlockSpec> full(int n_atoms);
  // Restriction to the maximal sector j = N/2.  Valid whenever the dynamics
  // never couples sectors (no local dephasing) and the initial state is a CSS.
  static std::shared_ptr<const BlockSpec> symmetric_only(int n_atoms);

  std::size_t total_elements() const;
  bool same_as(const BlockSpec& o) const;
};

// Sector multiplicities d_j for n qubits, indexed by twice_j (entries with the
// wrong parity are zero).  d_j = C(n, n/2 - j) - C(n, n/2 - j - 1), evaluated
// by the Pascal-type recursion d^{(n)}_j = d^{(n-1)}_{j-1/2} + d^{(n-1)}_{j+1/2}.
std::vector<double> multiplicity_row(int n);

struct BlockMatrix {
  std::shared_ptr<const BlockSpec> spec;
  std::vector<Block> blocks;

  BlockMatrix() = default;
  explicit BlockMatrix(std::shared_ptr<const BlockSpec> s);

  void set_zero();
  double physical_trace() const;  // sum of block traces (real part)
  double purity() const;          // sum_j tr(B_j^2)/d_j
  void hermitize();               // X <- (X + X^dag)/2 per block
  bool all_finite() const;
  double max_abs() const;
  void scale(double f);

  void check_compatible(const BlockMatrix& o) const;
};

// Same storage, different contracts: a DickeState is normalized and positive,
// a DerivativeState is Hermitian but unnormalized and generally indefinite.
using DickeState = BlockMatrix;
using DerivativeState = BlockMatrix;

struct BlockDiagonalOperator {
  std::shared_ptr<const BlockSpec> spec;
  std::vector<Block> blocks;
  bool hermitian = false;
};

enum class Axis { x, y, z, plus, minus };

std::shared_ptr<const BlockSpec> block_structure(int n_atoms);
BlockDiagonalOperator collective_operator(int n_atoms, Axis axis);
BlockDiagonalOperator collective_operator(std::shared_ptr<const BlockSpec> spec, Axis axis);

// CSS |theta, phi>: a pure state in the maximal sector with amplitudes
// binom(2J, J+m)^{1/2} sin(theta/2)^{J+m} cos(theta/2)^{J-m} e^{-i(J+m)phi}.
DickeState coherent_spin_state(int n_atoms, double theta, double phi);
DickeState coherent_spin_state(std::shared_ptr<const BlockSpec> spec, double theta, double phi);
Eigen::VectorXcd css_amplitudes(int n_atoms, double theta, double phi);

Complex expectation(const BlockMatrix& state, const BlockDiagonalOperator& op);

// Precomputed per-sector operator data shared by the integrator and the
// figures of merit.  Immutable after construction; safe to share across
// threads.
struct SpinOperators {
  std::shared_ptr<const BlockSpec> spec;

  struct SectorOps {
    Eigen::VectorXd m;         // diagonal of J_z
    Eigen::VectorXd m_sq;      // diagonal of J_z^2
    Eigen::VectorXd ladder;    // A_r = sqrt(j(j+1) - m_r(m_r+1)), size dim-1
    Eigen::VectorXd jy2_d0;    // main diagonal of J_y^2
    Eigen::VectorXd jy2_d2;    // second off-diagonal of J_y^2 (real), size dim-2
    Eigen::VectorXcd jy2_d2c;  // same, complex for band kernels
    Eigen::VectorXcd jy_up;    // J_y(r, r+1) = i A_r / 2
    Eigen::MatrixXcd jy_vecs;  // eigenvectors of J_y, column k <-> eigenvalue m_k
  };
  std::vector<SectorOps> sec;

  explicit SpinOperators(std::shared_ptr<const BlockSpec> s);

  double exp_jx(const BlockMatrix& x) const;
  double exp_jy(const BlockMatrix& x) const;
  double exp_jz(const BlockMatrix& x) const;
  double exp_jy2(const BlockMatrix& x) const;
};

struct Expectations {
  double jx, jy, jz, jy2;
  double var_jy() const { return jy2 - jy * jy; }
};
Expectations collective_expectations(const SpinOperators& ops, const BlockMatrix& x);

// Validation helpers used by tests and by the CLI when loading states.
void check_density_invariants(const DickeState& rho, double trace_tol = 1e-10,
                              double herm_tol = 1e-12, double eig_floor = -1e-9);

}  // namespace qnd
