#include "qnd/metrology.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numeric>

namespace qnd {

DerivativeState derivative_of_state(const DickeState& rho, const DerivativeState& tau) {
  rho.check_compatible(tau);
  DerivativeState d(rho.spec);
  const double tr = tau.physical_trace();
  for (std::size_t b = 0; b < rho.blocks.size(); ++b)
    d.blocks[b] = tau.blocks[b] - tr * rho.blocks[b];
  return d;
}

namespace {

double largest_block_eigenvalue(const std::vector<Eigen::VectorXd>& eigs) {
  double m = 0;
  for (const auto& v : eigs)
    if (v.size()) m = std::max(m, v.maxCoeff());
  return m;
}

}  // namespace

double qfi(const DickeState& rho, const DerivativeState& drho, double eps_cut) {
  rho.check_compatible(drho);
  std::vector<Eigen::VectorXd> eigs;
  std::vector<Eigen::MatrixXcd> vecs;
  eigs.reserve(rho.blocks.size());
  for (const auto& b : rho.blocks) {
    Eigen::SelfAdjointEigenSolver<Block> es(b);
    eigs.push_back(es.eigenvalues());
    vecs.push_back(es.eigenvectors());
  }
  const double cut = eps_cut >= 0 ? eps_cut : 1e-10 * largest_block_eigenvalue(eigs);

  double q = 0;
  for (std::size_t b = 0; b < rho.blocks.size(); ++b) {
    const auto& lam = eigs[b];
    const int n = static_cast<int>(lam.size());
    Block g = vecs[b].adjoint() * drho.blocks[b] * vecs[b];
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        const double s = lam(i) + lam(k);
        if (s > cut) q += 2.0 * std::norm(g(i, k)) / s;
      }
  }
  return q;
}

double classical_fi_photocurrent(const std::vector<double>& tr_tau_samples) {
  if (tr_tau_samples.empty())
    throw std::invalid_argument("classical_fi_photocurrent: no samples");
  double s = 0;
  for (double x : tr_tau_samples) s += x * x;
  return s / static_cast<double>(tr_tau_samples.size());
}

double effective_qfi(double f_yt, const std::vector<double>& qfi_samples) {
  if (qfi_samples.empty()) throw std::invalid_argument("effective_qfi: no QFI samples");
  if (f_yt < 0) throw std::invalid_argument("effective_qfi: F must be nonnegative");
  double m = std::accumulate(qfi_samples.begin(), qfi_samples.end(), 0.0) /
             static_cast<double>(qfi_samples.size());
  return f_yt + m;
}

double fi_projective_jy(const SpinOperators& ops, const DickeState& rho,
                        const DerivativeState& drho, double eps_cut) {
  rho.check_compatible(drho);
  // Outcomes m = -N/2 .. N/2; each sector contributes its own m range.  With a
  // row per global outcome, p and the derivative signal accumulate over
  // sectors (the per-sector J_y eigenvalues are exact half-integers, so
  // grouping is by index alignment).
  const int n_atoms = rho.spec->n_atoms;
  const int n_out = n_atoms + 1;
  Eigen::VectorXd p = Eigen::VectorXd::Zero(n_out);
  Eigen::VectorXd dp = Eigen::VectorXd::Zero(n_out);
  double max_eig = 0;
  for (std::size_t b = 0; b < rho.blocks.size(); ++b) {
    const auto& v = ops.sec[b].jy_vecs;
    const int dim = static_cast<int>(v.rows());
    const int offset = (n_atoms - (dim - 1)) / 2;  // outcome index of m = -j
    Block rp = v.adjoint() * rho.blocks[b] * v;
    Block dpb = v.adjoint() * drho.blocks[b] * v;
    for (int k = 0; k < dim; ++k) {
      p(offset + k) += rp(k, k).real();
      dp(offset + k) += dpb(k, k).real();
      max_eig = std::max(max_eig, rp(k, k).real());
    }
  }
  const double cut = eps_cut >= 0 ? eps_cut : 1e-10 * max_eig;
  double f = 0;
  for (int k = 0; k < n_out; ++k)
    if (p(k) > cut) f += dp(k) * dp(k) / p(k);
  return f;
}

double spin_squeezing_witness(int n_atoms, const Expectations& e) {
  const double var = e.var_jy();
  if (var <= 0) throw std::runtime_error("spin_squeezing_witness: nonpositive Var J_y");
  return (e.jz * e.jz + e.jx * e.jx) / (n_atoms * var);
}

double spin_squeezing_witness(const SpinOperators& ops, const DickeState& rho) {
  return spin_squeezing_witness(rho.spec->n_atoms, collective_expectations(ops, rho));
}

double css_qfi_analytic(int n_atoms, double kappa, double t) {
  if (t < 0) throw std::invalid_argument("css_qfi_analytic: t must be nonnegative");
  return n_atoms * t * t * std::exp(-2.0 * kappa * t);
}

RateOptimum css_qfi_optimum(int n_atoms, double kappa) {
  if (kappa <= 0) throw std::invalid_argument("css_qfi_optimum: kappa must be positive");
  return {0.5 / kappa, n_atoms / (2.0 * std::exp(1.0) * kappa)};
}

double entanglement_bound(int n_atoms, double kappa) {
  if (kappa <= 0) throw std::invalid_argument("entanglement_bound: kappa must be positive");
  return n_atoms / (2.0 * kappa);
}

double crb_uncertainty(double rate_max, double total_time) {
  if (rate_max <= 0 || total_time <= 0)
    throw std::invalid_argument("crb_uncertainty: inputs must be positive");
  return 1.0 / std::sqrt(total_time * rate_max);
}

std::vector<double> husimi_q(const DickeState& rho, const std::vector<SphericalPoint>& grid) {
  const int n_atoms = rho.spec->n_atoms;
  std::size_t top = rho.blocks.size();
  for (std::size_t b = 0; b < rho.blocks.size(); ++b)
    if (rho.spec->sectors[b].twice_j == n_atoms) top = b;
  if (top == rho.blocks.size())
    throw std::invalid_argument("husimi_q: state lacks the maximal sector");
  std::vector<double> out;
  out.reserve(grid.size());
  for (const auto& pt : grid) {
    Eigen::VectorXcd v = css_amplitudes(n_atoms, pt.theta, pt.phi);
    out.push_back((v.adjoint() * rho.blocks[top] * v)(0, 0).real());
  }
  return out;
}

MeritRow evaluate_merits(const SpinOperators& ops, const DickeState& rho,
                         const DerivativeState& tau) {
  MeritRow r;
  r.tr_tau = tau.physical_trace();
  DerivativeState drho = derivative_of_state(rho, tau);
  r.qfi_cond = qfi(rho, drho);
  r.fi_jy = fi_projective_jy(ops, rho, drho);
  Expectations e = collective_expectations(ops, rho);
  r.jx = e.jx;
  r.jy = e.jy;
  r.jz = e.jz;
  r.var_jy = e.var_jy();
  r.zeta_y = spin_squeezing_witness(rho.spec->n_atoms, e);
  return r;
}

}  // namespace qnd
