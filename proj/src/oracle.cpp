#include "qnd/oracle.hpp"

#include <Eigen/Eigenvalues>
#include <bit>
#include <cmath>
#include <map>

namespace qnd {
namespace oracle {

namespace {
int check_n(int n_atoms) {
  if (n_atoms < 1 || n_atoms > kMaxAtoms)
    throw std::invalid_argument("oracle supports 1 <= N <= " + std::to_string(kMaxAtoms));
  return n_atoms;
}
}  // namespace

FullOperators::FullOperators(int n) : n_atoms(check_n(n)), dim(1 << n) {
  const Complex i(0, 1);
  jz = Eigen::VectorXd::Zero(dim);
  jx = Eigen::MatrixXcd::Zero(dim, dim);
  jy = Eigen::MatrixXcd::Zero(dim, dim);
  dephasing_factor = Eigen::MatrixXd::Zero(dim, dim);
  for (int a = 0; a < dim; ++a) {
    jz(a) = 0.5 * (n_atoms - 2 * std::popcount(static_cast<unsigned>(a)));
    for (int k = 0; k < n_atoms; ++k) {
      const int b = a ^ (1 << k);
      jx(b, a) += 0.5;
      jy(b, a) += (a & (1 << k)) ? -0.5 * i : 0.5 * i;  // sigma_y |1> = -i|0>, |0> = i|1>
    }
    for (int b = 0; b < dim; ++b) {
      double t = 0;
      for (int k = 0; k < n_atoms; ++k) {
        const double za = (a & (1 << k)) ? -1.0 : 1.0;
        const double zb = (b & (1 << k)) ? -1.0 : 1.0;
        t += za * zb;
      }
      dephasing_factor(a, b) = t;
    }
  }
  jy2 = jy * jy;
}

FullState full_initial_css(int n_atoms) {
  check_n(n_atoms);
  const int dim = 1 << n_atoms;
  Eigen::VectorXcd v = Eigen::VectorXcd::Constant(dim, std::pow(2.0, -0.5 * n_atoms));
  FullState st;
  st.rho = v * v.adjoint();
  st.tau = Eigen::MatrixXcd::Zero(dim, dim);
  return st;
}

StepOutput full_sme_step(FullState& st, double dw, const ModelParams& p,
                         const FullOperators& ops) {
  const double dt = p.dt;
  const Complex i(0, 1);
  const double jy_mean = (st.rho * ops.jy).trace().real();
  const double dy = 2.0 * std::sqrt(p.eta * p.gamma) * jy_mean * dt + dw;
  const double beta = -0.5 * p.gamma * dt + 0.5 * p.eta * p.gamma * (dy * dy - dt);

  Eigen::MatrixXcd m = std::sqrt(p.eta * p.gamma) * dy * ops.jy + beta * ops.jy2;
  m.diagonal().array() += 1.0 - 0.25 * p.kappa * p.n_atoms * dt;
  m.diagonal() -= (i * p.omega * dt) * ops.jz.cast<Complex>();
  if (p.kappa_coll > 0)
    m.diagonal() -= (0.5 * p.kappa_coll * dt) * ops.jz.array().square().matrix().cast<Complex>();

  const Eigen::MatrixXcd mdag = m.adjoint();
  const Eigen::VectorXcd dm = (-i * dt) * ops.jz.cast<Complex>();  // diagonal of dM
  const double feed = (1.0 - p.eta) * p.gamma * dt;

  Eigen::MatrixXcd rho_t = m * st.rho * mdag;
  Eigen::MatrixXcd tau_t = dm.asDiagonal() * (st.rho * mdag) + m * st.tau * mdag +
                           (m * st.rho) * dm.conjugate().asDiagonal();
  if (feed != 0.0) {
    rho_t += feed * (ops.jy * st.rho * ops.jy);
    tau_t += feed * (ops.jy * st.tau * ops.jy);
  }
  if (p.kappa > 0) {
    Eigen::MatrixXcd t = ops.dephasing_factor.cast<Complex>();
    rho_t += (0.5 * p.kappa * dt) * t.cwiseProduct(st.rho);
    tau_t += (0.5 * p.kappa * dt) * t.cwiseProduct(st.tau);
  }
  if (p.kappa_coll > 0) {
    Eigen::MatrixXcd zz = (ops.jz * ops.jz.transpose()).cast<Complex>();
    rho_t += (p.kappa_coll * dt) * zz.cwiseProduct(st.rho);
    tau_t += (p.kappa_coll * dt) * zz.cwiseProduct(st.tau);
  }

  const double tr = rho_t.trace().real();
  if (!std::isfinite(tr)) throw SimulationError("oracle: non-finite state", -1);
  if (tr <= 0) throw SimulationError("oracle: nonpositive trace; reduce dt", -1);
  st.rho = (0.5 / tr) * (rho_t + rho_t.adjoint());
  st.tau = (0.5 / tr) * (tau_t + tau_t.adjoint());
  return {dy, dw, tr};
}

double full_qfi(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& drho, double eps_cut) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
  const auto& lam = es.eigenvalues();
  const double cut = eps_cut >= 0 ? eps_cut : 1e-10 * lam.maxCoeff();
  Eigen::MatrixXcd g = es.eigenvectors().adjoint() * drho * es.eigenvectors();
  double q = 0;
  for (int a = 0; a < lam.size(); ++a)
    for (int b = 0; b < lam.size(); ++b) {
      const double s = lam(a) + lam(b);
      if (s > cut) q += 2.0 * std::norm(g(a, b)) / s;
    }
  return q;
}

FullMerits full_merits(const FullState& st, const FullOperators& ops) {
  FullMerits f;
  auto ev = [&](const Eigen::MatrixXcd& op) { return (st.rho * op).trace().real(); };
  f.jx = ev(ops.jx);
  f.jy = ev(ops.jy);
  f.jz = (st.rho.diagonal().real().array() * ops.jz.array()).sum();
  f.jx2 = (st.rho * ops.jx * ops.jx).trace().real();
  f.jy2 = ev(ops.jy2);
  f.jz2 = (st.rho.diagonal().real().array() * ops.jz.array().square()).sum();
  f.purity = (st.rho * st.rho).trace().real();
  const double var = f.jy2 - f.jy * f.jy;
  f.zeta_y = (f.jz * f.jz + f.jx * f.jx) / (ops.n_atoms * var);
  Eigen::MatrixXcd drho = st.tau - st.tau.trace().real() * st.rho;
  f.qfi = full_qfi(st.rho, drho);
  return f;
}

double compare_to_dicke(const FullState& full, const FullOperators& fops, const DickeState& rho,
                        const DerivativeState& tau, const SpinOperators& dops) {
  FullMerits f = full_merits(full, fops);

  auto spec = rho.spec;
  BlockDiagonalOperator jx = collective_operator(spec, Axis::x);
  BlockDiagonalOperator jz = collective_operator(spec, Axis::z);
  Expectations e = collective_expectations(dops, rho);
  double jx2 = 0, jz2 = 0;
  for (std::size_t b = 0; b < rho.blocks.size(); ++b) {
    jx2 += (rho.blocks[b] * jx.blocks[b] * jx.blocks[b]).trace().real();
    jz2 += (rho.blocks[b] * jz.blocks[b] * jz.blocks[b]).trace().real();
  }
  const double zeta = spin_squeezing_witness(dops, rho);
  const double q = qfi(rho, derivative_of_state(rho, tau));

  double d = 0;
  d = std::max(d, std::abs(f.jx - e.jx));
  d = std::max(d, std::abs(f.jy - e.jy));
  d = std::max(d, std::abs(f.jz - e.jz));
  d = std::max(d, std::abs(f.jx2 - jx2));
  d = std::max(d, std::abs(f.jy2 - e.jy2));
  d = std::max(d, std::abs(f.jz2 - jz2));
  d = std::max(d, std::abs(f.purity - rho.purity()));
  d = std::max(d, std::abs(f.zeta_y - zeta));
  d = std::max(d, std::abs(f.qfi - q));
  return d;
}

DickeBasis::DickeBasis(int n_atoms) {
  check_n(n_atoms);
  spec = BlockSpec::full(n_atoms);
  // paths[twice_j] = list of orthonormal (2^k x (2j+1)) column groups, m ascending
  std::map<int, std::vector<Eigen::MatrixXcd>> paths;
  paths[1].push_back((Eigen::MatrixXcd(2, 2) << 0, 1, 1, 0).finished());  // m = -1/2 is |1>

  for (int k = 2; k <= n_atoms; ++k) {
    std::map<int, std::vector<Eigen::MatrixXcd>> next;
    const int dim_k = 1 << k, half = 1 << (k - 1);
    for (const auto& [tjp, group] : paths) {
      const double jp = 0.5 * tjp;
      for (const auto& v : group) {
        // couple with one more spin-1/2 to j = jp +- 1/2
        for (int up = 0; up <= 1; ++up) {
          const int tj = up ? tjp + 1 : tjp - 1;
          if (tj < 0) continue;
          const double j = 0.5 * tj;
          Eigen::MatrixXcd w = Eigen::MatrixXcd::Zero(dim_k, tj + 1);
          for (int r = 0; r <= tj; ++r) {
            const double m = -j + r;
            // amplitudes on |jp, m -+ 1/2> (x) |up/down>
            double a_up, a_dn;  // new atom in |0> (m1 = +1/2) / |1> (m1 = -1/2)
            if (up) {
              a_up = std::sqrt((jp + m + 0.5) / (2 * jp + 1));
              a_dn = std::sqrt((jp - m + 0.5) / (2 * jp + 1));
            } else {
              a_up = -std::sqrt((jp - m + 0.5) / (2 * jp + 1));
              a_dn = std::sqrt((jp + m + 0.5) / (2 * jp + 1));
            }
            const int r_up = static_cast<int>(std::lround(m - 0.5 + jp));  // row of m - 1/2
            const int r_dn = r_up + 1;
            if (r_up >= 0 && r_up <= tjp && a_up != 0.0)
              w.col(r).head(half) += a_up * v.col(r_up);  // new bit clear = |0>
            if (r_dn >= 0 && r_dn <= tjp && a_dn != 0.0)
              w.col(r).tail(half) += a_dn * v.col(r_dn);  // new bit set = |1>
          }
          next[tj].push_back(std::move(w));
        }
      }
    }
    paths = std::move(next);
  }

  basis.resize(spec->sectors.size());
  std::size_t total = 0;
  for (std::size_t b = 0; b < spec->sectors.size(); ++b) {
    const auto& sec = spec->sectors[b];
    const auto& group = paths.at(sec.twice_j);
    if (group.size() != static_cast<std::size_t>(std::llround(sec.degeneracy)))
      throw std::logic_error("DickeBasis: path count does not match degeneracy");
    Eigen::MatrixXcd all(1 << n_atoms, group.size() * sec.dim);
    for (std::size_t i = 0; i < group.size(); ++i)
      all.middleCols(i * sec.dim, sec.dim) = group[i];
    basis[b] = std::move(all);
    total += group.size() * sec.dim;
  }
  if (total != static_cast<std::size_t>(1) << n_atoms)
    throw std::logic_error("DickeBasis: dimension mismatch");
}

Eigen::MatrixXcd DickeBasis::embed(const BlockMatrix& x) const {
  const int dim = 1 << spec->n_atoms;
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
  for (std::size_t b = 0; b < basis.size(); ++b) {
    const auto& sec = spec->sectors[b];
    const int copies = static_cast<int>(std::llround(sec.degeneracy));
    for (int i = 0; i < copies; ++i) {
      auto v = basis[b].middleCols(i * sec.dim, sec.dim);
      out += v * (x.blocks[b] / sec.degeneracy) * v.adjoint();
    }
  }
  return out;
}

BlockMatrix DickeBasis::extract(const Eigen::MatrixXcd& x) const {
  BlockMatrix out(spec);
  for (std::size_t b = 0; b < basis.size(); ++b) {
    const auto& sec = spec->sectors[b];
    const int copies = static_cast<int>(std::llround(sec.degeneracy));
    for (int i = 0; i < copies; ++i) {
      auto v = basis[b].middleCols(i * sec.dim, sec.dim);
      out.blocks[b] += v.adjoint() * x * v;
    }
  }
  return out;
}

}  // namespace oracle
}  // namespace qnd
