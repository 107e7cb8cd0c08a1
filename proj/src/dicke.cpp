#include "qnd/dicke.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>

namespace qnd {

std::vector<double> multiplicity_row(int n) {
  if (n < 0) throw std::invalid_argument("multiplicity_row: n must be >= 0");
  // row[twice_j] for the current particle count, built bottom-up
  std::vector<double> row(1, 1.0);  // n = 0: single trivial sector j = 0
  for (int k = 1; k <= n; ++k) {
    std::vector<double> next(k + 1, 0.0);
    for (int tj = k % 2; tj <= k; tj += 2) {
      double lo = (tj - 1 >= 0 && tj - 1 < static_cast<int>(row.size())) ? row[tj - 1] : 0.0;
      double hi = (tj + 1 < static_cast<int>(row.size())) ? row[tj + 1] : 0.0;
      next[tj] = lo + hi;
    }
    row = std::move(next);
  }
  return row;
}

std::shared_ptr<const BlockSpec> BlockSpec::full(int n_atoms) {
  if (n_atoms < 1) throw std::invalid_argument("block_structure: N must be >= 1");
  auto spec = std::make_shared<BlockSpec>();
  spec->n_atoms = n_atoms;
  auto mult = multiplicity_row(n_atoms);
  for (int tj = n_atoms; tj >= n_atoms % 2; tj -= 2)
    spec->sectors.push_back({tj, tj + 1, mult[tj]});
  return spec;
}

std::shared_ptr<const BlockSpec> BlockSpec::symmetric_only(int n_atoms) {
  if (n_atoms < 1) throw std::invalid_argument("symmetric_only: N must be >= 1");
  auto spec = std::make_shared<BlockSpec>();
  spec->n_atoms = n_atoms;
  spec->sectors.push_back({n_atoms, n_atoms + 1, 1.0});
  return spec;
}

std::size_t BlockSpec::total_elements() const {
  std::size_t n = 0;
  for (const auto& s : sectors) n += static_cast<std::size_t>(s.dim) * s.dim;
  return n;
}

bool BlockSpec::same_as(const BlockSpec& o) const {
  return n_atoms == o.n_atoms && sectors.size() == o.sectors.size();
}

std::shared_ptr<const BlockSpec> block_structure(int n_atoms) { return BlockSpec::full(n_atoms); }

BlockMatrix::BlockMatrix(std::shared_ptr<const BlockSpec> s) : spec(std::move(s)) {
  blocks.reserve(spec->sectors.size());
  for (const auto& sec : spec->sectors) blocks.push_back(Block::Zero(sec.dim, sec.dim));
}

void BlockMatrix::set_zero() {
  for (auto& b : blocks) b.setZero();
}

double BlockMatrix::physical_trace() const {
  double t = 0;
  for (const auto& b : blocks) t += b.trace().real();
  return t;
}

double BlockMatrix::purity() const {
  double p = 0;
  for (std::size_t k = 0; k < blocks.size(); ++k)
    p += (blocks[k] * blocks[k]).trace().real() / spec->sectors[k].degeneracy;
  return p;
}

void BlockMatrix::hermitize() {
  for (auto& b : blocks) b = 0.5 * (b + b.adjoint()).eval();
}

bool BlockMatrix::all_finite() const {
  for (const auto& b : blocks)
    if (!b.allFinite()) return false;
  return true;
}

double BlockMatrix::max_abs() const {
  double m = 0;
  for (const auto& b : blocks) m = std::max(m, b.cwiseAbs().maxCoeff());
  return m;
}

void BlockMatrix::scale(double f) {
  for (auto& b : blocks) b *= f;
}

void BlockMatrix::check_compatible(const BlockMatrix& o) const {
  if (!spec || !o.spec || !spec->same_as(*o.spec))
    throw std::invalid_argument("block structure mismatch");
}

BlockDiagonalOperator collective_operator(std::shared_ptr<const BlockSpec> spec, Axis axis) {
  BlockDiagonalOperator op;
  op.spec = spec;
  op.hermitian = (axis == Axis::x || axis == Axis::y || axis == Axis::z);
  const Complex i(0, 1);
  for (const auto& sec : spec->sectors) {
    Block b = Block::Zero(sec.dim, sec.dim);
    const double j = sec.j();
    for (int r = 0; r < sec.dim; ++r) {
      double m = sec.m_of(r);
      if (axis == Axis::z) b(r, r) = m;
      if (r + 1 < sec.dim) {
        double a = std::sqrt(j * (j + 1) - m * (m + 1));  // <m+1|J_+|m>
        switch (axis) {
          case Axis::plus: b(r + 1, r) = a; break;
          case Axis::minus: b(r, r + 1) = a; break;
          case Axis::x:
            b(r + 1, r) = 0.5 * a;
            b(r, r + 1) = 0.5 * a;
            break;
          case Axis::y:
            b(r + 1, r) = -0.5 * i * a;
            b(r, r + 1) = 0.5 * i * a;
            break;
          case Axis::z: break;
        }
      }
    }
    op.blocks.push_back(std::move(b));
  }
  return op;
}

BlockDiagonalOperator collective_operator(int n_atoms, Axis axis) {
  return collective_operator(BlockSpec::full(n_atoms), axis);
}

Eigen::VectorXcd css_amplitudes(int n_atoms, double theta, double phi) {
  const int dim = n_atoms + 1;
  Eigen::VectorXcd amp(dim);
  const double ls = std::log(std::abs(std::sin(0.5 * theta)));
  const double lc = std::log(std::abs(std::cos(0.5 * theta)));
  const bool s_zero = std::sin(0.5 * theta) == 0.0;
  const bool c_zero = std::cos(0.5 * theta) == 0.0;
  for (int r = 0; r < dim; ++r) {  // r = J + m
    if ((s_zero && r > 0) || (c_zero && r < n_atoms)) {
      amp(r) = 0.0;
      continue;
    }
    double lb = 0.5 * (std::lgamma(n_atoms + 1.0) - std::lgamma(r + 1.0) -
                       std::lgamma(n_atoms - r + 1.0));
    double mag = std::exp(lb + (s_zero ? 0.0 : r * ls) + (c_zero ? 0.0 : (n_atoms - r) * lc));
    amp(r) = std::polar(mag, -r * phi);
  }
  return amp;
}

DickeState coherent_spin_state(std::shared_ptr<const BlockSpec> spec, double theta, double phi) {
  DickeState rho(spec);
  if (spec->sectors.front().twice_j != spec->n_atoms)
    throw std::invalid_argument("coherent_spin_state: spec lacks the maximal sector");
  Eigen::VectorXcd v = css_amplitudes(spec->n_atoms, theta, phi);
  rho.blocks.front() = v * v.adjoint();
  return rho;
}

DickeState coherent_spin_state(int n_atoms, double theta, double phi) {
  return coherent_spin_state(BlockSpec::full(n_atoms), theta, phi);
}

Complex expectation(const BlockMatrix& state, const BlockDiagonalOperator& op) {
  if (!state.spec || !op.spec || !state.spec->same_as(*op.spec))
    throw std::invalid_argument("expectation: block structure mismatch");
  Complex e = 0;
  for (std::size_t k = 0; k < state.blocks.size(); ++k)
    e += (state.blocks[k] * op.blocks[k]).trace();
  return e;
}

SpinOperators::SpinOperators(std::shared_ptr<const BlockSpec> s) : spec(std::move(s)) {
  sec.reserve(spec->sectors.size());
  for (const auto& sc : spec->sectors) {
    SectorOps o;
    const int n = sc.dim;
    const double j = sc.j();
    o.m.resize(n);
    o.m_sq.resize(n);
    for (int r = 0; r < n; ++r) {
      o.m(r) = sc.m_of(r);
      o.m_sq(r) = o.m(r) * o.m(r);
    }
    o.ladder.resize(std::max(n - 1, 0));
    for (int r = 0; r + 1 < n; ++r)
      o.ladder(r) = std::sqrt(j * (j + 1) - o.m(r) * (o.m(r) + 1));
    o.jy2_d0.resize(n);
    for (int r = 0; r < n; ++r) {
      double lo = (r > 0) ? o.ladder(r - 1) : 0.0;
      double hi = (r + 1 < n) ? o.ladder(r) : 0.0;
      o.jy2_d0(r) = 0.25 * (lo * lo + hi * hi);
    }
    o.jy2_d2.resize(std::max(n - 2, 0));
    for (int r = 0; r + 2 < n; ++r) o.jy2_d2(r) = -0.25 * o.ladder(r) * o.ladder(r + 1);
    o.jy2_d2c = o.jy2_d2.cast<Complex>();
    o.jy_up = (Complex(0, 0.5) * o.ladder.array().cast<Complex>()).matrix();

    // J_y eigenvectors; the spectrum is m = -j..j, used to build projective
    // measurement statistics. Eigenvalues are verified against the exact
    // half-integers.
    Block jy = Block::Zero(n, n);
    const Complex i(0, 1);
    for (int r = 0; r + 1 < n; ++r) {
      jy(r + 1, r) = -0.5 * i * o.ladder(r);
      jy(r, r + 1) = 0.5 * i * o.ladder(r);
    }
    Eigen::SelfAdjointEigenSolver<Block> es(jy);
    for (int k = 0; k < n; ++k)
      if (std::abs(es.eigenvalues()(k) - o.m(k)) > 1e-9)
        throw std::runtime_error("J_y spectrum deviates from half-integers");
    o.jy_vecs = es.eigenvectors();
    sec.push_back(std::move(o));
  }
}

double SpinOperators::exp_jz(const BlockMatrix& x) const {
  double e = 0;
  for (std::size_t k = 0; k < x.blocks.size(); ++k)
    e += (x.blocks[k].diagonal().real().array() * sec[k].m.array()).sum();
  return e;
}

double SpinOperators::exp_jx(const BlockMatrix& x) const {
  double e = 0;
  for (std::size_t k = 0; k < x.blocks.size(); ++k) {
    const Block& b = x.blocks[k];
    const auto& a = sec[k].ladder;
    for (int r = 0; r + 1 < b.rows(); ++r) e += a(r) * b(r, r + 1).real();
  }
  return e;
}

double SpinOperators::exp_jy(const BlockMatrix& x) const {
  // tr(B J_y) over the tridiagonal bands: sum_r A_r Im B(r, r+1)
  double e = 0;
  for (std::size_t k = 0; k < x.blocks.size(); ++k) {
    const Block& b = x.blocks[k];
    const auto& a = sec[k].ladder;
    for (int r = 0; r + 1 < b.rows(); ++r) e += a(r) * b(r, r + 1).imag();
  }
  return e;
}

double SpinOperators::exp_jy2(const BlockMatrix& x) const {
  double e = 0;
  for (std::size_t k = 0; k < x.blocks.size(); ++k) {
    const Block& b = x.blocks[k];
    e += (b.diagonal().real().array() * sec[k].jy2_d0.array()).sum();
    const auto& d2 = sec[k].jy2_d2;
    for (int r = 0; r + 2 < b.rows(); ++r) e += 2.0 * d2(r) * b(r, r + 2).real();
  }
  return e;
}

Expectations collective_expectations(const SpinOperators& ops, const BlockMatrix& x) {
  return {ops.exp_jx(x), ops.exp_jy(x), ops.exp_jz(x), ops.exp_jy2(x)};
}

void check_density_invariants(const DickeState& rho, double trace_tol, double herm_tol,
                              double eig_floor) {
  if (std::abs(rho.physical_trace() - 1.0) > trace_tol)
    throw std::runtime_error("density operator trace deviates from 1");
  for (const auto& b : rho.blocks) {
    if ((b - b.adjoint()).cwiseAbs().maxCoeff() > herm_tol)
      throw std::runtime_error("density block not Hermitian");
    Eigen::SelfAdjointEigenSolver<Block> es(b, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < eig_floor)
      throw std::runtime_error("density block has negative eigenvalue");
  }
}

}  // namespace qnd
