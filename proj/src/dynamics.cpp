#include "qnd/dynamics.hpp"

#include <cmath>

namespace qnd {

std::string to_string(Channel c) {
  switch (c) {
    case Channel::none: return "none";
    case Channel::local: return "local";
    case Channel::collective: return "collective";
  }
  return "?";
}

Channel channel_from_string(const std::string& s) {
  if (s == "none") return Channel::none;
  if (s == "local") return Channel::local;
  if (s == "collective") return Channel::collective;
  throw std::invalid_argument("unknown channel: " + s);
}

void ModelParams::validate() const {
  if (n_atoms < 1) throw std::invalid_argument("N must be >= 1");
  if (!(dt > 0)) throw std::invalid_argument("dt must be positive");
  if (t_final < 0) throw std::invalid_argument("t_final must be nonnegative");
  if (eta < 0 || eta > 1) throw std::invalid_argument("eta must lie in [0, 1]");
  if (kappa < 0) throw std::invalid_argument("kappa must be nonnegative");
  if (kappa_coll < 0) throw std::invalid_argument("kappa_coll must be nonnegative");
  if (gamma < 0) throw std::invalid_argument("gamma must be nonnegative");
}

bool ModelParams::unvalidated_combination() const { return kappa > 0 && kappa_coll > 0; }

Channel ModelParams::channel() const {
  if (kappa > 0) return Channel::local;  // also the label when both rates are set
  if (kappa_coll > 0) return Channel::collective;
  return Channel::none;
}

// ---------------------------------------------------------------------------
// local dephasing superoperator

LocalDephasing::LocalDephasing(std::shared_ptr<const BlockSpec> spec) : spec_(std::move(spec)) {
  const int n_atoms = spec_->n_atoms;
  const std::size_t full_sectors = static_cast<std::size_t>(n_atoms / 2) + 1;
  if (spec_->sectors.size() != full_sectors)
    throw std::invalid_argument("LocalDephasing requires the full sector chain");

  const auto mult_nm1 = multiplicity_row(n_atoms - 1);
  auto nm1 = [&](int tj) -> double {
    return (tj >= 0 && tj < static_cast<int>(mult_nm1.size())) ? mult_nm1[tj] : 0.0;
  };

  for (const auto& sc : spec_->sectors) {
    const int tj = sc.twice_j, n = sc.dim;
    const double j = sc.j(), d = sc.degeneracy;
    const double dm = nm1(tj - 1), dp = nm1(tj + 1);

    Eigen::VectorXd ws(n), wu(n), wd(n);
    const double g_same =
        n_atoms * ((tj > 0 ? dm / (j * j) : 0.0) + dp / ((j + 1) * (j + 1))) / d;
    const double g_up = n_atoms * dp / d;
    const double g_down = n_atoms * dm / d;
    for (int r = 0; r < n; ++r) {
      const double m = sc.m_of(r);
      ws(r) = std::sqrt(g_same) * m;
      wu(r) = std::sqrt(g_up) * std::sqrt((j + m + 1) * (j - m + 1)) / (j + 1);
      wd(r) = (tj > 0) ? std::sqrt(g_down) * std::sqrt((j + m) * (j - m)) / j : 0.0;
    }
    w_same_.push_back(std::move(ws));
    w_up_.push_back(std::move(wu));
    w_down_.push_back(std::move(wd));
  }
}

void LocalDephasing::accumulate(const BlockMatrix& x, double w, BlockMatrix& out) const {
  const std::size_t nb = spec_->sectors.size();
  for (std::size_t b = 0; b < nb; ++b) {
    const Block& src = x.blocks[b];
    const int n = spec_->sectors[b].dim;

    const double* ws = w_same_[b].data();
    Block& same = out.blocks[b];
    for (int c = 0; c < n; ++c) {
      const double fc = w * ws[c];
      if (fc == 0.0) continue;
      for (int r = 0; r < n; ++r) same(r, c) += (ws[r] * fc) * src(r, c);
    }
    if (b >= 1) {  // j -> j + 1, target indices shift by +1
      const double* wu = w_up_[b].data();
      Block& up = out.blocks[b - 1];
      for (int c = 0; c < n; ++c) {
        const double fc = w * wu[c];
        for (int r = 0; r < n; ++r) up(r + 1, c + 1) += (wu[r] * fc) * src(r, c);
      }
    }
    if (b + 1 < nb) {  // j -> j - 1; edge rows carry zero weight
      const double* wd = w_down_[b].data();
      Block& down = out.blocks[b + 1];
      for (int c = 1; c + 1 < n; ++c) {
        const double fc = w * wd[c];
        for (int r = 1; r + 1 < n; ++r) down(r - 1, c - 1) += (wd[r] * fc) * src(r, c);
      }
    }
  }
}

void LocalDephasing::apply(const BlockMatrix& x, BlockMatrix& out) const {
  x.check_compatible(out);
  out.set_zero();
  accumulate(x, 1.0, out);
}

BlockMatrix local_dephasing_action(const LocalDephasing& map, const BlockMatrix& x) {
  BlockMatrix out(x.spec);
  map.accumulate(x, 1.0, out);
  const double n = x.spec->n_atoms;
  for (std::size_t b = 0; b < out.blocks.size(); ++b) out.blocks[b] -= n * x.blocks[b];
  return out;
}

BlockMatrix collective_dephasing_action(const SpinOperators& ops, const BlockMatrix& x) {
  BlockMatrix out(x.spec);
  for (std::size_t b = 0; b < x.blocks.size(); ++b) {
    const auto& m = ops.sec[b].m;
    const Block& src = x.blocks[b];
    Block& dst = out.blocks[b];
    for (int c = 0; c < src.cols(); ++c)
      for (int r = 0; r < src.rows(); ++r) {
        const double d = m(r) - m(c);
        dst(r, c) = -0.5 * d * d * src(r, c);
      }
  }
  return out;
}

void accumulate_jz_sandwich(const SpinOperators& ops, const BlockMatrix& x, double w,
                            BlockMatrix& out) {
  for (std::size_t b = 0; b < x.blocks.size(); ++b) {
    const auto& m = ops.sec[b].m;
    const Block& src = x.blocks[b];
    Block& dst = out.blocks[b];
    for (int c = 0; c < src.cols(); ++c) {
      const double fc = w * m(c);
      if (fc == 0.0) continue;
      for (int r = 0; r < src.rows(); ++r) dst(r, c) += (m(r) * fc) * src(r, c);
    }
  }
}

// ---------------------------------------------------------------------------
// Kraus bands

namespace {

struct BandCoeffs {
  double c0;    // constant decay: (kappa/4) N
  double s;     // sqrt(eta gamma) dy
  double beta;  // -(gamma/2) dt + (eta gamma/2)(dy^2 - dt)
};

BandCoeffs band_coeffs(const ModelParams& p, double eta, double dt, double dy) {
  BandCoeffs c;
  c.c0 = (p.kappa > 0) ? 0.25 * p.kappa * p.n_atoms : 0.0;
  c.s = std::sqrt(eta * p.gamma) * dy;
  c.beta = -0.5 * p.gamma * dt + 0.5 * eta * p.gamma * (dy * dy - dt);
  return c;
}

void assemble_diag(const ModelParams& p, const SpinOperators::SectorOps& so, const BandCoeffs& c,
                   double dt, Eigen::VectorXcd& d0, Eigen::VectorXcd& off1) {
  const int n = static_cast<int>(so.m.size());
  d0.resize(n);
  for (int r = 0; r < n; ++r) {
    double re = 1.0 - c.c0 * dt - 0.5 * p.kappa_coll * dt * so.m_sq(r) + c.beta * so.jy2_d0(r);
    d0(r) = Complex(re, -p.omega * dt * so.m(r));
  }
  off1.resize(std::max(n - 1, 0));
  for (int r = 0; r + 1 < n; ++r) off1(r) = Complex(0, 0.5 * c.s * so.ladder(r));  // M(r, r+1)
}

// W = M X with M given by bands (d0, off1 above the diagonal, conj(off1)
// below, beta * jy2_d2 on |k| = 2).
void band_lmul(const Eigen::VectorXcd& d0, const Eigen::VectorXcd& off1,
               const Eigen::VectorXcd& jy2_d2c, double beta, const Block& x, Block& w) {
  const int n = static_cast<int>(x.rows());
  w = (x.array().colwise() * d0.array()).matrix();
  if (n > 1) {
    w.topRows(n - 1) += (x.bottomRows(n - 1).array().colwise() * off1.array()).matrix();
    w.bottomRows(n - 1) +=
        (x.topRows(n - 1).array().colwise() * off1.conjugate().array()).matrix();
  }
  if (n > 2 && beta != 0.0) {
    w.topRows(n - 2) +=
        (x.bottomRows(n - 2).array().colwise() * (beta * jy2_d2c.array())).matrix();
    w.bottomRows(n - 2) +=
        (x.topRows(n - 2).array().colwise() * (beta * jy2_d2c.array())).matrix();
  }
}

// Y (+)= W M^dag
template <bool Accumulate>
void band_rmul_adj(const Eigen::VectorXcd& d0, const Eigen::VectorXcd& off1,
                   const Eigen::VectorXcd& jy2_d2c, double beta, const Block& w, Block& y) {
  const int n = static_cast<int>(w.rows());
  if constexpr (Accumulate)
    y.noalias() += w * d0.conjugate().asDiagonal();
  else
    y.noalias() = w * d0.conjugate().asDiagonal();
  if (n > 1) {
    // Y(:,c) += conj(M(c, c+1)) W(:, c+1) and Y(:,c+1) += conj(M(c+1, c)) W(:,c)
    y.leftCols(n - 1).noalias() += w.rightCols(n - 1) * off1.conjugate().asDiagonal();
    y.rightCols(n - 1).noalias() += w.leftCols(n - 1) * off1.asDiagonal();
  }
  if (n > 2 && beta != 0.0) {
    y.leftCols(n - 2).noalias() += w.rightCols(n - 2) * (beta * jy2_d2c).asDiagonal();
    y.rightCols(n - 2).noalias() += w.leftCols(n - 2) * (beta * jy2_d2c).asDiagonal();
  }
}

// Y += f * J_y X J_y using scratch T
void accumulate_jy_sandwich(const SpinOperators::SectorOps& so, double f, const Block& x,
                            Block& t, Block& y) {
  const int n = static_cast<int>(x.rows());
  if (n == 1) return;  // J_y = 0 on a 1x1 sector
  const auto& up = so.jy_up;
  t.setZero(n, n);
  t.topRows(n - 1) = (x.bottomRows(n - 1).array().colwise() * up.array()).matrix();
  t.bottomRows(n - 1) += (x.topRows(n - 1).array().colwise() * up.conjugate().array()).matrix();
  // right-multiply: (T J_y)(:,c) = dn[c] T(:,c+1) + up[c-1] T(:,c-1)
  y.leftCols(n - 1).noalias() += (f * t.rightCols(n - 1)) * up.conjugate().asDiagonal();
  y.rightCols(n - 1).noalias() += (f * t.leftCols(n - 1)) * up.asDiagonal();
}

void hermitize_scaled(Block& b, const Block& src, double f) {
  const int n = static_cast<int>(src.rows());
  for (int c = 0; c < n; ++c) {
    b(c, c) = Complex(f * src(c, c).real(), 0.0);
    for (int r = 0; r < c; ++r) {
      Complex avg = 0.5 * f * (src(r, c) + std::conj(src(c, r)));
      b(r, c) = avg;
      b(c, r) = std::conj(avg);
    }
  }
}

}  // namespace

BlockDiagonalOperator kraus_operator(const ModelParams& p, const SpinOperators& ops, double dt,
                                     double dy) {
  if (!std::isfinite(dy)) throw std::invalid_argument("kraus_operator: dy must be finite");
  BandCoeffs c = band_coeffs(p, p.eta, dt, dy);
  BlockDiagonalOperator op;
  op.spec = ops.spec;
  for (std::size_t b = 0; b < ops.sec.size(); ++b) {
    const auto& so = ops.sec[b];
    const int n = static_cast<int>(so.m.size());
    Eigen::VectorXcd d0, off1;
    assemble_diag(p, so, c, dt, d0, off1);
    Block m = Block::Zero(n, n);
    m.diagonal() = d0;
    for (int r = 0; r + 1 < n; ++r) {
      m(r, r + 1) = off1(r);
      m(r + 1, r) = std::conj(off1(r));
    }
    for (int r = 0; r + 2 < n; ++r) {
      m(r, r + 2) = c.beta * so.jy2_d2(r);
      m(r + 2, r) = c.beta * so.jy2_d2(r);
    }
    op.blocks.push_back(std::move(m));
  }
  return op;
}

// ---------------------------------------------------------------------------
// stepper

SmeStepper::SmeStepper(ModelParams params, std::shared_ptr<const SpinOperators> ops,
                       std::shared_ptr<const LocalDephasing> deph)
    : params_(params), ops_(std::move(ops)), deph_(std::move(deph)) {
  params_.validate();
  if (params_.kappa > 0 && !deph_)
    throw std::invalid_argument("SmeStepper: kappa > 0 requires a LocalDephasing map");
  scratch_.resize(ops_->sec.size());
  for (std::size_t b = 0; b < ops_->sec.size(); ++b) {
    const int n = static_cast<int>(ops_->sec[b].m.size());
    scratch_[b].w.resize(n, n);
    scratch_[b].g.resize(n, n);
  }
  rho_new_ = BlockMatrix(ops_->spec);
  tau_new_ = BlockMatrix(ops_->spec);
}

StepOutput SmeStepper::step(DickeState& rho, DerivativeState& tau, double dw) {
  return step_impl(rho, tau, dw, params_.eta);
}

StepOutput SmeStepper::step_unconditional(DickeState& rho, DerivativeState& tau) {
  return step_impl(rho, tau, 0.0, 0.0);
}

StepOutput SmeStepper::step_impl(DickeState& rho, DerivativeState& tau, double dw, double eta) {
  const ModelParams& p = params_;
  const double dt = p.dt;
  const double jy_mean = ops_->exp_jy(rho);
  const double dy = 2.0 * std::sqrt(eta * p.gamma) * jy_mean * dt + dw;
  const BandCoeffs c = band_coeffs(p, eta, dt, dy);
  const double feed = (1.0 - eta) * p.gamma * dt;

  const std::size_t nb = ops_->sec.size();
  for (std::size_t b = 0; b < nb; ++b) {
    const auto& so = ops_->sec[b];
    auto& sc = scratch_[b];
    const int n = static_cast<int>(so.m.size());
    assemble_diag(p, so, c, dt, sc.d0, sc.off1);

    // rho_tilde = M rho M^dag (+ feed-through below)
    band_lmul(sc.d0, sc.off1, so.jy2_d2c, c.beta, rho.blocks[b], sc.w);
    band_rmul_adj<false>(sc.d0, sc.off1, so.jy2_d2c, c.beta, sc.w, rho_new_.blocks[b]);

    // tau_tilde = dM rho M^dag + M rho dM^dag + M tau M^dag + feed-through,
    // with dM = -i J_z dt.  Using W = M rho and G = W diag(m):
    //   M rho dM^dag = i dt G,  dM rho M^dag = -i dt G^dag.
    sc.g.noalias() = sc.w * so.m.asDiagonal();
    Block& tn = tau_new_.blocks[b];
    for (int col = 0; col < n; ++col) {
      tn(col, col) = Complex(0, dt) * (sc.g(col, col) - std::conj(sc.g(col, col)));
      for (int r = 0; r < col; ++r) {
        tn(r, col) = Complex(0, dt) * (sc.g(r, col) - std::conj(sc.g(col, r)));
        tn(col, r) = Complex(0, dt) * (sc.g(col, r) - std::conj(sc.g(r, col)));
      }
    }
    band_lmul(sc.d0, sc.off1, so.jy2_d2c, c.beta, tau.blocks[b], sc.w);
    band_rmul_adj<true>(sc.d0, sc.off1, so.jy2_d2c, c.beta, sc.w, tn);

    if (feed != 0.0) {
      accumulate_jy_sandwich(so, feed, rho.blocks[b], sc.g, rho_new_.blocks[b]);
      accumulate_jy_sandwich(so, feed, tau.blocks[b], sc.g, tn);
    }
  }

  if (p.kappa > 0) {
    deph_->accumulate(rho, 0.5 * p.kappa * dt, rho_new_);
    deph_->accumulate(tau, 0.5 * p.kappa * dt, tau_new_);
  }
  if (p.kappa_coll > 0) {
    accumulate_jz_sandwich(*ops_, rho, p.kappa_coll * dt, rho_new_);
    accumulate_jz_sandwich(*ops_, tau, p.kappa_coll * dt, tau_new_);
  }

  const double pre_trace = rho_new_.physical_trace();
  if (!std::isfinite(pre_trace))
    throw SimulationError("integration blow-up: non-finite state at step " +
                              std::to_string(step_count_),
                          step_count_);
  if (pre_trace <= 0.0)
    throw SimulationError("nonpositive pre-normalization trace at step " +
                              std::to_string(step_count_) + "; reduce dt",
                          step_count_);

  const double inv = 1.0 / pre_trace;
  for (std::size_t b = 0; b < nb; ++b) {
    hermitize_scaled(rho.blocks[b], rho_new_.blocks[b], inv);
    hermitize_scaled(tau.blocks[b], tau_new_.blocks[b], inv);
  }
  ++step_count_;
  return {dy, dw, pre_trace};
}

StepOutput sme_step(DickeState& rho, DerivativeState& tau, double dw, const ModelParams& p,
                    const SpinOperators& ops, const LocalDephasing* deph) {
  auto ops_ptr = std::shared_ptr<const SpinOperators>(&ops, [](const SpinOperators*) {});
  auto deph_ptr = std::shared_ptr<const LocalDephasing>(deph, [](const LocalDephasing*) {});
  SmeStepper stepper(p, ops_ptr, deph ? deph_ptr : nullptr);
  return stepper.step(rho, tau, dw);
}

DickeState unconditional_step(const DickeState& rho, const ModelParams& p,
                              const SpinOperators& ops, const LocalDephasing* deph) {
  DickeState r = rho;
  DerivativeState t(r.spec);
  auto ops_ptr = std::shared_ptr<const SpinOperators>(&ops, [](const SpinOperators*) {});
  auto deph_ptr = std::shared_ptr<const LocalDephasing>(deph, [](const LocalDephasing*) {});
  SmeStepper stepper(p, ops_ptr, deph ? deph_ptr : nullptr);
  stepper.step_unconditional(r, t);
  return r;
}

}  // namespace qnd
