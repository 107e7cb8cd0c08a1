#pragma once

#include "qnd/dynamics.hpp"
#include "qnd/metrology.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

namespace qnd {

// Save grid: a strict subset of the dt step grid, endpoints included.
struct SaveGrid {
  long n_steps = 0;
  std::vector<long> step_of;  // strictly increasing, step_of[0] = 0
  std::vector<double> times;
  static SaveGrid make(double dt, double t_final, int save_points);
};

// Shared immutable tables for one parameter set.  When no local dephasing is
// present the dynamics never leaves the maximal sector, so the basis is
// restricted to it (dimension N+1 instead of ~N^3/6 elements).
struct EngineSetup {
  ModelParams params;
  std::shared_ptr<const BlockSpec> spec;
  std::shared_ptr<const SpinOperators> ops;
  std::shared_ptr<const LocalDephasing> deph;
  explicit EngineSetup(const ModelParams& p, bool force_full_basis = false);
};

struct TrajectoryRecord {
  std::uint64_t seed = 0;
  MeritSeries series;
  std::vector<DickeState> captures;  // states at requested capture steps
};

TrajectoryRecord run_trajectory(const EngineSetup& setup, const SaveGrid& grid,
                                std::uint64_t base_seed, int traj_index,
                                const std::vector<long>& capture_steps = {});

struct CurveCI {
  std::vector<double> value, lo, hi;
};

struct OptimizedRate {
  double t_star = 0;
  double rate_star = 0;
  double lo = 0, hi = 0;
  bool boundary = false;  // maximum sits on the last grid point
};

OptimizedRate optimize_rate(const std::vector<double>& times, const std::vector<double>& values);

struct EnsembleSummary {
  std::vector<double> times;
  CurveCI f_yt, qbar_c, q_eff, zeta_y, fbar_jy;
  std::vector<double> mean_jx, mean_jy, mean_jz, mean_var_jy;
  OptimizedRate opt_f_yt, opt_qbar_c, opt_q_eff;
  long crb_violations = 0;  // saved points with fi_jy > qfi beyond tolerance
  int n_traj = 0;
  std::uint64_t base_seed = 0;
  ModelParams params;
};

struct EnsembleOptions {
  int n_traj = 2;
  std::uint64_t base_seed = 1;
  int workers = 0;  // 0 = all available
  int batch_size = 256;
  int bootstrap_resamples = 1000;
  double bootstrap_level = 0.95;
  std::string checkpoint_path;  // empty = no checkpointing
  bool keep_checkpoint = false;
  bool progress = false;
  // called after each completed batch; may throw to abort (checkpoint stays)
  std::function<void(int done, int total)> on_batch;
};

struct EnsembleResult {
  EnsembleSummary summary;
  std::vector<TrajectoryRecord> trajectories;
};

EnsembleResult run_ensemble(const EngineSetup& setup, const SaveGrid& grid,
                            const EnsembleOptions& opts);

enum class BootStat { mean, mean_of_squares };

// Percentile bootstrap interval; deterministic for a given resampling seed.
std::pair<double, double> bootstrap_ci(const std::vector<double>& samples, BootStat stat,
                                       double level, int n_resample, std::uint64_t seed);

struct ScalingFit {
  double exponent = 0;
  double intercept = 0;  // log-space
  double residual_rms = 0;
};
// Least-squares fit of log(value) against log(N).
ScalingFit scaling_fit(const std::vector<double>& n_values, const std::vector<double>& values);

// Per-N trajectory-level samples from which a rate curve is rebuilt under
// resampling: curve(t) = column mean of `values`, rate = max_{t>0} curve/t.
struct RateSamples {
  std::vector<double> times;
  Eigen::MatrixXd values;  // n_times x n_traj
};
struct ScalingFitCI {
  ScalingFit fit;
  double exp_lo = 0, exp_hi = 0;
};
ScalingFitCI scaling_fit_bootstrap(const std::vector<double>& n_values,
                                   const std::vector<RateSamples>& samples, int n_resample,
                                   double level, std::uint64_t seed);

// Column matrix of one merit quantity across trajectories (n_times x n_traj).
Eigen::MatrixXd merit_matrix(const std::vector<TrajectoryRecord>& recs,
                             double MeritRow::*field);

}  // namespace qnd
