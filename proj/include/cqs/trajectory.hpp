#pragma once

#include "cqs/cascade.hpp"

#include <cstdint>
#include <vector>

namespace cqs::trajectory {

/// Counter-based uniform deviate in [0, 1): a pure function of its key, so
/// any (trajectory, step) draw is reproducible regardless of scheduling.
double uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t step);

struct TrajectoryConfig {
  double dt = 1e-2;
  std::size_t n_traj = 1000;
  std::uint64_t seed = 1;
  cascade::TimeSpan t_span{0.0, 10.0};
  /// Worker threads; 0 picks std::thread::hardware_concurrency().
  unsigned workers = 0;
};

/// Throws std::invalid_argument unless dt (g1 + g2 + |beta|^2) * 4 < 0.1 and
/// the remaining fields are sane.
void validate(const TrajectoryConfig& cfg, const cascade::CascadeModel& model);

struct TrajectorySample {
  double t = 0.0;
  double norm_sq = 1.0;  // <psi|psi> of the unnormalized state
  double p1 = 0.0;       // normalized <sigma1^+ sigma1^->
  double p2 = 0.0;
};

struct TrajectoryRecord {
  std::vector<double> jump_times;
  std::vector<TrajectorySample> samples;
};

/// Photon-counting unraveling with first-order jump sampling. Between jumps
/// the state follows RK4 on i d psi/dt = H_eff psi and is not renormalized.
/// Throws cascade::IntegratorError if a step's jump probability exceeds 0.1.
TrajectoryRecord evolve_trajectory(const StateVector& psi0, const cascade::CascadeModel& model,
                                   const TrajectoryConfig& cfg, std::uint64_t stream_index);

struct EnsembleResult {
  std::vector<double> t;
  std::vector<double> p1;
  std::vector<double> p2;
  std::vector<double> sem_p2;  // standard error of the P2 mean
  double mean_jumps = 0.0;
  /// Every jump time, grouped by trajectory index.
  std::vector<double> jump_times;
  std::size_t n_traj = 0;
};

/// Ensemble mean over cfg.n_traj trajectories with stream indices 0..n-1.
/// Bit-identical for any worker count.
EnsembleResult ensemble_average(const StateVector& psi0, const cascade::CascadeModel& model,
                                const TrajectoryConfig& cfg);

}  // namespace cqs::trajectory
