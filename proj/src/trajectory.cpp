#include "cqs/trajectory.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <exception>
#include <cmath>
#include <sstream>
#include <thread>

namespace cqs::trajectory {

namespace {

constexpr std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::size_t kChunk = 64;
constexpr double kMaxJumpProbability = 0.1;

std::size_t step_count(const TrajectoryConfig& cfg) {
  return static_cast<std::size_t>(
      std::ceil((cfg.t_span.t1 - cfg.t_span.t0) / cfg.dt - 1e-9));
}

// Everything a trajectory needs, built once per ensemble.
struct Kernel {
  Operator step;  // RK4 propagator for one no-jump step
  Operator jump;
  Operator jdj;
  Operator excited1, excited2;
  double h = 0.0;
  double t0 = 0.0;
  std::size_t n_steps = 0;

  Kernel(const cascade::CascadeModel& model, const TrajectoryConfig& cfg) {
    validate(cfg, model);
    n_steps = step_count(cfg);
    t0 = cfg.t_span.t0;
    h = (cfg.t_span.t1 - cfg.t_span.t0) / static_cast<double>(n_steps);
    // For a constant linear generator RK4 is exactly the degree-4 Taylor
    // polynomial of exp(-i H_eff h).
    const Operator a = Complex(0.0, -h) * cascade::build_h_eff(model);
    const Operator id = Operator::Identity(a.rows(), a.cols());
    const Operator a2 = a * a;
    step = id + a + a2 / 2.0 + a2 * a / 6.0 + a2 * a2 / 24.0;
    jump = cascade::build_jump_operator(model);
    jdj = jump.adjoint() * jump;
    const auto& c = cascade::composite_ops();
    excited1 = c.excited1;
    excited2 = c.excited2;
  }

  double time(std::size_t k) const { return t0 + h * static_cast<double>(k); }
};

// Runs one trajectory; `visit(k, sample)` sees t_k for k = 0..n_steps and
// `on_jump(t)` every jump.
template <class Visit, class OnJump>
void run(const StateVector& psi0, const Kernel& kernel, std::uint64_t seed,
         std::uint64_t stream, Visit&& visit, OnJump&& on_jump) {
  StateVector psi = psi0;
  StateVector tmp(psi.size());
  auto sample = [&](std::size_t k) {
    const double nsq = psi.squaredNorm();
    TrajectorySample s;
    s.t = kernel.time(k);
    s.norm_sq = nsq;
    s.p1 = psi.dot(kernel.excited1 * psi).real() / nsq;
    s.p2 = psi.dot(kernel.excited2 * psi).real() / nsq;
    visit(k, s);
  };
  sample(0);
  for (std::size_t k = 0; k < kernel.n_steps; ++k) {
    const double nsq = psi.squaredNorm();
    tmp.noalias() = kernel.jdj * psi;
    const double dp = kernel.h * psi.dot(tmp).real() / nsq;
    if (dp > kMaxJumpProbability) {
      std::ostringstream msg;
      msg << "evolve_trajectory: jump probability " << dp << " per step at t=" << kernel.time(k)
          << " exceeds " << kMaxJumpProbability << "; reduce dt";
      throw cascade::IntegratorError(msg.str());
    }
    if (uniform(seed, stream, k) < dp) {
      tmp.noalias() = kernel.jump * psi;
      const double jn = tmp.norm();
      assert(jn > 0.0);  // dp > 0 implies J psi != 0
      psi = tmp / jn;
      on_jump(kernel.time(k + 1));
    } else {
      tmp.noalias() = kernel.step * psi;
      psi = tmp;
    }
    sample(k + 1);
  }
}

void check_initial(const StateVector& psi0) {
  if (psi0.size() != 4) throw std::invalid_argument("psi0 must have dimension 4");
  if (std::abs(psi0.squaredNorm() - 1.0) > 1e-9) throw std::invalid_argument("psi0 must be normalized");
}

struct ChunkSums {
  std::vector<double> p1, p2, p2sq;
  std::vector<double> jumps;
};

}  // namespace

double uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t step) {
  std::uint64_t h = splitmix(seed);
  h = splitmix(h ^ (stream * 0xD1B54A32D192ED03ULL));
  h = splitmix(h ^ (step * 0xAEF17502108EF2D9ULL));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

void validate(const TrajectoryConfig& cfg, const cascade::CascadeModel& model) {
  cascade::validate(model);
  if (!(cfg.dt > 0.0)) throw std::invalid_argument("numerics.dt must be > 0");
  if (!(cfg.t_span.t1 > cfg.t_span.t0)) throw std::invalid_argument("numerics.t1 must exceed t0");
  if (cfg.n_traj == 0) throw std::invalid_argument("numerics.n_traj must be positive");
  const double rate = model.gamma1 + model.gamma2 + std::norm(model.beta);
  if (!(cfg.dt * rate * 4.0 < 0.1)) {
    std::ostringstream msg;
    msg << "numerics.dt: dt*(gamma1+gamma2+|beta|^2)*4 = " << cfg.dt * rate * 4.0
        << " must be < 0.1";
    throw std::invalid_argument(msg.str());
  }
}

TrajectoryRecord evolve_trajectory(const StateVector& psi0, const cascade::CascadeModel& model,
                                   const TrajectoryConfig& cfg, std::uint64_t stream_index) {
  check_initial(psi0);
  const Kernel kernel(model, cfg);
  TrajectoryRecord rec;
  rec.samples.reserve(kernel.n_steps + 1);
  run(
      psi0, kernel, cfg.seed, stream_index,
      [&](std::size_t, const TrajectorySample& s) { rec.samples.push_back(s); },
      [&](double t) { rec.jump_times.push_back(t); });
  return rec;
}

EnsembleResult ensemble_average(const StateVector& psi0, const cascade::CascadeModel& model,
                                const TrajectoryConfig& cfg) {
  check_initial(psi0);
  const Kernel kernel(model, cfg);
  const std::size_t n_points = kernel.n_steps + 1;
  const std::size_t n_chunks = (cfg.n_traj + kChunk - 1) / kChunk;
  std::vector<ChunkSums> chunks(n_chunks);

  // Within a chunk trajectories are summed in index order; chunks are merged
  // in chunk order below, so the result does not depend on the worker count.
  auto work_chunk = [&](std::size_t c) {
    ChunkSums& sums = chunks[c];
    sums.p1.assign(n_points, 0.0);
    sums.p2.assign(n_points, 0.0);
    sums.p2sq.assign(n_points, 0.0);
    const std::size_t end = std::min(cfg.n_traj, (c + 1) * kChunk);
    for (std::size_t traj = c * kChunk; traj < end; ++traj) {
      run(
          psi0, kernel, cfg.seed, traj,
          [&](std::size_t k, const TrajectorySample& s) {
            sums.p1[k] += s.p1;
            sums.p2[k] += s.p2;
            sums.p2sq[k] += s.p2 * s.p2;
          },
          [&](double t) { sums.jumps.push_back(t); });
    }
  };

  unsigned workers = cfg.workers ? cfg.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n_chunks));
  if (workers <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) work_chunk(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t c; (c = next.fetch_add(1)) < n_chunks;) work_chunk(c);
        } catch (...) {
          errors[w] = std::current_exception();
          next = n_chunks;
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  EnsembleResult out;
  out.n_traj = cfg.n_traj;
  out.t.resize(n_points);
  out.p1.assign(n_points, 0.0);
  out.p2.assign(n_points, 0.0);
  out.sem_p2.assign(n_points, 0.0);
  std::vector<double> p2sq(n_points, 0.0);
  for (const auto& sums : chunks) {
    for (std::size_t k = 0; k < n_points; ++k) {
      out.p1[k] += sums.p1[k];
      out.p2[k] += sums.p2[k];
      p2sq[k] += sums.p2sq[k];
    }
    out.jump_times.insert(out.jump_times.end(), sums.jumps.begin(), sums.jumps.end());
  }
  const double n = static_cast<double>(cfg.n_traj);
  for (std::size_t k = 0; k < n_points; ++k) {
    out.t[k] = kernel.time(k);
    out.p1[k] /= n;
    out.p2[k] /= n;
    if (cfg.n_traj > 1) {
      const double var = std::max(0.0, (p2sq[k] - n * out.p2[k] * out.p2[k]) / (n - 1.0));
      out.sem_p2[k] = std::sqrt(var / n);
    }
  }
  out.mean_jumps = static_cast<double>(out.jump_times.size()) / n;
  return out;
}

}  // namespace cqs::trajectory
