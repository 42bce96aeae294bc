#include <doctest.h>

#include "cqs/trajectory.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <numeric>

using namespace cqs;
using namespace cqs::trajectory;
using cascade::CascadeModel;

namespace {

TrajectoryConfig config(double t1, double dt, std::size_t n, std::uint64_t seed) {
  TrajectoryConfig c;
  c.t_span = {0.0, t1};
  c.dt = dt;
  c.n_traj = n;
  c.seed = seed;
  c.workers = 1;
  return c;
}

double max_dev_p2(const EnsembleResult& mc, const std::vector<cascade::TwoClockState>& me) {
  double worst = 0.0;
  for (std::size_t k = 0; k < mc.t.size(); ++k)
    worst = std::max(worst, std::abs(mc.p2[k] - cascade::observe(me[k]).p2));
  return worst;
}

}  // namespace

TEST_CASE("counter-based uniform deviates") {
  CHECK(uniform(1, 2, 3) == uniform(1, 2, 3));
  CHECK(uniform(1, 2, 3) != uniform(1, 2, 4));
  CHECK(uniform(1, 2, 3) != uniform(1, 3, 3));
  CHECK(uniform(1, 2, 3) != uniform(2, 2, 3));
  double sum = 0.0, lo = 1.0, hi = 0.0;
  const int n = 200000;
  for (int k = 0; k < n; ++k) {
    const double u = uniform(42, k % 7, k);
    sum += u;
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo >= 0.0);
  CHECK(hi < 1.0);
  CHECK(std::abs(sum / n - 0.5) < 5e-3);
}

TEST_CASE("config validation") {
  CascadeModel m;
  CHECK_NOTHROW(validate(config(1.0, 1e-2, 10, 1), m));
  CHECK_THROWS_AS(validate(config(1.0, 0.02, 10, 1), m), std::invalid_argument);  // 4 dt (g1+g2) = 0.16
  CHECK_THROWS_AS(validate(config(1.0, 1e-2, 0, 1), m), std::invalid_argument);
  CHECK_THROWS_AS(validate(config(1.0, -1e-2, 1, 1), m), std::invalid_argument);
  m.beta = 1.0;
  CHECK_THROWS_AS(validate(config(1.0, 1e-2, 10, 1), m), std::invalid_argument);
  // not normalized
  CHECK_THROWS_AS(evolve_trajectory(StateVector::Ones(4), CascadeModel{}, config(1.0, 1e-2, 1, 1), 0),
                  std::invalid_argument);
}

TEST_CASE("dark state never jumps") {
  const auto rec = evolve_trajectory(cascade::product_state(0.0), CascadeModel{},
                                     config(5.0, 1e-2, 1, 9), 0);
  CHECK(rec.jump_times.empty());
  for (const auto& s : rec.samples) {
    CHECK(s.norm_sq == 1.0);
    CHECK(s.p1 == 0.0);
    CHECK(s.p2 == 0.0);
  }
}

TEST_CASE("norm bookkeeping between jumps") {
  CascadeModel m;
  m.beta = 0.3;
  const auto cfg = config(10.0, 5e-3, 1, 5);
  std::size_t jumps_seen = 0;
  for (std::uint64_t stream = 0; stream < 20; ++stream) {
    const auto rec = evolve_trajectory(cascade::product_state(1.0), m, cfg, stream);
    jumps_seen += rec.jump_times.size();
    std::size_t next_jump = 0;
    for (std::size_t k = 1; k < rec.samples.size(); ++k) {
      const auto& s = rec.samples[k];
      if (next_jump < rec.jump_times.size() && std::abs(s.t - rec.jump_times[next_jump]) < 1e-12) {
        CHECK(std::abs(s.norm_sq - 1.0) < 1e-14);
        ++next_jump;
      } else {
        REQUIRE(s.norm_sq < rec.samples[k - 1].norm_sq);
      }
    }
    CHECK(next_jump == rec.jump_times.size());
  }
  CHECK(jumps_seen > 0);
}

TEST_CASE("single trajectory without jumps follows H_eff") {
  CascadeModel m;
  const auto cfg = config(0.1, 1e-3, 1, 1);
  const StateVector psi0 = cascade::product_state(1.0);
  const Operator heff = cascade::build_h_eff(m);
  bool found = false;
  for (std::uint64_t stream = 0; stream < 50 && !found; ++stream) {
    const auto rec = evolve_trajectory(psi0, m, cfg, stream);
    if (!rec.jump_times.empty()) continue;
    found = true;
    for (const auto& s : rec.samples) {
      const Operator u = (Complex(0.0, -s.t) * heff).exp();
      const StateVector psi = u * psi0;
      CHECK(std::abs(s.norm_sq - psi.squaredNorm()) < 1e-12);
      const auto& c = cascade::composite_ops();
      CHECK(std::abs(s.p1 - psi.dot(c.excited1 * psi).real() / psi.squaredNorm()) < 1e-12);
    }
  }
  CHECK(found);
}

TEST_CASE("records are reproducible") {
  CascadeModel m;
  const auto cfg = config(5.0, 1e-2, 1, 77);
  const auto a = evolve_trajectory(cascade::product_state(1.0), m, cfg, 3);
  const auto b = evolve_trajectory(cascade::product_state(1.0), m, cfg, 3);
  CHECK(a.jump_times == b.jump_times);
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t k = 0; k < a.samples.size(); ++k) {
    CHECK(a.samples[k].norm_sq == b.samples[k].norm_sq);
    CHECK(a.samples[k].p2 == b.samples[k].p2);
  }
}

TEST_CASE("ensemble is bit-identical for any worker count") {
  CascadeModel m;
  m.beta = 0.2;
  auto cfg = config(4.0, 1e-2, 300, 11);
  const auto serial = ensemble_average(cascade::product_state(1.0), m, cfg);
  for (unsigned w : {2u, 3u, 8u}) {
    cfg.workers = w;
    const auto par = ensemble_average(cascade::product_state(1.0), m, cfg);
    CHECK(par.p1 == serial.p1);
    CHECK(par.p2 == serial.p2);
    CHECK(par.sem_p2 == serial.sem_p2);
    CHECK(par.jump_times == serial.jump_times);
  }
}

TEST_CASE("ensemble converges to the master equation") {
  CascadeModel m;
  const StateVector psi0 = cascade::product_state(1.0);
  const auto cfg = config(10.0, 5e-3, 1000, 2);
  const auto mc = ensemble_average(psi0, m, cfg);
  const auto me = cascade::integrate_master(hilbert::projector(psi0), m, cfg.t_span, cfg.dt);
  REQUIRE(me.size() == mc.t.size());
  CHECK(max_dev_p2(mc, me) < 5.0 / std::sqrt(1000.0));

  // mean jump count against the integrated photon flux Tr(J rho J^dagger)
  const Operator j = cascade::build_jump_operator(m);
  double flux = 0.0;
  for (std::size_t k = 1; k < me.size(); ++k) {
    const double a = (j * me[k - 1].rho * j.adjoint()).trace().real();
    const double b = (j * me[k].rho * j.adjoint()).trace().real();
    flux += 0.5 * (a + b) * (me[k].t - me[k - 1].t);
  }
  CHECK(std::abs(mc.mean_jumps - flux) < 3.0 / std::sqrt(1000.0));
  CHECK(mc.sem_p2[0] == 0.0);
  CHECK(mc.sem_p2[400] > 0.0);
}

TEST_CASE("error shrinks roughly as one over sqrt(n)") {
  CascadeModel m;
  const StateVector psi0 = cascade::product_state(1.0);
  const auto me = cascade::integrate_master(hilbert::projector(psi0), m, {0.0, 6.0}, 1e-2);
  std::vector<double> ratios;
  for (std::uint64_t rep = 0; rep < 10; ++rep) {
    const double small = max_dev_p2(ensemble_average(psi0, m, config(6.0, 1e-2, 200, 100 + rep)), me);
    const double large = max_dev_p2(ensemble_average(psi0, m, config(6.0, 1e-2, 400, 200 + rep)), me);
    ratios.push_back(large / small);
  }
  const double mean = std::accumulate(ratios.begin(), ratios.end(), 0.0) / ratios.size();
  CHECK(mean > 0.5);
  CHECK(mean < 0.95);
}
