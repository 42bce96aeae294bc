#include "cqs/cascade.hpp"

#include "cqs/rk4.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cqs::cascade {

using hilbert::kron;

void validate(const CascadeModel& model) {
  if (!(model.gamma1 > 0.0)) throw std::invalid_argument("model.gamma1 must be > 0");
  if (!(model.gamma2 > 0.0)) throw std::invalid_argument("model.gamma2 must be > 0");
  if (!(model.omega1 >= 0.0)) throw std::invalid_argument("model.omega1 must be >= 0");
  if (!(model.omega2 >= 0.0)) throw std::invalid_argument("model.omega2 must be >= 0");
  if (!(model.tau >= 0.0)) throw std::invalid_argument("model.tau must be >= 0");
  if (!std::isfinite(model.beta.real()) || !std::isfinite(model.beta.imag())) {
    throw std::invalid_argument("model.beta must be finite");
  }
}

const CompositeOps& composite_ops() {
  static const CompositeOps ops = [] {
    const auto q = hilbert::ladder_two_level();
    const Operator id2 = hilbert::identity(2);
    CompositeOps c;
    c.lower1 = kron(q.lower, id2);
    c.lower2 = kron(id2, q.lower);
    c.raise1 = kron(q.raise, id2);
    c.raise2 = kron(id2, q.raise);
    c.z1 = kron(q.z, id2);
    c.z2 = kron(id2, q.z);
    c.excited1 = c.raise1 * c.lower1;
    c.excited2 = c.raise2 * c.lower2;
    c.identity = hilbert::identity(4);
    return c;
  }();
  return ops;
}

StateVector product_state(Complex c1, Complex c2) {
  return kron(hilbert::qubit_state(c1), hilbert::qubit_state(c2));
}

Operator build_h_sys(const CascadeModel& model) {
  const auto& c = composite_ops();
  return 0.5 * (model.frame_omega1() * c.z1 + model.frame_omega2() * c.z2);
}

Operator build_jump_operator(const CascadeModel& model) {
  validate(model);
  const auto& c = composite_ops();
  return std::sqrt(model.gamma1) * c.lower1 + std::sqrt(model.gamma2) * c.lower2 +
         model.beta * c.identity;
}

Operator build_h_ex(const CascadeModel& model) {
  validate(model);
  const auto& c = composite_ops();
  const Complex minus_half_i(0.0, -0.5);
  const Operator term =
      minus_half_i * (std::sqrt(model.gamma1) * std::sqrt(model.gamma2) * c.raise2 * c.lower1 +
                      (std::sqrt(model.gamma1) * c.raise1 + std::sqrt(model.gamma2) * c.raise2) *
                          model.beta);
  return term + term.adjoint();
}

Operator build_h0(const CascadeModel& model) { return build_h_sys(model) + build_h_ex(model); }

Operator build_h_eff(const CascadeModel& model) {
  const Operator jump = build_jump_operator(model);
  return build_h0(model) - Complex(0.0, 0.5) * (jump.adjoint() * jump);
}

DensityMatrix lindblad_rhs(const DensityMatrix& rho, const Operator& h0, const Operator& jump) {
  if (rho.rows() != h0.rows() || rho.rows() != jump.rows()) {
    throw std::invalid_argument("lindblad_rhs: dimension mismatch");
  }
  const Operator jdj = jump.adjoint() * jump;
  const Complex i(0.0, 1.0);
  return i * (rho * h0 - h0 * rho) + jump * rho * jump.adjoint() -
         0.5 * (rho * jdj + jdj * rho);
}

DensityMatrix lindblad_rhs(const DensityMatrix& rho, const CascadeModel& model) {
  return lindblad_rhs(rho, build_h0(model), build_jump_operator(model));
}

namespace {

// Rewritten in the form -i H_eff rho + i rho H_eff^dagger + J rho J^dagger so
// each RK4 stage costs three 4x4 products.
struct LindbladGenerator {
  Operator minus_i_heff;
  Operator jump;
  Operator jump_dag;

  explicit LindbladGenerator(const CascadeModel& model)
      : minus_i_heff(Complex(0.0, -1.0) * build_h_eff(model)),
        jump(build_jump_operator(model)),
        jump_dag(jump.adjoint()) {}

  DensityMatrix operator()(double, const DensityMatrix& rho) const {
    DensityMatrix out = minus_i_heff * rho;
    out += out.adjoint().eval();
    out.noalias() += jump * rho * jump_dag;
    return out;
  }
};

std::size_t step_count(TimeSpan span, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  if (!(span.t1 > span.t0)) throw std::invalid_argument("t_span must satisfy t1 > t0");
  return static_cast<std::size_t>(std::ceil((span.t1 - span.t0) / dt - 1e-9));
}

}  // namespace

std::vector<TwoClockState> integrate_master(const DensityMatrix& rho0, const CascadeModel& model,
                                            TimeSpan span, double dt,
                                            const MasterOptions& options) {
  validate(model);
  if (rho0.rows() != 4 || rho0.cols() != 4) {
    throw std::invalid_argument("integrate_master: rho0 must be 4x4");
  }
  if (std::abs(rho0.trace() - 1.0) > options.trace_tolerance) {
    throw std::invalid_argument("integrate_master: rho0 trace differs from 1");
  }
  const std::size_t n = step_count(span, dt);
  const double h = (span.t1 - span.t0) / static_cast<double>(n);
  const std::size_t stride = std::max<std::size_t>(1, options.stride);

  std::optional<wavepacket::PhaseSchedule> schedule;
  if (options.transform) schedule = wavepacket::phase_schedule(*options.transform);
  auto clock = [&](double t) -> std::optional<double> {
    if (options.transform) return wavepacket::time_map(t, *options.transform, *schedule, model.tau);
    return t - model.tau;
  };

  const LindbladGenerator gen(model);
  std::vector<TwoClockState> out;
  out.reserve(n / stride + 2);
  DensityMatrix rho = 0.5 * (rho0 + rho0.adjoint());
  out.push_back({span.t0, clock(span.t0), rho});

  for (std::size_t k = 1; k <= n; ++k) {
    const double t_prev = span.t0 + h * static_cast<double>(k - 1);
    rho = rk4_step(rho, t_prev, h, gen);
    rho = 0.5 * (rho + rho.adjoint()).eval();
    const double t = span.t0 + h * static_cast<double>(k);
    const double drift = std::abs(rho.trace() - 1.0);
    if (drift > options.trace_tolerance) {
      std::ostringstream msg;
      msg << "integrate_master: trace deviation " << drift << " at t=" << t << " (dt=" << h
          << "); reduce the step size";
      throw IntegratorError(msg.str());
    }
    if (k % stride == 0 || k == n) out.push_back({t, clock(t), rho});
  }
  return out;
}

Observables observe(const TwoClockState& state) {
  const auto& c = composite_ops();
  Observables o;
  o.t = state.t;
  o.tilde_t = state.tilde_t;
  o.p1 = hilbert::expectation(state.rho, c.excited1).real();
  o.p2 = hilbert::expectation(state.rho, c.excited2).real();
  o.sigma1 = hilbert::expectation(state.rho, c.lower1);
  o.sigma2 = hilbert::expectation(state.rho, c.lower2);
  return o;
}

ConsistencyReport heisenberg_consistency(const DensityMatrix& rho0, const CascadeModel& model,
                                         TimeSpan span, double dt) {
  const auto states = integrate_master(rho0, model, span, dt);
  const double h = states.size() > 1 ? states[1].t - states[0].t : dt;

  // x = (<s1^->, <s2^->, 1), with sigma^z -> -1 on the driving terms.
  const Complex i(0.0, 1.0);
  const double g1 = model.gamma1, g2 = model.gamma2;
  Eigen::Matrix3cd gen = Eigen::Matrix3cd::Zero();
  gen(0, 0) = -(0.5 * g1 + i * model.frame_omega1());
  gen(0, 2) = -std::sqrt(g1) * model.beta;
  gen(1, 0) = -std::sqrt(g1 * g2);
  gen(1, 1) = -(0.5 * g2 + i * model.frame_omega2());
  gen(1, 2) = -std::sqrt(g2) * model.beta;
  const Eigen::Matrix3cd step = (gen * h).exp();

  const auto& c = composite_ops();
  Eigen::Vector3cd x(hilbert::expectation(rho0, c.lower1), hilbert::expectation(rho0, c.lower2),
                     1.0);
  ConsistencyReport report;
  for (std::size_t k = 0; k < states.size(); ++k) {
    if (k > 0) x = step * x;
    const Complex s1 = hilbert::expectation(states[k].rho, c.lower1);
    const Complex s2 = hilbert::expectation(states[k].rho, c.lower2);
    report.max_deviation_sigma1 = std::max(report.max_deviation_sigma1, std::abs(s1 - x(0)));
    report.max_deviation_sigma2 = std::max(report.max_deviation_sigma2, std::abs(s2 - x(1)));
  }
  report.max_deviation = std::max(report.max_deviation_sigma1, report.max_deviation_sigma2);
  report.samples = states.size();
  return report;
}

}  // namespace cqs::cascade
