#include "cqs/transfer.hpp"

#include "cqs/rk4.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cqs::transfer {

TimeGrid TimeGrid::span(double t0, double t1, double dt) {
  if (!(dt > 0.0) || !(t1 > t0)) throw std::invalid_argument("TimeGrid::span: need dt > 0, t1 > t0");
  const auto steps = static_cast<std::size_t>(std::ceil((t1 - t0) / dt - 1e-9));
  return TimeGrid{t0, (t1 - t0) / static_cast<double>(steps), steps + 1};
}

double transfer_fidelity(double p, Complex b) {
  const double pb = std::norm(b);
  const double pa = 1.0 - pb;
  p = std::clamp(p, 0.0, 1.0);
  return pa * (pa + pb * (1.0 - p)) + pb * pb * p + 2.0 * pa * pb * std::sqrt(p);
}

Envelope emit_envelope(double gamma1, double omega1, Complex c1_0, const TimeGrid& grid,
                       bool rotating_frame) {
  if (std::abs(c1_0) > 1.0 + 1e-12) throw std::invalid_argument("emit_envelope: |c1_0| > 1");
  if (!(gamma1 > 0.0)) throw std::invalid_argument("emit_envelope: gamma1 must be > 0");
  if (grid.n < 2) throw std::invalid_argument("emit_envelope: grid needs >= 2 points");
  const Complex rate(0.5 * gamma1, rotating_frame ? 0.0 : omega1);
  Envelope env;
  env.t0 = grid.t0;
  env.dt = grid.dt;
  env.samples.resize(grid.n);
  const Complex amp = std::sqrt(gamma1) * c1_0;
  for (std::size_t k = 0; k < grid.n; ++k) {
    const double t = grid.time(k);
    env.samples[k] = t >= 0.0 ? amp * std::exp(-rate * t) : Complex(0.0);
  }
  return env;
}

TransferResult drive_system2(const Envelope& input, double gamma2, double omega2, double tau,
                             const TimeGrid& grid, const TransferOptions& options) {
  if (!(gamma2 > 0.0)) throw std::invalid_argument("drive_system2: gamma2 must be > 0");
  if (grid.n < 2) throw std::invalid_argument("drive_system2: grid needs >= 2 points");
  const Complex decay(0.5 * gamma2, omega2);
  const double coupling = std::sqrt(gamma2);
  auto rhs = [&](double t, Complex c2) { return -decay * c2 - coupling * input.at(t - tau); };

  TransferResult r;
  r.t.resize(grid.n);
  r.c2.resize(grid.n);
  r.p2.resize(grid.n);
  Complex c2 = 0.0;
  for (std::size_t k = 0; k < grid.n; ++k) {
    const double t = grid.time(k);
    if (k > 0) c2 = rk4_step(c2, grid.time(k - 1), grid.dt, rhs);
    r.t[k] = t;
    r.c2[k] = c2;
    r.p2[k] = std::norm(c2);
    if (r.p2[k] > r.p2_max) {
      r.p2_max = r.p2[k];
      r.t_at_max = t;
    }
  }
  r.fidelity = transfer_fidelity(r.p2_max, options.qubit_b);
  return r;
}

wavepacket::TransformSpec to_rotating_frame(wavepacket::TransformSpec spec, double omega1,
                                            double omega2) {
  spec.omega0 -= omega2 + omega1 / spec.alpha;
  return spec;
}

TransferComparison transfer_experiment(const cascade::CascadeModel& model,
                                       const std::optional<wavepacket::TransformSpec>& spec,
                                       const TimeGrid& grid, const TransferOptions& options) {
  cascade::validate(model);
  // Emission sampled at half the drive step so every RK4 stage hits a node.
  const double s_lo = std::min(0.0, grid.t0 - model.tau);
  const double s_hi = grid.t_end() - model.tau + grid.dt;
  const TimeGrid fine = TimeGrid::span(s_lo, s_hi, 0.5 * grid.dt);
  const Envelope emitted =
      emit_envelope(model.gamma1, model.omega1, 1.0, fine, model.rotating_frame);

  TransferComparison out;
  out.off = drive_system2(emitted, model.gamma2, model.frame_omega2(), model.tau, grid, options);
  if (!spec) return out;

  const auto diags = wavepacket::validate(*spec);
  if (!diags.empty()) throw std::invalid_argument(diags.front());
  if (!(spec->X > 0.0)) throw std::invalid_argument("transform.X must be > 0");
  const wavepacket::TransformSpec frame_spec =
      model.rotating_frame ? to_rotating_frame(*spec, model.omega1, model.omega2) : *spec;
  const auto schedule = wavepacket::phase_schedule(frame_spec);
  const Envelope at_device = emitted.shifted(frame_spec.X / frame_spec.c);
  const auto transformed = wavepacket::apply_u_time_domain(at_device, frame_spec);

  // Field reaching system 2, in emission-time coordinates s = t - tau; it
  // equals the field at x = X at lab time s + X/c for any c tau >= X.
  // A node sitting exactly on a switching instant takes the mean of the two
  // one-sided limits, so RK4 never sees an isolated spike there.
  Envelope drive = emitted;
  const double eps = 1e-7 * drive.dt;
  auto field = [&](double s) {
    return wavepacket::assemble_piecewise_field(frame_spec.X, s + frame_spec.X / frame_spec.c,
                                                emitted, transformed.envelope, frame_spec, schedule);
  };
  for (std::size_t k = 0; k < drive.size(); ++k) {
    const double s = drive.time(k);
    const auto left = field(s - eps), right = field(s + eps);
    drive.samples[k] = left.phase == right.phase ? field(s).value : 0.5 * (left.value + right.value);
  }
  out.on = drive_system2(drive, model.gamma2, model.frame_omega2(), model.tau, grid, options);
  out.on->transform_enabled = true;
  out.ratio = out.off.p2_max > 0.0 ? out.on->p2_max / out.off.p2_max : 0.0;
  out.on_drive = std::move(drive);
  return out;
}

namespace {

struct SlopeFit {
  double magnitude = 0.0;
  double phase = 0.0;
};

// Least-squares slopes of ln|z| and unwrapped arg z against t.
SlopeFit fit_log_slopes(const std::vector<double>& t, const std::vector<Complex>& z) {
  const std::size_t n = t.size();
  std::vector<double> mag(n), ph(n);
  double prev = 0.0, offset = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    mag[k] = std::log(std::abs(z[k]));
    const double a = std::arg(z[k]);
    if (k > 0) {
      const double d = a - prev;
      if (d > std::numbers::pi) offset -= 2.0 * std::numbers::pi;
      if (d < -std::numbers::pi) offset += 2.0 * std::numbers::pi;
    }
    prev = a;
    ph[k] = a + offset;
  }
  double tm = 0.0;
  for (double v : t) tm += v;
  tm /= static_cast<double>(n);
  double sxx = 0.0, sxm = 0.0, sxp = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double dx = t[k] - tm;
    sxx += dx * dx;
    sxm += dx * mag[k];
    sxp += dx * ph[k];
  }
  return {sxm / sxx, sxp / sxx};
}

}  // namespace

ReversalReport check_time_reversed_envelope(double gamma1, double gamma2, double omega1,
                                            double omega2) {
  const auto params = wavepacket::derive_transform_params(gamma1, gamma2, omega1, omega2);
  ReversalReport rep;
  rep.alpha = params.alpha;
  rep.omega0 = params.omega0;

  // t <= 0 so that the system-1 argument -t/alpha lies in the decay domain.
  const double span = 10.0 / gamma2;
  const double fastest = std::max({std::abs(params.omega0) + omega1 / params.alpha, omega2, 1.0});
  const auto n = std::max<std::size_t>(
      2001, static_cast<std::size_t>(std::ceil(span * fastest / (0.25 * std::numbers::pi))) + 1);
  std::vector<double> t(n);
  std::vector<Complex> tilde(n), sys2(n);
  const Complex decay1(0.5 * gamma1, omega1);
  const Complex decay2(0.5 * gamma2, omega2);
  for (std::size_t k = 0; k < n; ++k) {
    t[k] = -span + span * static_cast<double>(k) / static_cast<double>(n - 1);
    const double s = -t[k] / params.alpha;
    tilde[k] = std::polar(1.0, -params.omega0 * t[k]) * std::exp(-decay1 * s);
    sys2[k] = std::exp(-decay2 * (t[k] + span));
  }
  const auto fit = fit_log_slopes(t, tilde);
  const auto fit2 = fit_log_slopes(t, sys2);
  rep.magnitude_rate = fit.magnitude;
  rep.phase_rate = fit.phase;
  rep.system2_magnitude_rate = fit2.magnitude;
  rep.system2_phase_rate = fit2.phase;
  return rep;
}

}  // namespace cqs::transfer
