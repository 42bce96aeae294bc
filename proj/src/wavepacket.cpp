#include "cqs/wavepacket.hpp"

#include "cqs/io.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <memory>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace cqs::wavepacket {

namespace {

constexpr double kNodeTol = 1e-9;
const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);

std::string num(double v) { return io::format_number(v); }

enum class Direction { Backward, Forward };

// In-place unnormalized DFT. Backward is sum_k x_k e^{+2 pi i m k / N}.
void fft(std::vector<Complex>& data, Direction dir) {
  const int n = static_cast<int>(data.size());
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  // Planner calls are not thread-safe; execution is.
  static std::mutex planner;
  std::unique_lock lock(planner);
  fftw_plan plan = fftw_plan_dft_1d(n, ptr, ptr, dir == Direction::Backward ? FFTW_BACKWARD : FFTW_FORWARD,
                                    FFTW_ESTIMATE);
  lock.unlock();
  if (!plan) throw std::runtime_error("fftw: failed to create plan");
  fftw_execute(plan);
  lock.lock();
  fftw_destroy_plan(plan);
}

Complex lagrange4(const std::vector<Complex>& y, std::size_t s, double u) {
  // Nodes s..s+3, evaluation at fractional index u.
  Complex acc = 0.0;
  for (std::size_t j = 0; j < 4; ++j) {
    double w = 1.0;
    const double xj = static_cast<double>(s + j);
    for (std::size_t m = 0; m < 4; ++m) {
      if (m == j) continue;
      const double xm = static_cast<double>(s + m);
      w *= (u - xm) / (xj - xm);
    }
    acc += w * y[s + j];
  }
  return acc;
}

}  // namespace

Complex Envelope::at(double t) const {
  const std::size_t n = samples.size();
  if (n == 0) return 0.0;
  const double u = (t - t0) / dt;
  const double last = static_cast<double>(n - 1);
  if (u < -kNodeTol || u > last + kNodeTol) return 0.0;
  const double r = std::round(u);
  if (std::abs(u - r) < kNodeTol) return samples[static_cast<std::size_t>(std::clamp(r, 0.0, last))];
  if (n < 4) {
    const auto k = static_cast<std::size_t>(std::floor(u));
    const double w = u - static_cast<double>(k);
    return (1.0 - w) * samples[k] + w * samples[std::min(k + 1, n - 1)];
  }
  const auto k = static_cast<long>(std::floor(u));
  const long s = std::clamp<long>(k - 1, 0, static_cast<long>(n) - 4);
  return lagrange4(samples, static_cast<std::size_t>(s), u);
}

double Envelope::squared_norm() const {
  double acc = 0.0;
  for (const auto& a : samples) acc += std::norm(a);
  return acc * dt;
}

Envelope Envelope::shifted(double shift) const {
  Envelope out = *this;
  out.t0 += shift;
  return out;
}

void Envelope::validate() const {
  if (samples.size() < 2) throw std::invalid_argument("Envelope needs at least 2 samples");
  if (!(dt > 0.0)) throw std::invalid_argument("Envelope dt must be > 0");
}

double Spectrum::squared_norm() const {
  double acc = 0.0;
  for (const auto& a : samples) acc += std::norm(a);
  return acc * dnu;
}

std::vector<std::string> validate(const TransformSpec& spec, std::optional<double> tau) {
  std::vector<std::string> diags;
  if (!(spec.alpha > 0.0)) diags.push_back("transform.alpha must be > 0");
  if (!(spec.Delta > 0.0)) diags.push_back("transform.Delta must be > 0");
  if (!(spec.c > 0.0)) diags.push_back("transform.c must be > 0");
  if (!std::isfinite(spec.T)) diags.push_back("transform.T must be finite");
  if (!std::isfinite(spec.omega0)) diags.push_back("transform.omega0 must be finite");
  if (tau && *tau > 0.0 && !(spec.X > 0.0 && spec.X < spec.c * *tau)) {
    diags.push_back("transform.X must satisfy 0 < X < c*tau (c*tau = " + num(spec.c * *tau) + ")");
  }
  return diags;
}

TransformParams derive_transform_params(double gamma1, double gamma2, double omega1,
                                        double omega2) {
  if (!(gamma1 > 0.0) || !(gamma2 > 0.0)) {
    throw std::invalid_argument("derive_transform_params: decay rates must be > 0");
  }
  TransformParams p;
  p.alpha = gamma1 / gamma2;
  p.omega0 = omega2 + omega1 / p.alpha;
  return p;
}

TransformSpec matched_transform(double gamma1, double gamma2, double omega1, double omega2,
                                double Delta, double X, double c) {
  const auto p = derive_transform_params(gamma1, gamma2, omega1, omega2);
  TransformSpec spec;
  spec.alpha = p.alpha;
  spec.omega0 = p.omega0;
  spec.Delta = Delta;
  spec.X = X;
  spec.c = c;
  const double t_a = X / c + Delta;
  spec.T = (1.0 + spec.alpha) * t_a;
  return spec;
}

PhaseSchedule phase_schedule(const TransformSpec& spec) {
  const auto diags = validate(spec);
  if (!diags.empty()) throw std::invalid_argument(diags.front());
  PhaseSchedule s;
  s.t_s = spec.T / (1.0 + spec.alpha);
  s.t_i = s.t_s - spec.Delta;
  s.t_f = s.t_s + spec.alpha * spec.Delta;
  s.t_a = spec.X / spec.c + spec.Delta;
  return s;
}

TimeDomainResult apply_u_time_domain(const Envelope& env, const TransformSpec& spec) {
  env.validate();
  const PhaseSchedule sched = phase_schedule(spec);
  // Preimage of [t_s, t_f] under t -> (T - t) / alpha is [t_i, t_s].
  const double lo = (spec.T - sched.t_f) / spec.alpha;
  const double hi = (spec.T - sched.t_s) / spec.alpha;
  const auto k_lo = static_cast<long>(std::ceil((lo - env.t0) / env.dt - kNodeTol));
  const auto k_hi = static_cast<long>(std::floor((hi - env.t0) / env.dt + kNodeTol));
  const long n = static_cast<long>(env.size());
  if (k_hi < k_lo || k_hi < 0 || k_lo > n - 1) {
    std::ostringstream msg;
    msg << "apply_u_time_domain: preimage window [" << lo << ", " << hi
        << "] does not overlap envelope support [" << env.t0 << ", " << env.t_end() << "]";
    throw std::invalid_argument(msg.str());
  }

  TimeDomainResult out;
  out.envelope.dt = spec.alpha * env.dt;
  out.envelope.t0 = spec.T - spec.alpha * env.time(0) - spec.alpha * env.dt * static_cast<double>(k_hi);
  const double amp = 1.0 / std::sqrt(spec.alpha);
  out.envelope.samples.reserve(static_cast<std::size_t>(k_hi - k_lo + 1));
  for (long k = k_hi; k >= k_lo; --k) {
    const double t = out.envelope.time(out.envelope.samples.size());
    Complex a = 0.0;
    if (k >= 0 && k < n) {
      a = env.samples[static_cast<std::size_t>(k)];
    } else {
      ++out.zero_filled;
    }
    out.envelope.samples.push_back(amp * std::polar(1.0, -spec.omega0 * (t - spec.T)) * a);
  }
  return out;
}

Spectrum to_spectrum(const Envelope& env, double nu_center) {
  env.validate();
  const std::size_t n = env.size();
  Spectrum s;
  s.dnu = 2.0 * std::numbers::pi / (static_cast<double>(n) * env.dt);
  s.nu0 = nu_center - static_cast<double>(n / 2) * s.dnu;
  s.t0 = env.t0;
  s.samples.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    s.samples[k] = env.samples[k] * std::polar(1.0, s.nu0 * env.dt * static_cast<double>(k));
  }
  fft(s.samples, Direction::Backward);
  const Complex origin = std::polar(env.dt * kInvSqrt2Pi, s.nu0 * env.t0);
  for (std::size_t m = 0; m < n; ++m) {
    s.samples[m] *= origin * std::polar(1.0, s.dnu * static_cast<double>(m) * env.t0);
  }
  return s;
}

Envelope to_envelope(const Spectrum& spec) {
  const std::size_t n = spec.size();
  if (n < 2 || !(spec.dnu > 0.0)) throw std::invalid_argument("to_envelope: invalid spectrum grid");
  Envelope e;
  e.dt = 2.0 * std::numbers::pi / (static_cast<double>(n) * spec.dnu);
  e.t0 = spec.t0;
  e.samples.resize(n);
  for (std::size_t m = 0; m < n; ++m) {
    e.samples[m] = spec.samples[m] * std::polar(1.0, -spec.dnu * static_cast<double>(m) * spec.t0);
  }
  fft(e.samples, Direction::Forward);
  const Complex origin = std::polar(spec.dnu * kInvSqrt2Pi, -spec.nu0 * spec.t0);
  for (std::size_t k = 0; k < n; ++k) {
    e.samples[k] *= origin * std::polar(1.0, -spec.nu0 * e.dt * static_cast<double>(k));
  }
  return e;
}

namespace {

Complex dtft(const Envelope& env, double nu) {
  Complex acc = 0.0;
  for (std::size_t k = 0; k < env.size(); ++k) {
    acc += env.samples[k] * std::polar(1.0, nu * env.time(k));
  }
  return acc * env.dt * kInvSqrt2Pi;
}

}  // namespace

Complex evaluate_spectrum(const Spectrum& spec, double nu) { return dtft(to_envelope(spec), nu); }

Spectrum apply_u_frequency_domain(const Spectrum& in, const TransformSpec& spec) {
  const auto diags = validate(spec);
  if (!diags.empty()) throw std::invalid_argument(diags.front());
  const std::size_t n = in.size();
  if (n < 2) throw std::invalid_argument("apply_u_frequency_domain: spectrum too short");
  const double dt_in = 2.0 * std::numbers::pi / (static_cast<double>(n) * in.dnu);

  Spectrum out;
  out.dnu = in.dnu / spec.alpha;
  out.nu0 = spec.omega0 - in.nu_end() / spec.alpha;
  out.t0 = spec.T - spec.alpha * (in.t0 + dt_in * static_cast<double>(n - 1));
  out.samples.resize(n);
  const double amp = std::sqrt(spec.alpha);
  for (std::size_t j = 0; j < n; ++j) {
    const double nu = out.frequency(j);
    out.samples[j] = amp * in.samples[n - 1 - j] * std::polar(1.0, nu * spec.T);
  }
  return out;
}

Spectrum apply_u_frequency_domain(const Spectrum& in, const TransformSpec& spec,
                                  const FrequencyGrid& target) {
  const auto diags = validate(spec);
  if (!diags.empty()) throw std::invalid_argument(diags.front());
  if (target.n < 2 || !(target.dnu > 0.0)) {
    throw std::invalid_argument("apply_u_frequency_domain: invalid target grid");
  }
  const double target_end = target.nu0 + target.dnu * static_cast<double>(target.n - 1);
  const double mu_a = -spec.alpha * (target.nu0 - spec.omega0);
  const double mu_b = -spec.alpha * (target_end - spec.omega0);
  const double need_lo = std::min(mu_a, mu_b), need_hi = std::max(mu_a, mu_b);
  const double slack = 1e-9 * in.dnu;
  if (need_lo < in.nu0 - slack || need_hi > in.nu_end() + slack) {
    std::ostringstream msg;
    msg << "apply_u_frequency_domain: remap requires input band [" << need_lo << ", " << need_hi
        << "] but the input covers [" << in.nu0 << ", " << in.nu_end() << "]";
    throw std::out_of_range(msg.str());
  }

  const Envelope companion = to_envelope(in);
  Spectrum out;
  out.nu0 = target.nu0;
  out.dnu = target.dnu;
  out.t0 = spec.T - spec.alpha * companion.t_end();
  out.samples.resize(target.n);
  const double amp = std::sqrt(spec.alpha);
  for (std::size_t j = 0; j < target.n; ++j) {
    const double nu = out.frequency(j);
    out.samples[j] =
        amp * dtft(companion, -spec.alpha * (nu - spec.omega0)) * std::polar(1.0, nu * spec.T);
  }
  return out;
}

const char* to_string(FieldPhase phase) {
  switch (phase) {
    case FieldPhase::Vacuum: return "VACUUM";
    case FieldPhase::Transformed: return "TRANSFORMED";
    case FieldPhase::Initial: return "INITIAL";
  }
  return "?";
}

double heaviside(double x) {
  if (x > 0.0) return 1.0;
  if (x < 0.0) return 0.0;
  return 0.5;
}

FieldSample assemble_piecewise_field(double x, double t, const Envelope& initial,
                                     const Envelope& transformed, const TransformSpec& spec,
                                     const PhaseSchedule& schedule) {
  if (x >= spec.X) {
    const double retarded = t - (x - spec.X) / spec.c;
    if (retarded > schedule.t_i && retarded < schedule.t_s) return {0.0, FieldPhase::Vacuum};
    if (retarded > schedule.t_s && retarded < schedule.t_f) {
      return {transformed.at(retarded), FieldPhase::Transformed};
    }
  }
  return {heaviside(x) * initial.at(t - x / spec.c), FieldPhase::Initial};
}

std::optional<double> time_map(double t, const TransformSpec& spec, const PhaseSchedule& schedule,
                               double tau) {
  if (t > schedule.t_i && t < schedule.t_s) return std::nullopt;
  if (t > schedule.t_s && t < schedule.t_f) return (spec.T - t) / spec.alpha - tau;
  return t - tau;
}

std::optional<double> time_map_inverse(double t, const TransformSpec& spec,
                                       const PhaseSchedule& schedule, double tau) {
  const double shifted = t + tau;
  if (shifted > schedule.t_i && shifted < schedule.t_s) return spec.T - spec.alpha * shifted;
  if (shifted > schedule.t_s && shifted < schedule.t_f) return std::nullopt;
  return shifted;
}

std::optional<double> time_map_slope(double t, const TransformSpec& spec,
                                     const PhaseSchedule& schedule) {
  if (t > schedule.t_i && t < schedule.t_s) return std::nullopt;
  if (t > schedule.t_s && t < schedule.t_f) return -1.0 / spec.alpha;
  return 1.0;
}

// ---------------------------------------------------------------------------
// Text I/O

namespace {

struct Record {
  double x, re, im;
};

std::vector<Record> read_records(std::istream& is, const char* axis,
                                 std::vector<std::string>* comments) {
  std::vector<Record> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (comments) comments->push_back(line);
      continue;
    }
    const auto fields = io::split_row(line);
    if (fields.size() != 3) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": expected 3 fields");
    }
    if (fields[0] == axis) continue;  // header row
    try {
      rows.push_back({io::parse_number(fields[0]), io::parse_number(fields[1]),
                      io::parse_number(fields[2])});
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (rows.size() < 2) throw std::invalid_argument("need at least 2 records");
  const double step = rows[1].x - rows[0].x;
  if (!(step > 0.0)) throw std::invalid_argument("grid must be increasing");
  for (std::size_t k = 2; k < rows.size(); ++k) {
    const double expect = rows[0].x + step * static_cast<double>(k);
    if (std::abs(rows[k].x - expect) > 1e-6 * step + 1e-12 * std::abs(expect)) {
      throw std::invalid_argument("grid is not uniform at record " + std::to_string(k));
    }
  }
  return rows;
}

}  // namespace

void write_envelope(std::ostream& os, const Envelope& env, const std::string& units) {
  os << "# envelope; units: " << units << "\n";
  os << "t,re,im\n";
  for (std::size_t k = 0; k < env.size(); ++k) {
    os << num(env.time(k)) << ',' << num(env.samples[k].real()) << ','
       << num(env.samples[k].imag()) << '\n';
  }
}

Envelope read_envelope(std::istream& is) {
  const auto rows = read_records(is, "t", nullptr);
  Envelope env;
  env.t0 = rows.front().x;
  env.dt = (rows.back().x - rows.front().x) / static_cast<double>(rows.size() - 1);
  env.samples.reserve(rows.size());
  for (const auto& r : rows) env.samples.emplace_back(r.re, r.im);
  return env;
}

void write_spectrum(std::ostream& os, const Spectrum& spec, const std::string& units) {
  os << "# spectrum; units: " << units << "\n";
  os << "# companion_t0=" << num(spec.t0) << "\n";
  os << "nu,re,im\n";
  for (std::size_t k = 0; k < spec.size(); ++k) {
    os << num(spec.frequency(k)) << ',' << num(spec.samples[k].real()) << ','
       << num(spec.samples[k].imag()) << '\n';
  }
}

Spectrum read_spectrum(std::istream& is) {
  std::vector<std::string> comments;
  const auto rows = read_records(is, "nu", &comments);
  Spectrum spec;
  spec.nu0 = rows.front().x;
  spec.dnu = (rows.back().x - rows.front().x) / static_cast<double>(rows.size() - 1);
  for (const auto& c : comments) {
    const auto pos = c.find("companion_t0=");
    if (pos != std::string::npos) spec.t0 = io::parse_number(c.substr(pos + 13));
  }
  spec.samples.reserve(rows.size());
  for (const auto& r : rows) spec.samples.emplace_back(r.re, r.im);
  return spec;
}

}  // namespace cqs::wavepacket
