#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace cqs::wavepacket {

using Complex = std::complex<double>;

/// Uniformly sampled complex amplitude in time. Photon-flux amplitudes carry
/// units of sqrt(1/time).
struct Envelope {
  double t0 = 0.0;
  double dt = 1.0;
  std::vector<Complex> samples;

  std::size_t size() const { return samples.size(); }
  double time(std::size_t k) const { return t0 + dt * static_cast<double>(k); }
  double t_end() const { return time(samples.size() - 1); }

  /// Four-point Lagrange interpolation inside [t0, t_end], zero outside.
  /// Exact at grid nodes.
  Complex at(double t) const;

  /// Sum |a|^2 dt.
  double squared_norm() const;

  /// Same samples with the time origin moved by `shift`.
  Envelope shifted(double shift) const;

  /// Throws std::invalid_argument unless len >= 2 and dt > 0.
  void validate() const;
};

/// Uniformly sampled complex amplitude in angular frequency. `t0` is the time
/// origin of the companion Envelope grid, needed for band-limited resampling.
struct Spectrum {
  double nu0 = 0.0;
  double dnu = 1.0;
  double t0 = 0.0;
  std::vector<Complex> samples;

  std::size_t size() const { return samples.size(); }
  double frequency(std::size_t k) const { return nu0 + dnu * static_cast<double>(k); }
  double nu_end() const { return frequency(samples.size() - 1); }

  /// Sum |f|^2 dnu.
  double squared_norm() const;
};

/// Parameters of the unitary that time-reverses, stretches by alpha and
/// frequency-shifts the propagating packet.
struct TransformSpec {
  double alpha = 1.0;   // stretch factor, > 0
  double omega0 = 0.0;  // frequency offset
  double T = 0.0;       // timing parameter, t_s = T / (1 + alpha)
  double Delta = 1.0;   // integration time of the device, > 0
  double X = 0.0;       // device position, 0 < X < c tau
  double c = 1.0;       // propagation speed
};

/// Returns every violated TransformSpec invariant. `tau` enables the device
/// position check.
std::vector<std::string> validate(const TransformSpec& spec, std::optional<double> tau = {});

struct PhaseSchedule {
  double t_i = 0.0;  // first transformed input enters the device
  double t_s = 0.0;  // transformed output starts
  double t_f = 0.0;  // transformed output ends
  double t_a = 0.0;  // a length c Delta of the packet has arrived at X
};

struct TransformParams {
  double alpha = 1.0;
  double omega0 = 0.0;
};

/// alpha = gamma1 / gamma2, omega0 = omega2 + omega1 / alpha.
TransformParams derive_transform_params(double gamma1, double gamma2, double omega1,
                                        double omega2);

/// Spec whose phase-3 output matches system 2's time-reversed emission, with
/// T = (1 + alpha) t_a.
TransformSpec matched_transform(double gamma1, double gamma2, double omega1, double omega2,
                                double Delta, double X, double c = 1.0);

PhaseSchedule phase_schedule(const TransformSpec& spec);

struct TimeDomainResult {
  Envelope envelope;
  /// Output samples whose preimage lay outside the input support (zero-filled).
  std::size_t zero_filled = 0;
};

/// out(t) = alpha^{-1/2} e^{-i omega0 (t - T)} env((T - t) / alpha) on [t_s, t_f].
///
/// The output grid is the image of the input grid, so its spacing is
/// alpha * env.dt and the discrete squared norm is preserved exactly over
/// the preimage window [t_i, t_s].
TimeDomainResult apply_u_time_domain(const Envelope& env, const TransformSpec& spec);

/// Forward DFT with kernel e^{+i nu t} and 1/sqrt(2 pi) normalization,
/// F(nu_m) = dt / sqrt(2 pi) sum_k a_k e^{i nu_m t_k}. The frequency grid has
/// spacing 2 pi / (N dt) and is centered on `nu_center`.
Spectrum to_spectrum(const Envelope& env, double nu_center = 0.0);

/// Exact inverse of to_spectrum on the companion grid (t0 = spec.t0).
Envelope to_envelope(const Spectrum& spec);

/// Band-limited evaluation of the spectrum at arbitrary frequency, i.e. the
/// DTFT of the companion time samples.
Complex evaluate_spectrum(const Spectrum& spec, double nu);

/// f~(nu) = sqrt(alpha) f(-alpha (nu - omega0)) e^{i nu T} on the image grid
/// (spacing dnu / alpha), no interpolation required.
Spectrum apply_u_frequency_domain(const Spectrum& in, const TransformSpec& spec);

struct FrequencyGrid {
  double nu0 = 0.0;
  double dnu = 1.0;
  std::size_t n = 0;
};

/// Same map sampled on a caller-chosen grid using band-limited interpolation.
/// Throws std::out_of_range naming the required input band when a remapped
/// frequency falls outside the input grid.
Spectrum apply_u_frequency_domain(const Spectrum& in, const TransformSpec& spec,
                                  const FrequencyGrid& target);

enum class FieldPhase { Vacuum, Transformed, Initial };

const char* to_string(FieldPhase phase);

struct FieldSample {
  Complex value;
  FieldPhase phase;
};

/// Heaviside step with u(0) = 1/2.
double heaviside(double x);

/// Field radiated by system 1 at (x, t). `initial` is sqrt(gamma1) <sigma1^-(s)>
/// in emission time s; `transformed` is the device output at x = X in lab time.
FieldSample assemble_piecewise_field(double x, double t, const Envelope& initial,
                                     const Envelope& transformed, const TransformSpec& spec,
                                     const PhaseSchedule& schedule);

/// f(t): the fictitious time argument of system 1. Empty on (t_i, t_s).
std::optional<double> time_map(double t, const TransformSpec& spec,
                               const PhaseSchedule& schedule, double tau);
std::optional<double> time_map_inverse(double t, const TransformSpec& spec,
                                       const PhaseSchedule& schedule, double tau);
/// df/dt on the branch containing t; empty where f is undefined.
std::optional<double> time_map_slope(double t, const TransformSpec& spec,
                                     const PhaseSchedule& schedule);

// Text I/O. Records are `t,re,im` (or `nu,re,im`), `#` lines are comments.
void write_envelope(std::ostream& os, const Envelope& env, const std::string& units);
Envelope read_envelope(std::istream& is);
void write_spectrum(std::ostream& os, const Spectrum& spec, const std::string& units);
Spectrum read_spectrum(std::istream& is);

}  // namespace cqs::wavepacket
