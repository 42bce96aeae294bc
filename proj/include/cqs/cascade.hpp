#pragma once

#include "cqs/hilbert.hpp"
#include "cqs/wavepacket.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cqs::cascade {

/// Two two-level systems coupled unidirectionally through a chiral channel.
/// The composite basis is system 1 (left) x system 2 (right).
struct CascadeModel {
  double gamma1 = 1.0;
  double gamma2 = 1.0;
  double omega1 = 0.0;
  double omega2 = 0.0;
  double tau = 0.0;  // propagation delay from system 1 to system 2
  Complex beta = 0.0;  // coherent input amplitude, rotating-frame constant
  bool rotating_frame = true;

  /// Frequencies entering H_sys: zero in the rotating frame.
  double frame_omega1() const { return rotating_frame ? 0.0 : omega1; }
  double frame_omega2() const { return rotating_frame ? 0.0 : omega2; }
};

/// Throws std::invalid_argument naming the violated field.
void validate(const CascadeModel& model);

/// Thrown when the integrator leaves its accuracy envelope.
class IntegratorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Composite-space operators for the two-level cascade.
struct CompositeOps {
  Operator lower1, lower2;
  Operator raise1, raise2;
  Operator z1, z2;
  Operator excited1, excited2;  // sigma^+ sigma^- projectors
  Operator identity;
};
const CompositeOps& composite_ops();

// Composite basis indices, (system 1, system 2).
inline constexpr Eigen::Index kEE = 0;
inline constexpr Eigen::Index kEG = 1;
inline constexpr Eigen::Index kGE = 2;
inline constexpr Eigen::Index kGG = 3;

/// |psi1> x |psi2> from excited-state amplitudes.
StateVector product_state(Complex c1, Complex c2 = 0.0);

Operator build_h_sys(const CascadeModel& model);
/// J = sqrt(g1) s1^- + sqrt(g2) s2^- + beta
Operator build_jump_operator(const CascadeModel& model);
Operator build_h_ex(const CascadeModel& model);
/// H0 = H_sys + H_ex
Operator build_h0(const CascadeModel& model);
/// H_eff = H0 - (i/2) J^dagger J
Operator build_h_eff(const CascadeModel& model);

/// d rho / dt = i[rho, H0] + J rho J^dagger - {rho, J^dagger J} / 2
DensityMatrix lindblad_rhs(const DensityMatrix& rho, const Operator& h0, const Operator& jump);
DensityMatrix lindblad_rhs(const DensityMatrix& rho, const CascadeModel& model);

struct TwoClockState {
  double t = 0.0;
  /// Fictitious system-1 time f(t); empty while the device buffers.
  std::optional<double> tilde_t;
  DensityMatrix rho;
};

struct TimeSpan {
  double t0 = 0.0;
  double t1 = 1.0;
};

struct MasterOptions {
  /// Optional transform; without one, tilde_t = t - tau.
  std::optional<wavepacket::TransformSpec> transform;
  /// Emit every `stride`-th step (the final step is always emitted).
  std::size_t stride = 1;
  double trace_tolerance = 1e-6;
};

/// Fixed-step RK4 on the tau-free master equation. Each emitted state is
/// re-Hermitized and trace-checked; throws IntegratorError on trace drift.
std::vector<TwoClockState> integrate_master(const DensityMatrix& rho0, const CascadeModel& model,
                                            TimeSpan span, double dt,
                                            const MasterOptions& options = {});

/// One output record per emitted state.
struct Observables {
  double t = 0.0;
  std::optional<double> tilde_t;
  double p1 = 0.0;
  double p2 = 0.0;
  Complex sigma1;
  Complex sigma2;
};
Observables observe(const TwoClockState& state);

struct ConsistencyReport {
  double max_deviation = 0.0;
  double max_deviation_sigma1 = 0.0;
  double max_deviation_sigma2 = 0.0;
  std::size_t samples = 0;
};

/// Compares master-equation <sigma_j^-> with the single-excitation
/// expectation-value equations, which are solved exactly with the matrix
/// exponential of the affine linear system.
ConsistencyReport heisenberg_consistency(const DensityMatrix& rho0, const CascadeModel& model,
                                         TimeSpan span, double dt);

}  // namespace cqs::cascade
