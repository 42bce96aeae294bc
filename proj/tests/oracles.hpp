#pragma once

// Closed-form reference solutions, written out independently of the library.

#include <cmath>
#include <complex>

namespace oracle {

using C = std::complex<double>;

// <sigma^-(t)> of a lone emitter in the rotating frame.
inline C decay_coherence(C s0, double gamma, double t) { return s0 * std::exp(-0.5 * gamma * t); }

// c2(t) for two resonant emitters with rates g1 != g2 excited from |e,g>.
// dc1/dt = -g1/2 c1, dc2/dt = -g2/2 c2 - sqrt(g1 g2) c1.
inline C cascade_c2(double g1, double g2, double t) {
  const double k = std::sqrt(g1 * g2);
  if (std::abs(g1 - g2) < 1e-12) return -k * t * std::exp(-0.5 * g1 * t);
  return -k * (std::exp(-0.5 * g1 * t) - std::exp(-0.5 * g2 * t)) / (0.5 * (g2 - g1));
}

// The peak 4/e^2 of |c2|^2 for equal rates, reached at t = 2/gamma.
inline double cascade_peak() { return 4.0 * std::exp(-2.0); }

// Fidelity of a|g> + b|e> through amplitude damping with transmission p,
// averaged over nothing (fixed input), phase corrected:
// rho_out = [[|a|^2 + |b|^2 (1-p), a b* sqrt(p)], [a* b sqrt(p), |b|^2 p]].
inline double damping_fidelity(double p, double b2) {
  const double a2 = 1.0 - b2;
  return a2 * (a2 + b2 * (1.0 - p)) + b2 * b2 * p + 2.0 * a2 * b2 * std::sqrt(p);
}

}  // namespace oracle
