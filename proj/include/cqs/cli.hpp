#pragma once

#include "cqs/cascade.hpp"
#include "cqs/wavepacket.hpp"

#include <cmath>
#include <cstdint>
#include <exception>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace cqs::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitInvalidConfig = 2;
inline constexpr int kExitIntegrator = 3;

inline const std::vector<std::string>& experiments() {
  static const std::vector<std::string> names{"decay",     "lindblad", "trajectories", "transform",
                                              "phases",    "timemap",  "transfer"};
  return names;
}

struct Numerics {
  double dt = 1e-3;
  double t0 = 0.0;
  double t1 = 10.0;
  std::size_t n_traj = 1000;
  std::uint64_t seed = 1;
  unsigned workers = 0;
  std::size_t stride = 1;  // CSV row decimation
};

struct RunConfig {
  std::string experiment;
  cascade::CascadeModel model;
  std::optional<wavepacket::TransformSpec> transform;
  /// Derive alpha, omega0 and T from the model (T = (1 + alpha) t_a).
  bool matched = false;
  Complex initial_c1 = 1.0;  // excited amplitude of system 1
  Complex initial_c2 = 0.0;
  Numerics numerics;
  std::string output_dir = ".";
  bool emit_svg = false;
  std::vector<double> snapshot_times;  // phases; empty picks one per phase
  double dx = 0.1;                     // phases
  Complex qubit_b = Complex(1.0 / std::sqrt(2.0), 0.0);  // transfer fidelity
};

struct Diagnostic {
  std::string field;
  std::string message;
};

std::string to_string(const Diagnostic& d);

struct ParseResult {
  RunConfig config;
  std::vector<Diagnostic> diagnostics;
};

/// Parses the JSON config dialect. Structural problems (wrong types, unknown
/// keys) come back as diagnostics naming the field.
ParseResult parse_config(const std::string& text);

/// Every violated precondition, without running anything.
std::vector<Diagnostic> validate(const RunConfig& config);

/// Resolved config (defaults filled, matched transform derived) as one-line
/// JSON; parse_config(to_json(c)) reproduces c.
std::string to_json(const RunConfig& config);

/// Applies the matched-transform derivation if requested.
RunConfig resolve(RunConfig config);

/// Runs the experiment and writes `<experiment>.csv` (and `.svg`) under the
/// output directory. Returns an exit status.
int run(const RunConfig& config, std::ostream& log);

/// run() without validation; throws whatever the experiment throws.
void run_unchecked(const RunConfig& config, std::ostream& log);

/// Exit status for an exception escaping an experiment (integrator abort
/// maps to 3, argument errors to 2, anything else to 1).
int exit_code(std::exception_ptr error, std::ostream& log);

/// Full command-line entry point.
int main(int argc, char** argv);

}  // namespace cqs::cli
