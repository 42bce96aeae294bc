#include "cqs/cli.hpp"

#include "cqs/cascade.hpp"
#include "cqs/io.hpp"
#include "cqs/svg.hpp"
#include "cqs/trajectory.hpp"
#include "cqs/transfer.hpp"
#include "cqs/wavepacket.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

namespace cqs::cli {

namespace fs = std::filesystem;
using io::format_number;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Output scaling to natural units: time in 1/gamma1, length in c/gamma1,
// field amplitude in sqrt(gamma1).
struct Units {
  double time = 1.0;
  double length = 1.0;
  double amplitude = 1.0;
  double frequency = 1.0;

  explicit Units(const RunConfig& c) {
    const double g = c.model.gamma1;
    const double speed = c.transform ? c.transform->c : 1.0;
    time = g;
    length = g / speed;
    amplitude = 1.0 / std::sqrt(g);
    frequency = 1.0 / g;
  }

  std::string describe(const RunConfig& c) const {
    return "time in 1/gamma1 (t_out = t * " + format_number(time) + "), length in c/gamma1 (x_out = x * " +
           format_number(length) + "), field amplitude in sqrt(gamma1) (A_out = A * " +
           format_number(amplitude) + "), gamma1 = " + format_number(c.model.gamma1);
  }
};

std::string cell(double v) { return std::isnan(v) ? std::string() : format_number(v); }
std::string cell(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

class Table {
 public:
  explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void comment(const std::string& line) { comments_.push_back(line); }
  void row(std::vector<std::string> fields) { rows_.push_back(std::move(fields)); }

  std::vector<double> column(std::size_t index) const {
    std::vector<double> out;
    out.reserve(rows_.size());
    for (const auto& r : rows_) out.push_back(r[index].empty() ? kNaN : io::parse_number(r[index]));
    return out;
  }

  void write(const fs::path& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    for (const auto& c : comments_) os << "# " << c << '\n';
    os << io::join_row(columns_) << '\n';
    for (const auto& r : rows_) os << io::join_row(r) << '\n';
  }

 private:
  std::vector<std::string> columns_;
  std::vector<std::string> comments_;
  std::vector<std::vector<std::string>> rows_;
};

struct Context {
  const RunConfig& config;
  Units units;
  fs::path dir;
  std::ostream& log;
  std::vector<fs::path> written;

  Table table(std::vector<std::string> columns) const {
    Table t(std::move(columns));
    t.comment("cqs experiment: " + config.experiment);
    t.comment("units: " + units.describe(config));
    t.comment("config: " + to_json(config));
    return t;
  }

  void save(const Table& t, const std::string& name) {
    const fs::path p = dir / name;
    t.write(p);
    written.push_back(p);
  }

  void plot(const std::string& name, const svg::PlotSpec& spec, const std::vector<svg::Series>& s) {
    if (!config.emit_svg) return;
    const fs::path p = dir / name;
    std::ofstream os(p, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    os << svg::render(spec, s);
    written.push_back(p);
  }
};

std::string schedule_line(const wavepacket::PhaseSchedule& s, double tu) {
  return "schedule: t_i=" + format_number(s.t_i * tu) + ",t_s=" + format_number(s.t_s * tu) +
         ",t_f=" + format_number(s.t_f * tu) + ",t_a=" + format_number(s.t_a * tu);
}

wavepacket::Envelope scaled(const wavepacket::Envelope& env, const Units& u) {
  wavepacket::Envelope out = env;
  out.t0 *= u.time;
  out.dt *= u.time;
  for (auto& a : out.samples) a *= u.amplitude;
  return out;
}

cascade::TimeSpan span(const Numerics& n) { return {n.t0, n.t1}; }

void run_decay(Context& ctx) {
  const auto& c = ctx.config;
  const DensityMatrix rho0 = hilbert::projector(cascade::product_state(c.initial_c1, 0.0));
  cascade::MasterOptions opt;
  opt.stride = c.numerics.stride;
  const auto states = cascade::integrate_master(rho0, c.model, span(c.numerics), c.numerics.dt, opt);
  const Complex s1_0 = cascade::observe(states.front()).sigma1;
  const bool has_coherence = std::abs(s1_0) > 1e-14;
  const double pe0 = std::norm(c.initial_c1);

  Table t = ctx.table({"t [1/gamma1]", "P1 [1]", "re_sigma1 [1]", "im_sigma1 [1]",
                       "sigma1_ratio_re [1]", "sigma1_ratio_im [1]", "P1_exact [1]", "P2 [1]"});
  for (const auto& st : states) {
    const auto o = cascade::observe(st);
    const Complex ratio = has_coherence ? o.sigma1 / s1_0 : Complex(kNaN, kNaN);
    t.row({cell(o.t * ctx.units.time), cell(o.p1), cell(o.sigma1.real()), cell(o.sigma1.imag()),
           cell(ratio.real()), cell(ratio.imag()), cell(pe0 * std::exp(-c.model.gamma1 * o.t)),
           cell(o.p2)});
  }
  ctx.save(t, "decay.csv");
  ctx.plot("decay.svg", {"System 1 decay", "t [1/gamma1]", "population"},
           {{"P1", t.column(0), t.column(1)}, {"P1 exact", t.column(0), t.column(6)},
            {"Re <s1->/<s1-(0)>", t.column(0), t.column(4)}});
}

void run_lindblad(Context& ctx) {
  const auto& c = ctx.config;
  const DensityMatrix rho0 =
      hilbert::projector(cascade::product_state(c.initial_c1, c.initial_c2));
  cascade::MasterOptions opt;
  opt.stride = c.numerics.stride;
  opt.transform = c.transform;
  const auto states = cascade::integrate_master(rho0, c.model, span(c.numerics), c.numerics.dt, opt);
  Table t = ctx.table({"t [1/gamma1]", "tilde_t [1/gamma1]", "P1 [1]", "P2 [1]", "re_sigma1 [1]",
                       "im_sigma1 [1]", "re_sigma2 [1]", "im_sigma2 [1]", "trace [1]",
                       "min_eig [1]"});
  const double tu = ctx.units.time;
  for (const auto& st : states) {
    const auto o = cascade::observe(st);
    t.row({cell(o.t * tu), o.tilde_t ? cell(*o.tilde_t * tu) : std::string(), cell(o.p1),
           cell(o.p2), cell(o.sigma1.real()), cell(o.sigma1.imag()), cell(o.sigma2.real()),
           cell(o.sigma2.imag()), cell(st.rho.trace().real()),
           cell(hilbert::min_eigenvalue(st.rho))});
  }
  ctx.save(t, "lindblad.csv");
  ctx.plot("lindblad.svg", {"Cascaded master equation", "t [1/gamma1]", "population"},
           {{"P1", t.column(0), t.column(2)}, {"P2", t.column(0), t.column(3)}});
}

void run_trajectories(Context& ctx) {
  const auto& c = ctx.config;
  const StateVector psi0 = cascade::product_state(c.initial_c1, c.initial_c2);
  trajectory::TrajectoryConfig cfg;
  cfg.dt = c.numerics.dt;
  cfg.n_traj = c.numerics.n_traj;
  cfg.seed = c.numerics.seed;
  cfg.t_span = span(c.numerics);
  cfg.workers = c.numerics.workers;
  const auto ens = trajectory::ensemble_average(psi0, c.model, cfg);
  const auto me = cascade::integrate_master(hilbert::projector(psi0), c.model, cfg.t_span, cfg.dt);

  Table t = ctx.table({"t [1/gamma1]", "P1 [1]", "P2 [1]", "sem_P2 [1]", "P2_master [1]"});
  double max_dev = 0.0;
  for (std::size_t k = 0; k < ens.t.size(); ++k) {
    const double p2_me = cascade::observe(me[k]).p2;
    max_dev = std::max(max_dev, std::abs(ens.p2[k] - p2_me));
    if (k % c.numerics.stride != 0 && k + 1 != ens.t.size()) continue;
    t.row({cell(ens.t[k] * ctx.units.time), cell(ens.p1[k]), cell(ens.p2[k]), cell(ens.sem_p2[k]),
           cell(p2_me)});
  }
  t.comment("n_traj: " + std::to_string(ens.n_traj) + ", mean_jumps: " +
            format_number(ens.mean_jumps) + ", max_abs_dev_P2: " + format_number(max_dev));
  ctx.save(t, "trajectories.csv");

  constexpr std::size_t kBins = 50;
  const double width = (cfg.t_span.t1 - cfg.t_span.t0) / kBins;
  std::vector<std::size_t> counts(kBins, 0);
  for (double tj : ens.jump_times) {
    const auto b = static_cast<std::size_t>(std::clamp((tj - cfg.t_span.t0) / width, 0.0, kBins - 1.0));
    ++counts[b];
  }
  Table h = ctx.table({"bin_lo [1/gamma1]", "bin_hi [1/gamma1]", "count"});
  for (std::size_t b = 0; b < kBins; ++b) {
    const double lo = cfg.t_span.t0 + width * static_cast<double>(b);
    h.row({cell(lo * ctx.units.time), cell((lo + width) * ctx.units.time), std::to_string(counts[b])});
  }
  ctx.save(h, "trajectories_jumps.csv");
  ctx.plot("trajectories.svg", {"Quantum trajectories vs master equation", "t [1/gamma1]", "population"},
           {{"P1 (MC)", t.column(0), t.column(1)}, {"P2 (MC)", t.column(0), t.column(2)},
            {"P2 (master)", t.column(0), t.column(4)}});
}

wavepacket::Envelope window_of(const wavepacket::Envelope& env, double lo, double hi) {
  wavepacket::Envelope w;
  w.dt = env.dt;
  bool started = false;
  for (std::size_t k = 0; k < env.size(); ++k) {
    const double t = env.time(k);
    if (t < lo - 1e-9 * env.dt || t > hi + 1e-9 * env.dt) continue;
    if (!started) w.t0 = t, started = true;
    w.samples.push_back(env.samples[k]);
  }
  return w;
}

void run_transform(Context& ctx) {
  const auto& c = ctx.config;
  const auto& spec = *c.transform;
  const auto sched = wavepacket::phase_schedule(spec);
  const auto grid = transfer::TimeGrid::span(c.numerics.t0, c.numerics.t1, c.numerics.dt);
  const auto emitted = transfer::emit_envelope(c.model.gamma1, c.model.omega1, c.initial_c1, grid,
                                               c.model.rotating_frame);
  const auto at_device = emitted.shifted(spec.X / spec.c);
  const auto window = window_of(at_device, sched.t_i, sched.t_s);
  const auto out = wavepacket::apply_u_time_domain(window, spec);

  const auto spectrum_in = wavepacket::to_spectrum(window);
  const auto spectrum_out = wavepacket::apply_u_frequency_domain(spectrum_in, spec);
  const auto via_dft = wavepacket::to_envelope(spectrum_out);
  double diff = 0.0, ref = 0.0;
  for (std::size_t k = 0; k < out.envelope.size(); ++k) {
    diff += std::norm(via_dft.samples[k] - out.envelope.samples[k]);
    ref += std::norm(out.envelope.samples[k]);
  }

  const Units& u = ctx.units;
  Table t = ctx.table({"t [1/gamma1]", "re [sqrt(gamma1)]", "im [sqrt(gamma1)]", "abs [sqrt(gamma1)]"});
  t.comment(schedule_line(sched, u.time));
  t.comment("norm_in_window: " + format_number(window.squared_norm()) + ", norm_out: " +
            format_number(out.envelope.squared_norm()) + ", norm_out_dft: " +
            format_number(spectrum_out.squared_norm()) + ", rel_l2_time_vs_dft: " +
            format_number(ref > 0.0 ? std::sqrt(diff / ref) : 0.0) +
            ", zero_filled: " + std::to_string(out.zero_filled));
  for (std::size_t k = 0; k < out.envelope.size(); ++k) {
    const Complex a = out.envelope.samples[k] * u.amplitude;
    t.row({cell(out.envelope.time(k) * u.time), cell(a.real()), cell(a.imag()), cell(std::abs(a))});
  }
  ctx.save(t, "transform.csv");

  const std::string env_units = "t [1/gamma1], amplitude [sqrt(gamma1)]";
  {
    std::ofstream os(ctx.dir / "transform_input.csv", std::ios::binary);
    wavepacket::write_envelope(os, scaled(at_device, u), env_units);
    ctx.written.push_back(ctx.dir / "transform_input.csv");
  }
  {
    wavepacket::Spectrum s = spectrum_out;
    s.nu0 *= u.frequency;
    s.dnu *= u.frequency;
    s.t0 *= u.time;
    const double amp = u.amplitude / std::sqrt(u.frequency);  // spectral density scaling
    for (auto& a : s.samples) a *= amp;
    std::ofstream os(ctx.dir / "transform_spectrum.csv", std::ios::binary);
    wavepacket::write_spectrum(os, s, "nu [gamma1], amplitude [1]");
    ctx.written.push_back(ctx.dir / "transform_spectrum.csv");
  }

  std::vector<double> tin, ain;
  for (std::size_t k = 0; k < at_device.size(); ++k) {
    tin.push_back(at_device.time(k) * u.time);
    ain.push_back(std::abs(at_device.samples[k]) * u.amplitude);
  }
  ctx.plot("transform.svg", {"Transformed wave packet at the device", "t [1/gamma1]", "|A+|"},
           {{"input", tin, ain}, {"output", t.column(0), t.column(3)}});
}

void run_phases(Context& ctx) {
  const auto& c = ctx.config;
  const auto& spec = *c.transform;
  const auto sched = wavepacket::phase_schedule(spec);
  std::vector<double> times = c.snapshot_times;
  if (times.empty()) {
    times = {0.5 * sched.t_i, 0.5 * (sched.t_i + sched.t_s), 0.5 * (sched.t_s + sched.t_f),
             sched.t_f + spec.Delta};
  }
  const double t_max = *std::max_element(times.begin(), times.end());
  const auto grid = transfer::TimeGrid::span(0.0, std::max(t_max, sched.t_s) + c.numerics.dt,
                                             c.numerics.dt);
  const auto emitted = transfer::emit_envelope(c.model.gamma1, c.model.omega1, c.initial_c1, grid,
                                               c.model.rotating_frame);
  const auto transformed = wavepacket::apply_u_time_domain(emitted.shifted(spec.X / spec.c), spec);

  const Units& u = ctx.units;
  Table t = ctx.table({"t [1/gamma1]", "x [c/gamma1]", "abs_A [sqrt(gamma1)<s1-(0)>]",
                       "re_A [sqrt(gamma1)<s1-(0)>]", "im_A [sqrt(gamma1)<s1-(0)>]", "phase"});
  t.comment(schedule_line(sched, u.time));
  auto phase_of = [&](double tt) {
    if (tt <= sched.t_i) return 1;
    if (tt <= sched.t_s) return 2;
    if (tt <= sched.t_f) return 3;
    return 4;
  };
  std::vector<svg::Series> series;
  const double norm = 1.0 / (std::sqrt(c.model.gamma1) * (std::abs(c.initial_c1) > 0 ? std::abs(c.initial_c1) : 1.0));
  for (double tt : times) {
    t.comment("snapshot t=" + format_number(tt * u.time) + " phase=" + std::to_string(phase_of(tt)));
    const double x_max = spec.c * tt;
    const auto nx = static_cast<std::size_t>(std::floor(x_max / c.dx + 1e-9));
    svg::Series s{"t=" + format_number(tt * u.time), {}, {}};
    for (std::size_t i = 0; i <= nx; ++i) {
      const double x = c.dx * static_cast<double>(i);
      const auto f = wavepacket::assemble_piecewise_field(x, tt, emitted, transformed.envelope, spec, sched);
      const Complex a = f.value * norm;
      t.row({cell(tt * u.time), cell(x * u.length), cell(std::abs(a)), cell(a.real()), cell(a.imag()),
             wavepacket::to_string(f.phase)});
      s.x.push_back(x * u.length);
      s.y.push_back(std::abs(a));
    }
    series.push_back(std::move(s));
  }
  ctx.save(t, "phases.csv");
  ctx.plot("phases.svg", {"Transformation phases", "x [c/gamma1]", "|A+|"}, series);
}

void run_timemap(Context& ctx) {
  const auto& c = ctx.config;
  const auto& spec = *c.transform;
  const auto sched = wavepacket::phase_schedule(spec);
  const double tau = c.model.tau;
  const auto grid = transfer::TimeGrid::span(c.numerics.t0, c.numerics.t1, c.numerics.dt);
  const Units& u = ctx.units;
  Table t = ctx.table({"t [1/gamma1]", "f [1/gamma1]", "slope [1]", "f_inverse [1/gamma1]"});
  t.comment(schedule_line(sched, u.time));
  t.comment("horizontal_gap: " + format_number((sched.t_s - sched.t_i) * u.time) +
            ", vertical_gap: " + format_number((sched.t_f - sched.t_s) * u.time) +
            ", tau: " + format_number(tau * u.time));
  for (std::size_t k = 0; k < grid.n; ++k) {
    const double tt = grid.time(k);
    const auto f = wavepacket::time_map(tt, spec, sched, tau);
    const auto slope = wavepacket::time_map_slope(tt, spec, sched);
    const auto finv = wavepacket::time_map_inverse(tt, spec, sched, tau);
    t.row({cell(tt * u.time), f ? cell(*f * u.time) : std::string(), cell(slope),
           finv ? cell(*finv * u.time) : std::string()});
  }
  ctx.save(t, "timemap.csv");
  ctx.plot("timemap.svg", {"Time map of system 1", "t [1/gamma1]", "f(t), f^-1(t)"},
           {{"f", t.column(0), t.column(1)}, {"f^-1", t.column(0), t.column(3)}});
}

void run_transfer(Context& ctx) {
  const auto& c = ctx.config;
  const auto grid = transfer::TimeGrid::span(c.numerics.t0, c.numerics.t1, c.numerics.dt);
  transfer::TransferOptions opt;
  opt.qubit_b = c.qubit_b;
  const auto cmp = transfer::transfer_experiment(c.model, c.transform, grid, opt);
  const Units& u = ctx.units;

  std::vector<std::string> cols{"t [1/gamma1]", "P2_off [1]"};
  if (cmp.on) cols.push_back("P2_on [1]");
  Table t = ctx.table(cols);
  auto summary = [&](const char* name, const transfer::TransferResult& r) {
    t.comment(std::string("result ") + name + ": p2_max=" + format_number(r.p2_max) +
              ", t_at_max=" + format_number(r.t_at_max * u.time) +
              ", fidelity=" + format_number(r.fidelity));
  };
  summary("off", cmp.off);
  if (cmp.on) {
    summary("on", *cmp.on);
    t.comment("ratio_on_off: " + format_number(cmp.ratio));
    t.comment(schedule_line(wavepacket::phase_schedule(*c.transform), u.time));
  }
  t.comment("fidelity metric: amplitude-damping overlap for a|g>+b|e>, |b|^2=" +
            format_number(std::norm(c.qubit_b)));
  for (std::size_t k = 0; k < grid.n; k += c.numerics.stride) {
    std::vector<std::string> r{cell(grid.time(k) * u.time), cell(cmp.off.p2[k])};
    if (cmp.on) r.push_back(cell(cmp.on->p2[k]));
    t.row(std::move(r));
  }
  ctx.save(t, "transfer.csv");
  std::vector<svg::Series> s{{"P2 (no transform)", t.column(0), t.column(1)}};
  if (cmp.on) s.push_back({"P2 (transform)", t.column(0), t.column(2)});
  ctx.plot("transfer.svg", {"Excitation of system 2", "t [1/gamma1]", "P2"}, s);
}

}  // namespace

int run(const RunConfig& raw, std::ostream& log) {
  const auto diags = validate(raw);
  if (!diags.empty()) {
    for (const auto& d : diags) log << "invalid config: " << to_string(d) << '\n';
    return kExitInvalidConfig;
  }
  const RunConfig config = resolve(raw);
  try {
    run_unchecked(config, log);
  } catch (...) {
    return exit_code(std::current_exception(), log);
  }
  return kExitOk;
}

void run_unchecked(const RunConfig& config, std::ostream& log) {
  fs::create_directories(config.output_dir);
  Context ctx{config, Units(config), fs::path(config.output_dir), log, {}};
  const auto& e = config.experiment;
  if (e == "decay") run_decay(ctx);
  else if (e == "lindblad") run_lindblad(ctx);
  else if (e == "trajectories") run_trajectories(ctx);
  else if (e == "transform") run_transform(ctx);
  else if (e == "phases") run_phases(ctx);
  else if (e == "timemap") run_timemap(ctx);
  else if (e == "transfer") run_transfer(ctx);
  else throw std::invalid_argument("experiment: unknown '" + e + "'");
  for (const auto& p : ctx.written) log << "wrote " << p.string() << '\n';
}

int exit_code(std::exception_ptr error, std::ostream& log) {
  try {
    std::rethrow_exception(error);
  } catch (const cascade::IntegratorError& e) {
    log << "integrator abort: " << e.what() << '\n';
    return kExitIntegrator;
  } catch (const std::invalid_argument& e) {
    log << "invalid config: " << e.what() << '\n';
    return kExitInvalidConfig;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
  }
  return kExitFailure;
}

int main(int argc, char** argv) {
  CLI::App app{"Cascaded quantum systems with wave-packet time reversal"};
  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  bool svg = false;
  bool validate_only = false;
  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--out", out_dir, "Output directory (overrides output.dir)");
  app.add_flag("--svg", svg, "Also write SVG plots");
  app.add_option("--seed", seed, "RNG seed (overrides numerics.seed)");
  app.add_flag("--validate-only", validate_only, "Report config diagnostics and exit");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalidConfig;
  }

  std::ifstream in(config_path);
  if (!in) {
    std::cerr << "invalid config: config: cannot open '" << config_path << "'\n";
    return kExitInvalidConfig;
  }
  std::stringstream buf;
  buf << in.rdbuf();
  auto parsed = parse_config(buf.str());
  if (out_dir) parsed.config.output_dir = *out_dir;
  if (seed) parsed.config.numerics.seed = *seed;
  if (svg) parsed.config.emit_svg = true;

  auto diags = parsed.diagnostics;
  for (auto& d : validate(parsed.config)) diags.push_back(std::move(d));
  if (!diags.empty()) {
    for (const auto& d : diags) std::cerr << "invalid config: " << to_string(d) << '\n';
    return kExitInvalidConfig;
  }
  if (validate_only) {
    std::cout << "config ok: " << to_json(resolve(parsed.config)) << '\n';
    return kExitOk;
  }
  return run(parsed.config, std::cout);
}

}  // namespace cqs::cli
