#include "cqs/cli.hpp"

#include "cqs/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <set>

namespace cqs::cli {

using nlohmann::json;

std::string to_string(const Diagnostic& d) { return d.field + ": " + d.message; }

namespace {

class Reader {
 public:
  explicit Reader(std::vector<Diagnostic>& diags) : diags_(diags) {}

  void fail(const std::string& field, const std::string& message) {
    diags_.push_back({field, message});
  }

  // Returns the sub-object at `key`, or nullptr when absent or malformed.
  const json* section(const json& parent, const char* key, const std::set<std::string>& allowed) {
    if (!parent.contains(key)) return nullptr;
    const json& obj = parent.at(key);
    if (!obj.is_object()) {
      fail(key, "expected an object");
      return nullptr;
    }
    for (const auto& [k, v] : obj.items()) {
      if (!allowed.count(k)) fail(std::string(key) + "." + k, "unknown key");
    }
    return &obj;
  }

  void number(const json* obj, const std::string& path, const char* key, double& out) {
    if (!obj || !obj->contains(key)) return;
    const json& v = obj->at(key);
    if (!v.is_number()) return fail(path + "." + key, "expected a number");
    out = v.get<double>();
  }

  template <class Int>
  void integer(const json* obj, const std::string& path, const char* key, Int& out) {
    if (!obj || !obj->contains(key)) return;
    const json& v = obj->at(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)) {
      return fail(path + "." + key, "expected a non-negative integer");
    }
    out = v.get<Int>();
  }

  void boolean(const json* obj, const std::string& path, const char* key, bool& out) {
    if (!obj || !obj->contains(key)) return;
    const json& v = obj->at(key);
    if (!v.is_boolean()) return fail(path + "." + key, "expected true or false");
    out = v.get<bool>();
  }

  void string(const json* obj, const std::string& path, const char* key, std::string& out) {
    if (!obj || !obj->contains(key)) return;
    const json& v = obj->at(key);
    if (!v.is_string()) return fail(path + "." + key, "expected a string");
    out = v.get<std::string>();
  }

  // A complex value is a number or a [re, im] pair.
  void complex(const json* obj, const std::string& path, const char* key, Complex& out) {
    if (!obj || !obj->contains(key)) return;
    const json& v = obj->at(key);
    if (v.is_number()) {
      out = v.get<double>();
    } else if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
      out = Complex(v[0].get<double>(), v[1].get<double>());
    } else {
      fail(path + "." + key, "expected a number or [re, im]");
    }
  }

  void numbers(const json* obj, const std::string& path, const char* key, std::vector<double>& out) {
    if (!obj || !obj->contains(key)) return;
    const json& v = obj->at(key);
    if (!v.is_array()) return fail(path + "." + key, "expected an array of numbers");
    out.clear();
    for (const auto& e : v) {
      if (!e.is_number()) return fail(path + "." + key, "expected an array of numbers");
      out.push_back(e.get<double>());
    }
  }

 private:
  std::vector<Diagnostic>& diags_;
};

json complex_json(Complex c) {
  if (c.imag() == 0.0) return c.real();
  return json::array({c.real(), c.imag()});
}

}  // namespace

ParseResult parse_config(const std::string& text) {
  ParseResult result;
  json root;
  try {
    root = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    result.diagnostics.push_back({"config", std::string("parse error: ") + e.what()});
    return result;
  }
  if (!root.is_object()) {
    result.diagnostics.push_back({"config", "top level must be an object"});
    return result;
  }
  Reader rd(result.diagnostics);
  RunConfig& c = result.config;

  static const std::set<std::string> top{"experiment", "model",  "transform", "initial",
                                         "numerics",   "output", "phases",    "transfer"};
  for (const auto& [k, v] : root.items()) {
    if (!top.count(k)) rd.fail(k, "unknown key");
  }
  rd.string(&root, "", "experiment", c.experiment);
  if (!root.contains("experiment")) rd.fail("experiment", "required");

  if (const json* m = rd.section(root, "model", {"gamma1", "gamma2", "omega1", "omega2", "tau",
                                                 "beta", "rotating_frame"})) {
    rd.number(m, "model", "gamma1", c.model.gamma1);
    rd.number(m, "model", "gamma2", c.model.gamma2);
    rd.number(m, "model", "omega1", c.model.omega1);
    rd.number(m, "model", "omega2", c.model.omega2);
    rd.number(m, "model", "tau", c.model.tau);
    rd.complex(m, "model", "beta", c.model.beta);
    rd.boolean(m, "model", "rotating_frame", c.model.rotating_frame);
  }
  if (const json* t = rd.section(root, "transform",
                                 {"alpha", "omega0", "T", "Delta", "X", "c", "matched"})) {
    wavepacket::TransformSpec spec;
    rd.number(t, "transform", "alpha", spec.alpha);
    rd.number(t, "transform", "omega0", spec.omega0);
    rd.number(t, "transform", "T", spec.T);
    rd.number(t, "transform", "Delta", spec.Delta);
    rd.number(t, "transform", "X", spec.X);
    rd.number(t, "transform", "c", spec.c);
    rd.boolean(t, "transform", "matched", c.matched);
    c.transform = spec;
  }
  if (const json* i = rd.section(root, "initial", {"c1", "c2"})) {
    rd.complex(i, "initial", "c1", c.initial_c1);
    rd.complex(i, "initial", "c2", c.initial_c2);
  }
  if (const json* n = rd.section(root, "numerics",
                                 {"dt", "t0", "t1", "n_traj", "seed", "workers", "stride"})) {
    rd.number(n, "numerics", "dt", c.numerics.dt);
    rd.number(n, "numerics", "t0", c.numerics.t0);
    rd.number(n, "numerics", "t1", c.numerics.t1);
    rd.integer(n, "numerics", "n_traj", c.numerics.n_traj);
    rd.integer(n, "numerics", "seed", c.numerics.seed);
    rd.integer(n, "numerics", "workers", c.numerics.workers);
    rd.integer(n, "numerics", "stride", c.numerics.stride);
  }
  if (const json* o = rd.section(root, "output", {"dir", "svg"})) {
    rd.string(o, "output", "dir", c.output_dir);
    rd.boolean(o, "output", "svg", c.emit_svg);
  }
  if (const json* p = rd.section(root, "phases", {"snapshot_times", "dx"})) {
    rd.numbers(p, "phases", "snapshot_times", c.snapshot_times);
    rd.number(p, "phases", "dx", c.dx);
  }
  if (const json* tr = rd.section(root, "transfer", {"qubit_b"})) {
    rd.complex(tr, "transfer", "qubit_b", c.qubit_b);
  }
  return result;
}

RunConfig resolve(RunConfig config) {
  if (config.matched && config.transform && config.model.gamma1 > 0.0 && config.model.gamma2 > 0.0 &&
      config.transform->c > 0.0) {
    const auto& m = config.model;
    config.transform = wavepacket::matched_transform(m.gamma1, m.gamma2, m.omega1, m.omega2,
                                                     config.transform->Delta,
                                                     config.transform->X, config.transform->c);
  }
  return config;
}

std::vector<Diagnostic> validate(const RunConfig& raw) {
  const RunConfig config = resolve(raw);
  std::vector<Diagnostic> d;
  const auto& e = config.experiment;
  const auto& names = experiments();
  if (std::find(names.begin(), names.end(), e) == names.end()) {
    std::string list;
    for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
    d.push_back({"experiment", "unknown experiment '" + e + "' (expected one of " + list + ")"});
  }

  const auto& m = config.model;
  if (!(m.gamma1 > 0.0)) d.push_back({"model.gamma1", "must be > 0"});
  if (!(m.gamma2 > 0.0)) d.push_back({"model.gamma2", "must be > 0"});
  if (!(m.omega1 >= 0.0)) d.push_back({"model.omega1", "must be >= 0"});
  if (!(m.omega2 >= 0.0)) d.push_back({"model.omega2", "must be >= 0"});
  if (!(m.tau >= 0.0)) d.push_back({"model.tau", "must be >= 0"});

  const auto& n = config.numerics;
  if (!(n.dt > 0.0)) d.push_back({"numerics.dt", "must be > 0"});
  if (!(n.t1 > n.t0)) d.push_back({"numerics.t1", "must exceed numerics.t0"});
  if (n.stride == 0) d.push_back({"numerics.stride", "must be >= 1"});
  const double gmax = std::max({m.gamma1, m.gamma2, std::norm(m.beta)});
  if ((e == "decay" || e == "lindblad" || e == "transfer") && n.dt > 0.0 && n.dt * gmax > 0.1) {
    d.push_back({"numerics.dt", "dt*max(gamma1,gamma2,|beta|^2) = " +
                                    io::format_number(n.dt * gmax) + " exceeds 0.1"});
  }
  if (e == "trajectories") {
    const double bound = n.dt * (m.gamma1 + m.gamma2 + std::norm(m.beta)) * 4.0;
    if (n.dt > 0.0 && !(bound < 0.1)) {
      d.push_back({"numerics.dt", "dt*(gamma1+gamma2+|beta|^2)*4 = " + io::format_number(bound) +
                                      " must be < 0.1"});
    }
    if (n.n_traj == 0) d.push_back({"numerics.n_traj", "must be positive"});
  }
  if (std::abs(config.initial_c1) > 1.0) d.push_back({"initial.c1", "|c1| must be <= 1"});
  if (std::abs(config.initial_c2) > 1.0) d.push_back({"initial.c2", "|c2| must be <= 1"});
  if (std::abs(config.qubit_b) > 1.0) d.push_back({"transfer.qubit_b", "|b| must be <= 1"});

  const bool needs_transform = e == "transform" || e == "phases" || e == "timemap";
  if (needs_transform && !config.transform) d.push_back({"transform", "required for " + e});
  if (config.transform) {
    const auto& t = *config.transform;
    for (const auto& msg : wavepacket::validate(t, m.tau)) {
      const auto dot = msg.find(' ');
      d.push_back({msg.substr(0, dot), msg.substr(dot + 1)});
    }
    if ((e == "transform" || e == "phases" || e == "transfer") && !(t.X > 0.0)) {
      d.push_back({"transform.X", "must be > 0"});
    }
    if (e == "transform" && t.alpha > 0.0 && t.Delta > 0.0 && t.c > 0.0 && n.dt > 0.0) {
      // The emitted grid [t0, t1] must cover the device's input window.
      const auto s = wavepacket::phase_schedule(t);
      const double lo = s.t_i - t.X / t.c, hi = s.t_s - t.X / t.c;
      if (n.t0 > lo + 1e-12 || n.t1 < hi - 1e-12) {
        d.push_back({"numerics.t1", "emission grid [" + io::format_number(n.t0) + ", " +
                                        io::format_number(n.t1) + "] must cover the input band [" +
                                        io::format_number(lo) + ", " + io::format_number(hi) +
                                        "]"});
      }
    }
  }
  if (e == "phases" && !(config.dx > 0.0)) d.push_back({"phases.dx", "must be > 0"});
  return d;
}

std::string to_json(const RunConfig& c) {
  json j;
  j["experiment"] = c.experiment;
  j["model"] = {{"gamma1", c.model.gamma1}, {"gamma2", c.model.gamma2},
                {"omega1", c.model.omega1}, {"omega2", c.model.omega2},
                {"tau", c.model.tau},       {"beta", complex_json(c.model.beta)},
                {"rotating_frame", c.model.rotating_frame}};
  if (c.transform) {
    const auto& t = *c.transform;
    j["transform"] = {{"alpha", t.alpha}, {"omega0", t.omega0}, {"T", t.T},           {"Delta", t.Delta},
                      {"X", t.X},         {"c", t.c},           {"matched", c.matched}};
  }
  j["initial"] = {{"c1", complex_json(c.initial_c1)}, {"c2", complex_json(c.initial_c2)}};
  j["numerics"] = {{"dt", c.numerics.dt},         {"t0", c.numerics.t0},
                   {"t1", c.numerics.t1},         {"n_traj", c.numerics.n_traj},
                   {"seed", c.numerics.seed},     {"workers", c.numerics.workers},
                   {"stride", c.numerics.stride}};
  j["output"] = {{"dir", c.output_dir}, {"svg", c.emit_svg}};
  j["phases"] = {{"snapshot_times", c.snapshot_times}, {"dx", c.dx}};
  j["transfer"] = {{"qubit_b", complex_json(c.qubit_b)}};
  return j.dump();
}

}  // namespace cqs::cli
