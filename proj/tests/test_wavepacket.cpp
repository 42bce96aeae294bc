#include <doctest.h>

#include "cqs/transfer.hpp"
#include "cqs/wavepacket.hpp"

#include <functional>
#include <numbers>
#include <sstream>

using namespace cqs::wavepacket;
using Complex = std::complex<double>;

namespace {

TransformSpec fig2() {
  TransformSpec s;
  s.alpha = 2.0;
  s.T = 54.0;
  s.Delta = 6.0;
  s.X = 12.0;
  return s;
}

Envelope sampled(double t0, double dt, std::size_t n, const std::function<Complex(double)>& f) {
  Envelope e;
  e.t0 = t0;
  e.dt = dt;
  for (std::size_t k = 0; k < n; ++k) e.samples.push_back(f(e.time(k)));
  return e;
}

double rel_l2(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  REQUIRE(a.size() == b.size());
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    num += std::norm(a[k] - b[k]);
    den += std::norm(b[k]);
  }
  return std::sqrt(num / den);
}

// Least-squares slope of y against x.
double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST_CASE("envelope interpolation") {
  // cubic reproduced exactly by four-point Lagrange
  const auto cubic = [](double t) { return Complex(t * t * t - 2.0 * t, 0.5 * t * t); };
  const Envelope e = sampled(-1.0, 0.25, 12, cubic);
  for (double t : {-1.0, -0.9, 0.1, 0.3333, 1.2, 1.74}) CHECK(std::abs(e.at(t) - cubic(t)) < 1e-12);
  for (std::size_t k = 0; k < e.size(); ++k) CHECK(e.at(e.time(k)) == e.samples[k]);
  CHECK(e.at(-1.01) == Complex(0.0));
  CHECK(e.at(e.t_end() + 0.01) == Complex(0.0));
  CHECK(std::abs(e.shifted(2.0).at(2.3) - cubic(0.3)) < 1e-12);

  Envelope bad;
  bad.samples = {1.0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.samples = {1.0, 2.0};
  bad.dt = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("transform parameters") {
  auto p = derive_transform_params(1.0, 1.0, 3.0, 3.0);
  CHECK(p.alpha == 1.0);
  CHECK(p.omega0 == 6.0);
  p = derive_transform_params(2.0, 1.0, 10.0, 7.0);
  CHECK(p.alpha == 2.0);
  CHECK(p.omega0 == 12.0);
  for (double g1 : {0.3, 1.0, 7.0})
    for (double g2 : {0.2, 2.5}) CHECK(std::abs(derive_transform_params(g1, g2, 0, 0).alpha * g2 - g1) < 1e-15);
  CHECK_THROWS_AS(derive_transform_params(0.0, 1.0, 0, 0), std::invalid_argument);

  const auto m = matched_transform(2.0, 1.0, 0.0, 0.0, 3.0, 1.0);
  const auto s = phase_schedule(m);
  CHECK(std::abs(m.T - 3.0 * s.t_a) < 1e-12);
  CHECK(std::abs(s.t_s - s.t_a) < 1e-12);
}

TEST_CASE("spec validation") {
  TransformSpec s = fig2();
  CHECK(validate(s).empty());
  CHECK(validate(s, 20.0).empty());
  CHECK(validate(s, 0.0).empty());  // no delay constraint without retardation
  CHECK(validate(s, 10.0).size() == 1);
  s.alpha = 0.0;
  s.Delta = -1.0;
  const auto d = validate(s);
  REQUIRE(d.size() == 2);
  CHECK(d[0].find("alpha") != std::string::npos);
  CHECK(d[1].find("Delta") != std::string::npos);
  CHECK_THROWS_AS(phase_schedule(s), std::invalid_argument);
}

TEST_CASE("phase schedule") {
  const auto s = phase_schedule(fig2());
  CHECK(s.t_i == 12.0);
  CHECK(s.t_s == 18.0);
  CHECK(s.t_f == 30.0);
  CHECK(s.t_a == 18.0);
  CHECK(fig2().T == (1.0 + fig2().alpha) * s.t_a);

  TransformSpec one = fig2();
  one.alpha = 1.0;
  one.T = 2.0 * s.t_a;
  CHECK(phase_schedule(one).t_s == phase_schedule(one).t_a);
}

TEST_CASE("time-domain transform") {
  SUBCASE("pure reversal") {
    TransformSpec s;
    s.alpha = 1.0;
    s.T = 0.0;
    s.Delta = 2.0;
    s.X = 1.0;
    // window [t_i, t_s] = [-2, 0]
    const Envelope e = sampled(-2.0, 0.01, 201, [](double t) { return Complex(std::sin(t), t * t); });
    const auto r = apply_u_time_domain(e, s);
    CHECK(r.zero_filled == 0);
    REQUIRE(r.envelope.size() == 201);
    for (std::size_t k = 0; k < r.envelope.size(); ++k) {
      const double t = r.envelope.time(k);
      CHECK(std::abs(r.envelope.samples[k] - e.at(-t)) < 1e-12);
    }
  }

  SUBCASE("decaying emission becomes a rising exponential") {
    const Envelope e = sampled(0.0, 1e-3, 12001, [](double t) { return std::exp(-0.5 * t); });
    const auto spec = fig2();
    const auto r = apply_u_time_domain(e.shifted(spec.X), spec);
    CHECK(r.zero_filled == 0);
    CHECK(std::abs(r.envelope.t0 - 18.0) < 1e-9);
    CHECK(std::abs(r.envelope.t_end() - 30.0) < 1e-9);
    CHECK(std::abs(r.envelope.dt - 2e-3) < 1e-15);
    std::vector<double> t, y;
    for (std::size_t k = 0; k < r.envelope.size(); ++k) {
      const double tk = r.envelope.time(k);
      // closed form: e^{-(T - t)/alpha / 2 + X/2} / sqrt(alpha)
      CHECK(std::abs(r.envelope.samples[k] - std::exp(-((54.0 - tk) / 2.0 - 12.0) / 2.0) / std::sqrt(2.0)) < 1e-12);
      t.push_back(tk);
      y.push_back(std::log(std::abs(r.envelope.samples[k])));
    }
    CHECK(std::abs(slope(t, y) - 0.25) < 1e-6);

    // norm of the window is preserved exactly
    Envelope window = sampled(12.0, 1e-3, 6001, [](double tt) { return std::exp(-0.5 * (tt - 12.0)); });
    CHECK(std::abs(r.envelope.squared_norm() - window.squared_norm()) < 1e-12);
  }

  SUBCASE("partial support is zero-filled and flagged") {
    const Envelope e = sampled(14.0, 0.01, 201, [](double) { return Complex(1.0); });
    const auto r = apply_u_time_domain(e, fig2());
    CHECK(r.zero_filled == 400);
    CHECK(std::abs(r.envelope.squared_norm() - e.squared_norm()) < 1e-12);
  }

  SUBCASE("disjoint support is an error") {
    const Envelope e = sampled(40.0, 0.01, 100, [](double) { return Complex(1.0); });
    CHECK_THROWS_AS(apply_u_time_domain(e, fig2()), std::invalid_argument);
  }

  SUBCASE("carrier phase") {
    TransformSpec spec = fig2();
    spec.omega0 = 3.0;
    const Envelope e = sampled(12.0, 0.01, 601, [](double) { return Complex(1.0); });
    const auto r = apply_u_time_domain(e, spec);
    for (std::size_t k = 0; k < r.envelope.size(); k += 50) {
      const double t = r.envelope.time(k);
      CHECK(std::abs(r.envelope.samples[k] - std::polar(1.0 / std::sqrt(2.0), -3.0 * (t - 54.0))) < 1e-12);
    }
  }
}

TEST_CASE("DFT conventions") {
  const auto gauss = [](double t) { return std::exp(-0.5 * (t - 1.0) * (t - 1.0)) * std::polar(1.0, 2.0 * t); };
  const Envelope e = sampled(-15.0, 0.01, 4096, gauss);
  const Spectrum s = to_spectrum(e, 0.0);
  CHECK(s.t0 == e.t0);
  CHECK(std::abs(s.dnu - 2.0 * std::numbers::pi / (4096 * 0.01)) < 1e-15);
  CHECK(std::abs(s.squared_norm() - e.squared_norm()) < 1e-9);

  // analytic transform with kernel e^{+i nu t} / sqrt(2 pi):
  // F(nu) = exp(-(nu + 2)^2 / 2 + i (nu + 2))
  double worst = 0.0;
  for (std::size_t m = 0; m < s.size(); ++m) {
    const double nu = s.frequency(m);
    const Complex f = std::exp(-0.5 * (nu + 2.0) * (nu + 2.0)) * std::polar(1.0, nu + 2.0);
    worst = std::max(worst, std::abs(s.samples[m] - f));
  }
  CHECK(worst < 1e-9);

  const Envelope back = to_envelope(s);
  CHECK(std::abs(back.t0 - e.t0) < 1e-15);
  CHECK(std::abs(back.dt - e.dt) < 1e-15);
  CHECK(rel_l2(back.samples, e.samples) < 1e-12);

  // band-limited evaluation hits grid values and the analytic curve between them
  CHECK(std::abs(evaluate_spectrum(s, s.frequency(2100)) - s.samples[2100]) < 1e-10);
  const double nu = -1.7345;
  CHECK(std::abs(evaluate_spectrum(s, nu) - std::exp(-0.5 * (nu + 2.0) * (nu + 2.0)) * std::polar(1.0, nu + 2.0)) < 1e-9);

  // centering
  const Spectrum shifted = to_spectrum(e, 2.0);
  CHECK(std::abs(shifted.frequency(2048) - 2.0) < 1e-12);
}

TEST_CASE("frequency-domain transform") {
  SUBCASE("reduction to pure frequency reversal") {
    TransformSpec s;
    s.alpha = 1.0;
    s.T = 0.0;
    s.Delta = 1.0;
    const Envelope e = sampled(-20.48, 0.01, 4096, [](double t) { return Complex(std::exp(-t * t)); });
    const Spectrum in = to_spectrum(e);
    const Spectrum out = apply_u_frequency_domain(in, s);
    for (double nu : {-3.0, -0.4, 0.0, 1.1, 2.5}) {
      CHECK(std::abs(evaluate_spectrum(out, nu) - evaluate_spectrum(in, -nu)) < 1e-10);
      CHECK(std::abs(evaluate_spectrum(out, nu) - evaluate_spectrum(in, nu)) < 1e-10);
    }
  }

  SUBCASE("Parseval") {
    const Envelope e = sampled(0.0, 0.01, 4096, [](double t) { return Complex(std::exp(-0.5 * t), 0.2); });
    const Spectrum in = to_spectrum(e);
    const Spectrum out = apply_u_frequency_domain(in, fig2());
    CHECK(std::abs(out.squared_norm() - in.squared_norm()) < 1e-9);
  }

  SUBCASE("Lorentzian line is moved to the receiver line") {
    const double g1 = 2.0, g2 = 1.0, w1 = 10.0, w2 = 7.0;
    cqs::transfer::TimeGrid grid{0.0, 0.005, 1 << 14};
    const Envelope e = cqs::transfer::emit_envelope(g1, w1, 1.0, grid, false);
    auto spec = matched_transform(g1, g2, w1, w2, 40.0, 1.0);
    CHECK(spec.omega0 == 12.0);
    const Spectrum in = to_spectrum(e, w1);
    const Spectrum out = apply_u_frequency_domain(in, spec);

    std::size_t peak = 0;
    for (std::size_t m = 0; m < out.size(); ++m)
      if (std::abs(out.samples[m]) > std::abs(out.samples[peak])) peak = m;
    CHECK(std::abs(out.frequency(peak) - w2) <= out.dnu);

    // full width at half maximum of |f|^2 equals gamma2
    const double half = 0.5 * std::norm(out.samples[peak]);
    auto crossing = [&](int dir) {
      std::size_t m = peak;
      while (std::norm(out.samples[m + dir]) > half) m += dir;
      const double a = std::norm(out.samples[m]), b = std::norm(out.samples[m + dir]);
      return out.frequency(m) + dir * out.dnu * (a - half) / (a - b);
    };
    const double fwhm = crossing(1) - crossing(-1);
    CHECK(std::abs(fwhm - g2) < 0.01 * g2);
    CHECK(std::abs(0.5 * (crossing(1) + crossing(-1)) - w2) < 1e-3);
  }

  SUBCASE("time and frequency paths agree") {
    const auto spec = fig2();
    const auto gauss = [](double t) { return Complex(std::exp(-2.0 * (t - 15.0) * (t - 15.0)), 0.0); };
    const auto trunc = [](double t) { return Complex(std::exp(-0.5 * (t - 12.0)), 0.0); };
    for (const auto& f : {std::function<Complex(double)>(gauss), std::function<Complex(double)>(trunc)}) {
      const Envelope window = sampled(12.0, 6.0 / 4095.0, 4096, f);
      const auto time_path = apply_u_time_domain(window, spec).envelope;
      const Spectrum in = to_spectrum(window);
      const Spectrum out = apply_u_frequency_domain(in, spec);
      CHECK(std::abs(out.squared_norm() - in.squared_norm()) < 1e-6 * in.squared_norm());
      const Envelope freq_path = to_envelope(out);
      CHECK(std::abs(freq_path.t0 - time_path.t0) < 1e-9);
      CHECK(std::abs(freq_path.dt - time_path.dt) < 1e-12);
      CHECK(rel_l2(freq_path.samples, time_path.samples) < 1e-6);
    }
  }

  SUBCASE("target grid resampling") {
    const auto spec = fig2();
    const Envelope window = sampled(12.0, 0.01, 601, [](double t) { return Complex(std::exp(-2.0 * (t - 15.0) * (t - 15.0))); });
    const Spectrum in = to_spectrum(window);
    const Spectrum natural = apply_u_frequency_domain(in, spec);
    const Spectrum on_grid = apply_u_frequency_domain(in, spec, {natural.nu0 + 10 * natural.dnu, natural.dnu, 200});
    for (std::size_t j = 0; j < on_grid.size(); j += 17)
      CHECK(std::abs(on_grid.samples[j] - natural.samples[j + 10]) < 1e-10);

    // off the natural grid the band-limited value matches the natural spectrum's own DTFT
    const double nu = natural.frequency(300) + 0.37 * natural.dnu;
    const Spectrum off = apply_u_frequency_domain(in, spec, {nu, natural.dnu, 2});
    CHECK(std::abs(off.samples[0] - evaluate_spectrum(natural, nu)) < 1e-9);

    try {
      apply_u_frequency_domain(in, spec, {natural.nu0 - 5.0, natural.dnu, 10});
      FAIL("expected out_of_range");
    } catch (const std::out_of_range& e) {
      CHECK(std::string(e.what()).find("requires input band") != std::string::npos);
    }
  }
}

TEST_CASE("piecewise field") {
  const auto spec = fig2();
  const auto sched = phase_schedule(spec);
  const Envelope initial = cqs::transfer::emit_envelope(1.0, 0.0, 1.0, {0.0, 1e-3, 40001});
  const auto transformed = apply_u_time_domain(initial.shifted(spec.X / spec.c), spec).envelope;

  auto f = assemble_piecewise_field(spec.X, 15.0, initial, transformed, spec, sched);
  CHECK(f.phase == FieldPhase::Vacuum);
  CHECK(f.value == Complex(0.0));

  f = assemble_piecewise_field(spec.X, 24.0, initial, transformed, spec, sched);
  CHECK(f.phase == FieldPhase::Transformed);
  CHECK(std::abs(f.value - transformed.at(24.0)) == 0.0);
  CHECK(std::abs(f.value - std::exp(-((54.0 - 24.0) / 2.0 - 12.0) / 2.0) / std::sqrt(2.0)) < 1e-12);

  // downstream of the device the transformed packet propagates rigidly
  f = assemble_piecewise_field(spec.X + 3.0, 27.0, initial, transformed, spec, sched);
  CHECK(f.phase == FieldPhase::Transformed);
  CHECK(f.value == transformed.at(24.0));

  f = assemble_piecewise_field(-0.5, 3.0, initial, transformed, spec, sched);
  CHECK(f.value == Complex(0.0));
  CHECK(f.phase == FieldPhase::Initial);

  f = assemble_piecewise_field(0.0, 2.0, initial, transformed, spec, sched);
  CHECK(std::abs(f.value - 0.5 * std::exp(-1.0)) < 1e-12);

  f = assemble_piecewise_field(5.0, 7.0, initial, transformed, spec, sched);
  CHECK(f.phase == FieldPhase::Initial);
  CHECK(std::abs(f.value - std::exp(-1.0)) < 1e-12);

  // after the device switches off, the remaining tail passes unchanged
  f = assemble_piecewise_field(spec.X, 31.0, initial, transformed, spec, sched);
  CHECK(f.phase == FieldPhase::Initial);
  CHECK(std::abs(f.value - std::exp(-0.5 * 19.0)) < 1e-12);

  CHECK(heaviside(0.0) == 0.5);
  CHECK(heaviside(1e-300) == 1.0);
  CHECK(heaviside(-1e-300) == 0.0);
  CHECK(std::string(to_string(FieldPhase::Vacuum)) == "VACUUM");
}

TEST_CASE("time maps") {
  const auto spec = fig2();
  const auto sched = phase_schedule(spec);
  CHECK(*time_map(20.0, spec, sched, 0.0) == 17.0);
  CHECK_FALSE(time_map(14.0, spec, sched, 0.0).has_value());
  CHECK(*time_map(5.0, spec, sched, 0.0) == 5.0);
  CHECK(*time_map_slope(20.0, spec, sched) == -0.5);
  CHECK(*time_map_slope(5.0, spec, sched) == 1.0);
  CHECK(*time_map_slope(40.0, spec, sched) == 1.0);
  CHECK_FALSE(time_map_slope(14.0, spec, sched).has_value());

  for (double tau : {0.0, 0.7, 3.0}) {
    std::size_t checked = 0;
    for (double t = -5.0; t < 45.0; t += 0.0137) {
      const auto inv = time_map_inverse(t, spec, sched, tau);
      if (!inv) continue;
      const auto back = time_map(*inv, spec, sched, tau);
      if (!back) continue;
      CHECK(std::abs(*back - t) < 1e-12);
      ++checked;
    }
    CHECK(checked > 2500);
    // inverse undefined exactly on the image gap (t_s, t_f) - tau
    CHECK_FALSE(time_map_inverse(sched.t_s + 0.01 - tau, spec, sched, tau).has_value());
    CHECK_FALSE(time_map_inverse(sched.t_f - 0.01 - tau, spec, sched, tau).has_value());
    CHECK(time_map_inverse(sched.t_f + 0.01 - tau, spec, sched, tau).has_value());
  }

  SUBCASE("the fictitious clock runs backwards on the transformed branch") {
    double prev = *time_map(sched.t_s + 1e-6, spec, sched, 0.0);
    for (double t = sched.t_s + 0.01; t < sched.t_f; t += 0.01) {
      const double f = *time_map(t, spec, sched, 0.0);
      CHECK(f < prev);
      prev = f;
    }
  }

  SUBCASE("gap geometry") {
    // horizontal gap: f is undefined on an interval of width Delta
    CHECK(sched.t_s - sched.t_i == spec.Delta);
    CHECK(time_map(sched.t_i, spec, sched, 0.0).has_value());
    CHECK_FALSE(time_map(std::nextafter(sched.t_i, 1e9), spec, sched, 0.0).has_value());
    CHECK_FALSE(time_map(std::nextafter(sched.t_s, 0.0), spec, sched, 0.0).has_value());
    // vertical gap: the range of f skips (t_s, t_f), height alpha Delta
    const double top_of_branch = (spec.T - sched.t_s) / spec.alpha;
    const double bottom_of_branch = (spec.T - sched.t_f) / spec.alpha;
    CHECK(top_of_branch == sched.t_s);
    CHECK(bottom_of_branch == sched.t_i);
    CHECK(*time_map(sched.t_f, spec, sched, 0.0) - top_of_branch == spec.alpha * spec.Delta);
    // scan: largest hole in the sampled range of f
    std::vector<double> values;
    for (double t = 0.0; t < 45.0; t += 1e-3)
      if (auto f = time_map(t, spec, sched, 0.0)) values.push_back(*f);
    std::sort(values.begin(), values.end());
    double gap = 0.0;
    for (std::size_t k = 1; k < values.size(); ++k) gap = std::max(gap, values[k] - values[k - 1]);
    CHECK(std::abs(gap - spec.alpha * spec.Delta) < 2e-3);
  }
}

TEST_CASE("envelope and spectrum files") {
  const Envelope e = sampled(0.5, 0.125, 9, [](double t) { return Complex(t, -t * t); });
  std::stringstream ss;
  write_envelope(ss, e, "t [1/gamma1], amplitude [sqrt(gamma1)]");
  CHECK(ss.str().rfind("# envelope; units: t [1/gamma1]", 0) == 0);
  CHECK(ss.str().find("\nt,re,im\n") != std::string::npos);
  const Envelope r = read_envelope(ss);
  CHECK(r.t0 == e.t0);
  CHECK(r.dt == e.dt);
  CHECK(r.samples == e.samples);

  const Spectrum s = to_spectrum(sampled(-3.3, 0.1, 64, [](double t) { return Complex(std::exp(-t * t)); }));
  std::stringstream sp;
  write_spectrum(sp, s, "nu [gamma1]");
  const Spectrum rs = read_spectrum(sp);
  CHECK(rs.t0 == s.t0);
  CHECK(std::abs(rs.nu0 - s.nu0) < 1e-12);
  CHECK(std::abs(rs.dnu - s.dnu) < 1e-12);
  CHECK(rs.samples == s.samples);

  std::stringstream uneven("t,re,im\n0,1,0\n1,1,0\n2.5,1,0\n");
  CHECK_THROWS_AS(read_envelope(uneven), std::invalid_argument);
  std::stringstream short_row("0,1\n1,1\n");
  CHECK_THROWS_AS(read_envelope(short_row), std::invalid_argument);
  std::stringstream junk("0,1,0\n1,x,0\n");
  CHECK_THROWS_AS(read_envelope(junk), std::invalid_argument);
}
