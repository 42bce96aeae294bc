#include "cqs/cascade.hpp"
#include "cqs/trajectory.hpp"
#include "cqs/transfer.hpp"
#include "cqs/wavepacket.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>

namespace py = pybind11;
using namespace cqs;

namespace {

using CArray = py::array_t<Complex>;
using DArray = py::array_t<double>;

template <class T>
py::array_t<T> to_array(const std::vector<T>& v) {
  return py::array_t<T>(static_cast<py::ssize_t>(v.size()), v.data());
}

wavepacket::Envelope make_envelope(double t0, double dt, const CArray& samples) {
  auto r = samples.unchecked<1>();
  wavepacket::Envelope e;
  e.t0 = t0;
  e.dt = dt;
  e.samples.assign(r.data(0), r.data(0) + r.shape(0));
  e.validate();
  return e;
}

// NaN stands in for an undefined time-map value.
DArray map_times(const DArray& t, const wavepacket::TransformSpec& spec, double tau, bool inverse) {
  const auto schedule = wavepacket::phase_schedule(spec);
  auto in = t.unchecked<1>();
  DArray out(in.shape(0));
  auto w = out.mutable_unchecked<1>();
  for (py::ssize_t k = 0; k < in.shape(0); ++k) {
    const auto v = inverse ? wavepacket::time_map_inverse(in(k), spec, schedule, tau)
                           : wavepacket::time_map(in(k), spec, schedule, tau);
    w(k) = v ? *v : std::nan("");
  }
  return out;
}

py::dict result_dict(const transfer::TransferResult& r) {
  py::dict d;
  d["t"] = to_array(r.t);
  d["c2"] = to_array(r.c2);
  d["p2"] = to_array(r.p2);
  d["p2_max"] = r.p2_max;
  d["t_at_max"] = r.t_at_max;
  d["fidelity"] = r.fidelity;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Cascaded quantum systems core";

  py::register_exception<cascade::IntegratorError>(m, "IntegratorError", PyExc_RuntimeError);

  py::class_<cascade::CascadeModel>(m, "CascadeModel")
      .def(py::init([](double g1, double g2, double w1, double w2, double tau, Complex beta,
                       bool rot) {
             cascade::CascadeModel c{g1, g2, w1, w2, tau, beta, rot};
             cascade::validate(c);
             return c;
           }),
           py::arg("gamma1") = 1.0, py::arg("gamma2") = 1.0, py::arg("omega1") = 0.0,
           py::arg("omega2") = 0.0, py::arg("tau") = 0.0, py::arg("beta") = Complex(0.0),
           py::arg("rotating_frame") = true)
      .def_readwrite("gamma1", &cascade::CascadeModel::gamma1)
      .def_readwrite("gamma2", &cascade::CascadeModel::gamma2)
      .def_readwrite("omega1", &cascade::CascadeModel::omega1)
      .def_readwrite("omega2", &cascade::CascadeModel::omega2)
      .def_readwrite("tau", &cascade::CascadeModel::tau)
      .def_readwrite("beta", &cascade::CascadeModel::beta)
      .def_readwrite("rotating_frame", &cascade::CascadeModel::rotating_frame);

  py::class_<wavepacket::TransformSpec>(m, "TransformSpec")
      .def(py::init([](double alpha, double omega0, double T, double Delta, double X, double c) {
             return wavepacket::TransformSpec{alpha, omega0, T, Delta, X, c};
           }),
           py::arg("alpha") = 1.0, py::arg("omega0") = 0.0, py::arg("T") = 0.0,
           py::arg("Delta") = 1.0, py::arg("X") = 0.0, py::arg("c") = 1.0)
      .def_readwrite("alpha", &wavepacket::TransformSpec::alpha)
      .def_readwrite("omega0", &wavepacket::TransformSpec::omega0)
      .def_readwrite("T", &wavepacket::TransformSpec::T)
      .def_readwrite("Delta", &wavepacket::TransformSpec::Delta)
      .def_readwrite("X", &wavepacket::TransformSpec::X)
      .def_readwrite("c", &wavepacket::TransformSpec::c)
      .def("validate", [](const wavepacket::TransformSpec& s, std::optional<double> tau) {
        return wavepacket::validate(s, tau);
      }, py::arg("tau") = py::none());

  py::class_<wavepacket::PhaseSchedule>(m, "PhaseSchedule")
      .def_readonly("t_i", &wavepacket::PhaseSchedule::t_i)
      .def_readonly("t_s", &wavepacket::PhaseSchedule::t_s)
      .def_readonly("t_f", &wavepacket::PhaseSchedule::t_f)
      .def_readonly("t_a", &wavepacket::PhaseSchedule::t_a)
      .def("__repr__", [](const wavepacket::PhaseSchedule& s) {
        return "PhaseSchedule(t_i=" + std::to_string(s.t_i) + ", t_s=" + std::to_string(s.t_s) +
               ", t_f=" + std::to_string(s.t_f) + ", t_a=" + std::to_string(s.t_a) + ")";
      });

  py::class_<wavepacket::Envelope>(m, "Envelope")
      .def(py::init(&make_envelope), py::arg("t0"), py::arg("dt"), py::arg("samples"))
      .def_readonly("t0", &wavepacket::Envelope::t0)
      .def_readonly("dt", &wavepacket::Envelope::dt)
      .def_property_readonly("samples", [](const wavepacket::Envelope& e) { return to_array(e.samples); })
      .def_property_readonly("times", [](const wavepacket::Envelope& e) {
        std::vector<double> t(e.size());
        for (std::size_t k = 0; k < t.size(); ++k) t[k] = e.time(k);
        return to_array(t);
      })
      .def("at", &wavepacket::Envelope::at)
      .def("squared_norm", &wavepacket::Envelope::squared_norm)
      .def("shifted", &wavepacket::Envelope::shifted);

  m.def("product_state", &cascade::product_state, py::arg("c1"), py::arg("c2") = Complex(0.0));
  m.def("build_h_eff", &cascade::build_h_eff);
  m.def("build_h_ex", &cascade::build_h_ex);
  m.def("build_jump_operator", &cascade::build_jump_operator);

  m.def(
      "master_observables",
      [](const cascade::CascadeModel& model, Complex c1, Complex c2, double t0, double t1,
         double dt, std::size_t stride) {
        const StateVector psi = cascade::product_state(c1, c2);
        cascade::MasterOptions opt;
        opt.stride = stride;
        const auto states =
            cascade::integrate_master(psi * psi.adjoint(), model, {t0, t1}, dt, opt);
        std::vector<double> t, p1, p2;
        std::vector<Complex> s1, s2;
        for (const auto& st : states) {
          const auto o = cascade::observe(st);
          t.push_back(o.t);
          p1.push_back(o.p1);
          p2.push_back(o.p2);
          s1.push_back(o.sigma1);
          s2.push_back(o.sigma2);
        }
        py::dict d;
        d["t"] = to_array(t);
        d["p1"] = to_array(p1);
        d["p2"] = to_array(p2);
        d["sigma1"] = to_array(s1);
        d["sigma2"] = to_array(s2);
        return d;
      },
      py::arg("model"), py::arg("c1") = Complex(1.0), py::arg("c2") = Complex(0.0),
      py::arg("t0") = 0.0, py::arg("t1") = 10.0, py::arg("dt") = 1e-3, py::arg("stride") = 1);

  m.def(
      "ensemble_average",
      [](const cascade::CascadeModel& model, Complex c1, double t0, double t1, double dt,
         std::size_t n_traj, std::uint64_t seed, unsigned workers) {
        trajectory::TrajectoryConfig cfg{dt, n_traj, seed, {t0, t1}, workers};
        const auto r = trajectory::ensemble_average(cascade::product_state(c1), model, cfg);
        py::dict d;
        d["t"] = to_array(r.t);
        d["p1"] = to_array(r.p1);
        d["p2"] = to_array(r.p2);
        d["sem_p2"] = to_array(r.sem_p2);
        d["mean_jumps"] = r.mean_jumps;
        d["jump_times"] = to_array(r.jump_times);
        return d;
      },
      py::arg("model"), py::arg("c1") = Complex(1.0), py::arg("t0") = 0.0, py::arg("t1") = 10.0,
      py::arg("dt") = 1e-2, py::arg("n_traj") = 1000, py::arg("seed") = 1, py::arg("workers") = 0);

  m.def("derive_transform_params", [](double g1, double g2, double w1, double w2) {
    const auto p = wavepacket::derive_transform_params(g1, g2, w1, w2);
    return py::make_tuple(p.alpha, p.omega0);
  });
  m.def("matched_transform", &wavepacket::matched_transform, py::arg("gamma1"), py::arg("gamma2"),
        py::arg("omega1"), py::arg("omega2"), py::arg("Delta"), py::arg("X"), py::arg("c") = 1.0);
  m.def("phase_schedule", &wavepacket::phase_schedule);
  m.def("apply_u_time_domain", [](const wavepacket::Envelope& e, const wavepacket::TransformSpec& s) {
    return wavepacket::apply_u_time_domain(e, s).envelope;
  });
  m.def("to_spectrum", [](const wavepacket::Envelope& e, double nu_center) {
    const auto s = wavepacket::to_spectrum(e, nu_center);
    std::vector<double> nu(s.size());
    for (std::size_t k = 0; k < nu.size(); ++k) nu[k] = s.frequency(k);
    return py::make_tuple(to_array(nu), to_array(s.samples));
  }, py::arg("envelope"), py::arg("nu_center") = 0.0);
  m.def("to_envelope", [](const wavepacket::Envelope& e) {
    // round trip through the spectrum, mostly useful to check the DFT normalisation
    return wavepacket::to_envelope(wavepacket::to_spectrum(e));
  });
  m.def("time_map", [](const DArray& t, const wavepacket::TransformSpec& s, double tau) {
    return map_times(t, s, tau, false);
  }, py::arg("t"), py::arg("spec"), py::arg("tau"));
  m.def("time_map_inverse", [](const DArray& t, const wavepacket::TransformSpec& s, double tau) {
    return map_times(t, s, tau, true);
  }, py::arg("t"), py::arg("spec"), py::arg("tau"));

  m.def("emit_envelope", [](double g1, double w1, Complex c1, double t0, double t1, double dt,
                            bool rot) {
    return transfer::emit_envelope(g1, w1, c1, transfer::TimeGrid::span(t0, t1, dt), rot);
  }, py::arg("gamma1"), py::arg("omega1"), py::arg("c1"), py::arg("t0"), py::arg("t1"),
        py::arg("dt"), py::arg("rotating_frame") = true);
  m.def("transfer_fidelity", &transfer::transfer_fidelity, py::arg("p"),
        py::arg("b") = Complex(1.0 / std::sqrt(2.0), 0.0));
  m.def(
      "transfer_experiment",
      [](const cascade::CascadeModel& model, std::optional<wavepacket::TransformSpec> spec,
         double t0, double t1, double dt, Complex b) {
        const auto r = transfer::transfer_experiment(model, spec,
                                                     transfer::TimeGrid::span(t0, t1, dt), {b});
        py::dict d;
        d["off"] = result_dict(r.off);
        if (r.on) {
          d["on"] = result_dict(*r.on);
          d["ratio"] = r.ratio;
        }
        return d;
      },
      py::arg("model"), py::arg("spec") = py::none(), py::arg("t0") = 0.0, py::arg("t1") = 30.0,
      py::arg("dt") = 1e-3, py::arg("b") = Complex(1.0 / std::sqrt(2.0), 0.0));
  m.def("check_time_reversed_envelope", [](double g1, double g2, double w1, double w2) {
    const auto r = transfer::check_time_reversed_envelope(g1, g2, w1, w2);
    py::dict d;
    d["alpha"] = r.alpha;
    d["omega0"] = r.omega0;
    d["magnitude_rate"] = r.magnitude_rate;
    d["phase_rate"] = r.phase_rate;
    d["system2_magnitude_rate"] = r.system2_magnitude_rate;
    d["system2_phase_rate"] = r.system2_phase_rate;
    return d;
  });
}
