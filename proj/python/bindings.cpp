// Python bindings. Spectral fields cross the boundary as complex128 arrays of
// shape (N, N) in FFT order (row ky, column kx) on the default 2/3-dealiased grid.
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <sstream>

#include "cdasim/config.hpp"
#include "cdasim/error.hpp"
#include "cdasim/experiments.hpp"
#include "cdasim/snapshot.hpp"
#include "cdasim/spectral_ops.hpp"
#include "cdasim/transform.hpp"

namespace py = pybind11;
using namespace cdasim;

namespace {

using ComplexArray = py::array_t<Complex, py::array::c_style | py::array::forcecast>;
using RealArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

GridSpec grid_for(int n, double dealias_fraction = 2.0 / 3.0) {
  GridSpec g;
  g.resolution = n;
  g.dealias_fraction = dealias_fraction;
  g.validate();
  return g;
}

int square_size(const py::buffer_info& info) {
  if (info.ndim != 2 || info.shape[0] != info.shape[1]) throw py::value_error("expected a square 2-D array");
  return static_cast<int>(info.shape[0]);
}

SpectralField to_field(const ComplexArray& a, double dealias_fraction = 2.0 / 3.0) {
  const auto info = a.request();
  SpectralField f(grid_for(square_size(info), dealias_fraction));
  std::memcpy(f.coeffs().data(), info.ptr, f.size() * sizeof(Complex));
  return f;
}

ComplexArray to_array(const SpectralField& f) {
  const auto n = static_cast<py::ssize_t>(f.resolution());
  ComplexArray a({n, n});
  std::memcpy(a.mutable_data(), f.coeffs().data(), f.size() * sizeof(Complex));
  return a;
}

py::dict series_dict(const ErrorSeries& s) {
  std::vector<double> time, low, high, total, mu;
  for (const auto& r : s.records) {
    time.push_back(r.time);
    low.push_back(r.err_low);
    high.push_back(r.err_high);
    total.push_back(r.err_total);
    mu.push_back(r.mu_active);
  }
  auto arr = [](const std::vector<double>& v) { return RealArray(static_cast<py::ssize_t>(v.size()), v.data()); };
  py::dict d;
  d["time"] = arr(time);
  d["err_low"] = arr(low);
  d["err_high"] = arr(high);
  d["err_total"] = arr(total);
  d["mu_active"] = arr(mu);
  return d;
}

py::dict record_dict(const ErrorRecord& r) {
  py::dict d;
  d["err_low"] = r.err_low;
  d["err_high"] = r.err_high;
  d["err_total"] = r.err_total;
  return d;
}

py::dict sweep_dict(const SweepResult& r) {
  py::dict series;
  for (const auto& [label, s] : r.entries) series[py::str(label)] = series_dict(s);
  py::dict d;
  d["series"] = series;
  d["sup_to_reference"] = r.sup_to_reference;
  d["sup_errors"] = r.sup_errors;
  d["mu"] = r.mu_of;
  d["reference"] = r.reference_label;
  d["fit_slope"] = r.fit_slope;
  d["fit_mus"] = r.fit_mus;
  return d;
}

FlowState truth_from(const RunConfig& cfg, const ComplexArray& psi, double time) {
  return FlowState{to_field(psi, cfg.dealias_fraction), time};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "2D Navier-Stokes pseudo-spectral solver with continuous data assimilation";
  m.attr("__version__") = CDASIM_VERSION;

  auto base = py::register_exception<Error>(m, "CdasimError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());
  py::register_exception<BlowUpError>(m, "BlowUpError", base.ptr());

  py::class_<RunConfig>(m, "Config")
      .def(py::init([](const std::string& name) { return preset(name); }), py::arg("preset") = "desk")
      .def("set", [](RunConfig& c, const std::string& key, const py::object& value) {
        apply_setting(c, key, py::str(value).cast<std::string>());
      })
      .def("get", [](const RunConfig& c, const std::string& key) { return get_setting(c, key); })
      .def_static("keys", [] {
        std::vector<std::string> out;
        for (const auto& k : config_keys()) out.push_back(k.name);
        return out;
      })
      .def("text", [](const RunConfig& c) {
        std::ostringstream out;
        write_config(out, c);
        return out.str();
      })
      .def("__repr__", [](const RunConfig& c) { return "<cdasim.Config resolution=" + std::to_string(c.resolution) + ">"; });

  m.def("forward", [](const RealArray& values) {
    const auto info = values.request();
    PhysicalField p(grid_for(square_size(info)));
    std::memcpy(p.values.data(), info.ptr, p.values.size() * sizeof(double));
    return to_array(forward_transform(p));
  }, "Physical samples (rows y, columns x) to Fourier coefficients.");
  m.def("inverse", [](const ComplexArray& psi) {
    const PhysicalField p = inverse_transform(to_field(psi));
    const auto n = static_cast<py::ssize_t>(p.grid.resolution);
    RealArray a({n, n});
    std::memcpy(a.mutable_data(), p.values.data(), p.values.size() * sizeof(double));
    return a;
  });

  m.def("nonlinear_term", [](const ComplexArray& psi) { return to_array(nonlinear_term(to_field(psi))); });
  m.def("velocity_l2_norm", [](const ComplexArray& psi) { return velocity_l2_norm(to_field(psi)); });
  m.def("velocity_h1_norm", [](const ComplexArray& psi) { return velocity_h1_norm(to_field(psi)); });
  m.def("project_low", [](const ComplexArray& psi, double r) { return to_array(project_low(to_field(psi), r)); });
  m.def("hermitian_defect", [](const ComplexArray& psi) { return hermitian_defect(to_field(psi)); });
  m.def("error_metrics", [](const ComplexArray& ref, const ComplexArray& est, double n_obs) {
    return record_dict(error_metrics(to_field(ref), to_field(est), n_obs));
  });

  m.def("forcing", [](const RunConfig& c) { return to_array(make_solver_config(c).forcing); });
  m.def("step", [](const RunConfig& c, const ComplexArray& psi, double time, long long steps) {
    const SolverConfig solver = make_solver_config(c);
    const Integrator integ(solver);
    FlowState s = truth_from(c, psi, time);
    {
      py::gil_scoped_release release;
      for (long long i = 0; i < steps; ++i) s = integ.step(s);
    }
    return py::make_tuple(to_array(s.psi), s.time);
  }, py::arg("config"), py::arg("psi"), py::arg("time") = 0.0, py::arg("steps") = 1);
  m.def("spinup", [](const RunConfig& c) {
    FlowState s;
    {
      py::gil_scoped_release release;
      s = initial_truth(c);
    }
    return py::make_tuple(to_array(s.psi), s.time);
  }, "The truth's starting state for this config.");
  m.def("energy_report", [](const RunConfig& c, const ComplexArray& psi) {
    const EnergyReport r = energy_report(FlowState{to_field(psi, c.dealias_fraction), 0.0}, make_solver_config(c));
    py::dict d;
    d["energy"] = r.energy;
    d["enstrophy"] = r.enstrophy;
    d["grashof"] = r.grashof;
    d["shape_factor"] = r.shape_factor;
    d["rho0"] = r.rho0;
    d["rho1"] = r.rho1;
    return d;
  });
  m.def("observe", [](const ComplexArray& psi, double n_obs) {
    ObservationSpec spec;
    spec.n_obs = n_obs;
    return to_array(observe(FlowState{to_field(psi), 0.0}, spec).low_modes);
  });

  m.def("run_twin", [](const RunConfig& c, const ComplexArray& psi, double time) {
    const TwinConfig twin = make_twin_config(c);
    const FlowState truth0 = truth_from(c, psi, time);
    TwinResult r;
    {
      py::gil_scoped_release release;
      r = run_twin(twin, truth0);
    }
    py::dict out;
    for (const auto& s : r.series) out[py::str(s.filter_label)] = series_dict(s);
    return out;
  }, py::arg("config"), py::arg("psi"), py::arg("time") = 0.0, "Errors per filter label.");
  m.def("sweep_mu_infinite", [](const RunConfig& c, const ComplexArray& psi, double time, std::vector<double> mus) {
    const TwinConfig twin = make_twin_config(c);
    const FlowState truth0 = truth_from(c, psi, time);
    SweepResult r;
    {
      py::gil_scoped_release release;
      r = sweep_mu_infinite(twin, truth0, mus);
    }
    return sweep_dict(r);
  });
  m.def("sweep_mu_zero", [](const RunConfig& c, const ComplexArray& psi, double time, std::vector<double> mus) {
    const TwinConfig twin = make_twin_config(c);
    const FlowState truth0 = truth_from(c, psi, time);
    SweepResult r;
    {
      py::gil_scoped_release release;
      r = sweep_mu_zero(twin, truth0, mus);
    }
    return sweep_dict(r);
  });

  py::class_<AdaptiveState>(m, "AdaptiveController")
      .def(py::init([](double mu0, int window, double tol, double mu_floor) {
        return make_adaptive_state(AdaptiveSettings{mu0, window, tol, mu_floor});
      }), py::arg("mu0") = 1e5, py::arg("window") = 5, py::arg("tol") = 0.0, py::arg("mu_floor") = 1e-2)
      .def("update", [](AdaptiveState& a, double err, double dt) {
        a = adaptive_mu_update(std::move(a), err, dt);
        return a.mu;
      }, "Feeds one observed error; returns the mu now in force.")
      .def_readonly("mu", &AdaptiveState::mu);

  m.def("load_snapshot", [](const std::string& path) {
    const Snapshot s = load_snapshot(path);
    return py::make_tuple(to_array(s.psi), s.time, s.nu);
  });
  m.def("save_snapshot", [](const std::string& path, const ComplexArray& psi, double time, double nu) {
    save_snapshot(Snapshot{to_field(psi), time, nu}, path);
  });
}
