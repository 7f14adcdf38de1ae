#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <stdexcept>

#include "calabi/bounds.hpp"
#include "calabi/experiment.hpp"
#include "calabi/flow.hpp"
#include "calabi/geometry.hpp"
#include "calabi/potential.hpp"
#include "calabi/weak.hpp"

namespace py = pybind11;
using namespace calabi;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

ScalarField to_field(const Array& a) {
  const auto info = a.request();
  if (info.ndim == 1) {
    return ScalarField(PeriodicGrid(1, static_cast<int>(info.shape[0])),
                       std::vector<double>(a.data(), a.data() + info.shape[0]));
  }
  if (info.ndim == 2 && info.shape[0] == info.shape[1]) {
    const auto n = info.shape[0];
    return ScalarField(PeriodicGrid(2, static_cast<int>(n)), std::vector<double>(a.data(), a.data() + n * n));
  }
  throw std::invalid_argument("expected an array of shape (N,) or (N, N)");
}

Array to_array(const ScalarField& f) {
  const auto n = static_cast<py::ssize_t>(f.grid().points_per_axis());
  Array out(f.grid().dim() == 1 ? std::vector<py::ssize_t>{n} : std::vector<py::ssize_t>{n, n});
  std::copy(f.values().begin(), f.values().end(), out.mutable_data());
  return out;
}

py::dict row_dict(const MonitorRow& r) {
  py::dict d;
  d["t"] = r.t;
  d["step"] = r.step;
  d["calabi"] = r.calabi;
  d["mabuchi"] = r.mabuchi;
  d["total"] = r.total;
  d["max_rm"] = r.max_rm;
  d["max_grad"] = r.max_grad;
  d["bound_t2"] = r.bound_t2;
  d["bound_sqrt"] = r.bound_sqrt;
  d["dist_flat"] = r.dist_flat;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Calabi flow on tori";
  m.attr("__version__") = CALABI_VERSION;

  py::register_exception<ConvexityLoss>(m, "ConvexityLoss", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def(
      "abreu_scalar_curvature", [](const Array& f) { return to_array(abreu_scalar_curvature({to_field(f)})); },
      py::arg("f"), "Scalar curvature of u = f + |x|^2/2.");
  m.def(
      "riemann_norm", [](const Array& f) { return to_array(riemann_norm({to_field(f)})); }, py::arg("f"),
      "Pointwise |Rm| of u = f + |x|^2/2.");
  m.def(
      "energies",
      [](const Array& f) {
        const auto r = energies({to_field(f)});
        py::dict d;
        d["calabi_energy"] = r.calabi_energy;
        d["mabuchi_energy"] = r.mabuchi_energy;
        d["total_energy"] = r.total_energy;
        d["max_rm"] = r.max_rm;
        d["max_grad"] = r.max_grad;
        d["weak"] = r.weak;
        return d;
      },
      py::arg("f"));
  m.def(
      "legendre_transform", [](const Array& phi) { return to_array(legendre_transform(KahlerPotential{to_field(phi)}).periodic); },
      py::arg("phi"), "Periodic part of the conjugate of xi -> phi(xi) + |xi|^2/2, mean zero.");
  m.def(
      "inverse_legendre_transform",
      [](const Array& f) { return to_array(legendre_transform(SymplecticPotential{to_field(f)}).periodic); },
      py::arg("f"), "Periodic part of the conjugate of x -> f(x) + |x|^2/2, mean zero.");
  m.def(
      "mabuchi_distance",
      [](const Array& a, const Array& b) { return mabuchi_distance({to_field(a)}, {to_field(b)}); }, py::arg("a"),
      py::arg("b"));
  m.def(
      "mollify", [](const Array& f, double h) { return to_array(mollify(to_field(f), MollifierSpec{h})); },
      py::arg("f"), py::arg("h"));
  m.def(
      "quartic_example", [](int dim, int n) { return to_array(quartic_example(PeriodicGrid(dim, n)).f); },
      py::arg("dim"), py::arg("N"));
  m.def(
      "approx_potential",
      [](const Array& f, int index, bool search) {
        const ScalarField field = to_field(f);
        const auto schedule = search ? choose_schedule(weak_from_field(field), index) : ApproxSchedule::identity(index);
        return to_array(approx_potential(field, index, schedule).periodic);
      },
      py::arg("f"), py::arg("m"), py::arg("search") = false);

  m.def(
      "run_flow",
      [](const Array& f, double t_end, double sigma, int monitor_every, bool adaptive, const std::string& integrator) {
        FlowConfig c;
        c.t_end = t_end;
        c.dt_safety = sigma;
        c.monitor_every = monitor_every;
        c.adaptive = adaptive;
        if (integrator == "rk4") {
          c.integrator = Integrator::kRk4;
        } else if (integrator != "etdrk4") {
          throw std::invalid_argument("integrator must be 'etdrk4' or 'rk4'");
        }
        const SymplecticPotential start{to_field(f)};
        const RunResult r = [&] {
          py::gil_scoped_release release;
          return run(start, c);
        }();
        py::list rows;
        for (const auto& row : r.log.rows) rows.append(row_dict(row));
        py::dict out;
        out["f"] = to_array(r.state.pot.periodic);
        out["t"] = r.state.t;
        out["steps"] = r.state.step_count;
        out["status"] = to_string(r.state.status);
        out["message"] = r.state.message;
        out["rows"] = rows;
        return out;
      },
      py::arg("f"), py::arg("t_end"), py::arg("sigma") = 0.5, py::arg("monitor_every") = 100,
      py::arg("adaptive") = true, py::arg("integrator") = "etdrk4");

  m.def(
      "constants",
      [](double M, double C0, double CE, int n) {
        const auto l = constants({M, C0, CE, n});
        py::dict d;
        d["C1"] = l.C1;
        d["C2"] = l.C2;
        d["C3"] = l.C3;
        d["R0"] = l.R0;
        d["exponent"] = l.exponent;
        d["max_radius"] = l.max_radius;
        d["lambda"] = l.lambda;
        return d;
      },
      py::arg("M") = 1.0, py::arg("C0") = 1.0, py::arg("CE") = 1.0, py::arg("n") = 2);
  m.def(
      "prop31_search",
      [](const std::vector<double>& x, const std::vector<double>& f, double M, double C, int n) {
        const auto r = prop31_search(x, f, M, C, n);
        py::dict d;
        d["x0"] = r.x0 ? py::cast(*r.x0) : py::none();
        d["ceiling"] = r.ceiling;
        d["inverse_integral"] = r.inverse_integral;
        d["tail_estimate"] = r.tail_estimate;
        d["within_ceiling"] = r.within_ceiling;
        return d;
      },
      py::arg("x"), py::arg("f"), py::arg("M"), py::arg("C"), py::arg("n"));

  m.def(
      "run_experiment",
      [](const std::string& experiment, const std::map<std::string, std::string>& settings) {
        std::vector<std::pair<std::string, std::string>> overrides(settings.begin(), settings.end());
        const auto config = parse_config(std::nullopt, overrides, experiment);
        py::gil_scoped_release release;
        return static_cast<int>(run_experiment(config));
      },
      py::arg("experiment"), py::arg("settings") = std::map<std::string, std::string>{},
      "Runs one experiment with key = value settings; returns the exit status.");
}
