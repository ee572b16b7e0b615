#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "fracmem/run.hpp"

namespace py = pybind11;
using namespace fracmem;

namespace {

py::dict pair_dict(const OptimalPair& p) {
  py::dict d;
  d["lambda"] = p.lambda;
  d["u"] = p.u;
  d["in_d"] = p.d.in_d;
  d["threshold"] = p.threshold;
  d["history"] = p.history;
  d["status"] = to_string(p.status);
  d["iterations"] = p.iterations;
  d["start"] = p.start;
  return d;
}

MultiStartOptions multistart(std::uint64_t seed) {
  MultiStartOptions ms;
  ms.seed = seed;
  return ms;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "fracmem core bindings";
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

  py::class_<ShapeSpec>(m, "ShapeSpec")
      .def_static("interval", &ShapeSpec::interval, py::arg("lo"), py::arg("hi"))
      .def_static("rectangle", &ShapeSpec::rectangle, py::arg("half_x"), py::arg("half_y"))
      .def_static("disk", &ShapeSpec::disk, py::arg("radius"))
      .def_static("annulus", &ShapeSpec::annulus, py::arg("b"))
      .def_static("sector", &ShapeSpec::sector, py::arg("b"), py::arg("sectors"))
      .def_property_readonly("dim", &ShapeSpec::dim)
      .def("__repr__", &ShapeSpec::describe);

  py::class_<DomainMask>(m, "DomainMask")
      .def_property_readonly("size", &DomainMask::size)
      .def_property_readonly("measure", &DomainMask::measure)
      .def_property_readonly("n", [](const DomainMask& d) { return d.grid().n; })
      .def_property_readonly("h", [](const DomainMask& d) { return d.grid().h; })
      .def_property_readonly("dim", [](const DomainMask& d) { return d.grid().dim; })
      .def_property_readonly("cells", &DomainMask::cells)
      .def("centers", [](const DomainMask& d) {
        Eigen::MatrixXd xy(static_cast<Eigen::Index>(d.size()), 2);
        for (std::size_t k = 0; k < d.size(); ++k) {
          const auto c = d.grid().center(d.cell(k));
          xy(static_cast<Eigen::Index>(k), 0) = c[0];
          xy(static_cast<Eigen::Index>(k), 1) = c[1];
        }
        return xy;
      });

  py::class_<Configuration>(m, "Configuration")
      .def(py::init([](std::vector<std::uint8_t> in_d, double target) {
             return Configuration{std::move(in_d), target};
           }),
           py::arg("in_d"), py::arg("target_measure") = 0.0)
      .def_readonly("in_d", &Configuration::in_d)
      .def_readonly("target_measure", &Configuration::target_measure)
      .def("count", &Configuration::count);

  py::class_<FracOperator>(m, "FracOperator")
      .def_property_readonly("s", &FracOperator::s)
      .def_property_readonly("c_ns", &FracOperator::c_ns)
      .def_property_readonly("size", &FracOperator::size)
      .def_property_readonly("diagonal", &FracOperator::diagonal)
      .def_property_readonly("tail", &FracOperator::tail)
      .def_property_readonly("domain", &FracOperator::domain, py::return_value_policy::reference_internal)
      .def("apply", &FracOperator::apply, py::arg("field"))
      .def("dense_matrix", &FracOperator::dense_matrix)
      .def("weights_checksum", &FracOperator::weights_checksum);

  m.def("build_domain", &build_domain, py::arg("shape"), py::arg("resolution"));
  m.def("kernel_constant", &kernel_constant, py::arg("n"), py::arg("s"));
  m.def("assemble", [](const DomainMask& d, double s) { return assemble(d, s); }, py::arg("domain"),
        py::arg("s"));
  m.def("quadratic_form", &quadratic_form, py::arg("op"), py::arg("field"));

  m.def(
      "smallest_eigenpair",
      [](const FracOperator& op, std::optional<Field> potential) {
        const auto ep = smallest_eigenpair(op, potential ? *potential : Field::Zero(op.size()));
        return py::make_tuple(ep.lambda, ep.u);
      },
      py::arg("op"), py::arg("potential") = py::none(),
      "Lowest eigenpair (lambda, u) of M + diag(potential).");

  m.def(
      "rearrange",
      [](const Field& u, const DomainMask& d, double area) {
        const auto r = rearrange(u, d, area);
        return py::make_tuple(r.d.in_d, r.threshold);
      },
      py::arg("u"), py::arg("domain"), py::arg("area"));

  m.def(
      "optimize",
      [](const FracOperator& op, double alpha, double area, std::uint64_t seed) {
        return pair_dict(optimize_multistart(op, alpha, area, multistart(seed)));
      },
      py::arg("op"), py::arg("alpha"), py::arg("area"), py::arg("seed") = 1,
      "Best alternating-minimisation result over the default starts.");
  m.def(
      "lambda_opt",
      [](const FracOperator& op, double alpha, double area, std::uint64_t seed) {
        return lambda_opt(op, alpha, area, multistart(seed));
      },
      py::arg("op"), py::arg("alpha"), py::arg("area"), py::arg("seed") = 1);
  m.def(
      "radial_optimize",
      [](const FracOperator& op, double alpha, double area) { return pair_dict(radial_optimize(op, alpha, area)); },
      py::arg("op"), py::arg("alpha"), py::arg("area"));
  m.def(
      "alpha_bar",
      [](const FracOperator& op, double area, double tol) {
        AlphaBarOptions o;
        o.tol = tol;
        const auto r = alpha_bar(op, area, o);
        return py::make_tuple(r.alpha, r.residual);
      },
      py::arg("op"), py::arg("area"), py::arg("tol") = 1e-8);

  m.def(
      "pn_convert",
      [](double floor, double ceiling, double mass, double theta, double omega) {
        const auto r = pn_convert({floor, ceiling, mass, theta}, omega);
        return py::make_tuple(r.alpha, r.area, r.lambda);
      },
      py::arg("density_floor"), py::arg("density_ceiling"), py::arg("mass"), py::arg("theta"),
      py::arg("omega_measure"));
  m.def(
      "pn_inverse",
      [](double alpha, double area, double lambda, double omega, double theta) {
        const auto p = pn_inverse({alpha, area, lambda}, omega, theta);
        return py::make_tuple(p.density_floor, p.density_ceiling, p.mass, p.theta);
      },
      py::arg("alpha"), py::arg("area"), py::arg("lambda_"), py::arg("omega_measure"), py::arg("theta"));

  m.def("steiner", &steiner, py::arg("u"), py::arg("domain"), py::arg("axis"));
  m.def(
      "asymmetry", [](const Field& v, const DomainMask& d) { return asymmetry(v, d); }, py::arg("values"),
      py::arg("domain"));
  m.def(
      "b_operator",
      [](double b, std::vector<double> values, double r, double s, int mode) {
        return b_operator(RadialProfile{b, std::move(values)}, r, s, mode);
      },
      py::arg("b"), py::arg("values"), py::arg("r"), py::arg("s"), py::arg("mode"));

  m.def(
      "run_command",
      [](const std::string& command, const std::filesystem::path& config,
         std::optional<std::filesystem::path> out, std::optional<std::uint64_t> seed) {
        std::ostringstream err;
        const int code = run_command(command, config, out, seed, err);
        return py::make_tuple(code, err.str());
      },
      py::arg("command"), py::arg("config"), py::arg("out") = py::none(), py::arg("seed") = py::none(),
      "Runs a CLI command; returns (exit_code, diagnostics).");
}
