#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "hvi/cli.hpp"
#include "hvi/expression.hpp"
#include "hvi/verification.hpp"

namespace py = pybind11;
using namespace hvi;

namespace {

ScalarField field(const std::string& text) {
  Expression e = Expression::parse(text);
  return [e](double x, double y) { return e(x, y); };
}

Eigen::MatrixX2d vertex_array(const Mesh& m) {
  Eigen::MatrixX2d out(static_cast<Eigen::Index>(m.num_vertices()), 2);
  for (std::size_t v = 0; v < m.num_vertices(); ++v) {
    out(static_cast<Eigen::Index>(v), 0) = m.vertices[v].x;
    out(static_cast<Eigen::Index>(v), 1) = m.vertices[v].y;
  }
  return out;
}

py::dict report_dict(const SolveReport& r, const SolverOptions& o) {
  py::dict d;
  d["u"] = r.solution.values;
  d["kind"] = std::string(problem_kind_name(r.solution.kind));
  d["norm_V"] = r.solution.norm_V;
  d["iterations"] = r.iterations;
  d["converged"] = r.converged;
  d["interior_residual_max"] = r.certificate.interior_residual_max;
  d["gamma3_inclusion_max"] = r.certificate.gamma3_inclusion_max;
  d["certified"] = r.converged && r.certificate.within(o.tol_interior, o.tol_inclusion);
  d["message"] = r.message;
  return d;
}

}  // namespace

PYBIND11_MODULE(_hvi, m) {
  m.doc() = "Boundary hemivariational inequality solver";

  py::class_<Discretization>(m, "Discretization")
      .def(py::init([](int n) { return discretize(generate_unit_square_mesh(n)); }), py::arg("n"))
      .def_static("from_file", [](const std::filesystem::path& p) { return discretize(load_mesh_file(p)); })
      .def_property_readonly("vertices", [](const Discretization& d) { return vertex_array(d.mesh); })
      .def_property_readonly("num_vertices", [](const Discretization& d) { return d.mesh.num_vertices(); })
      .def_property_readonly("gamma3_nodes", [](const Discretization& d) { return d.gamma3.nodes; })
      .def("coercivity", [](const Discretization& d) {
        const auto e = estimate_coercivity(d);
        return py::make_tuple(e.m_a, e.gamma_norm);
      });

  py::class_<PotentialSpec>(m, "Potential")
      .def(py::init([](const std::string& id, double b, const std::map<std::string, double>& params) {
             return PotentialSpec::make(id, b, params);
           }),
           py::arg("id"), py::arg("b"), py::arg("params") = std::map<std::string, double>{})
      .def_property_readonly("name", [](const PotentialSpec& p) { return std::string(p.name()); })
      .def_property_readonly("b", &PotentialSpec::b)
      .def_property_readonly("convex", &PotentialSpec::convex)
      .def_property_readonly("breakpoints", &PotentialSpec::breakpoints)
      .def_property_readonly("m_j", &PotentialSpec::relaxed_monotonicity)
      .def("value", &PotentialSpec::value)
      .def("subdiff", [](const PotentialSpec& p, double r) {
        const Interval i = p.subdiff(r);
        return py::make_tuple(i.lo, i.hi);
      })
      .def("j0", &PotentialSpec::j0);

  m.def("builtin_potentials", [] {
    std::vector<std::string> out;
    for (auto id : builtin_potential_ids()) out.emplace_back(id);
    return out;
  });

  m.def(
      "solve",
      [](const Discretization& d, const std::string& kind, const std::string& g, const std::string& q, double b,
         double alpha, const std::optional<PotentialSpec>& p, std::optional<std::uint64_t> seed) {
        const ProblemData data = make_problem_data(d.mesh, field(g), field(q), b, alpha);
        SolverOptions opts;
        opts.seed = seed;
        SolveReport r;
        {
          py::gil_scoped_release release;
          if (kind == "dirichlet") {
            r = solve_dirichlet(d, data);
          } else if (kind == "robin") {
            r = solve_robin(d, data);
          } else if (kind == "robin_lumped") {
            r = solve_robin(d, data, BoundaryMassKind::Lumped);
          } else if (kind == "hvi" || kind == "vi_convex") {
            if (!p) throw std::invalid_argument(kind + " needs a potential");
            r = kind == "hvi" ? solve_hvi(d, data, *p, opts) : solve_vi_convex(d, data, *p, opts);
          } else {
            throw std::invalid_argument("unknown solve kind '" + kind + "'");
          }
        }
        return report_dict(r, opts);
      },
      py::arg("disc"), py::arg("kind") = "hvi", py::arg("g") = "0", py::arg("q") = "0", py::arg("b") = 0.0,
      py::arg("alpha") = 1.0, py::arg("potential") = std::nullopt, py::arg("seed") = std::nullopt);

  m.def(
      "describe_potential",
      [](const std::string& id, double b, const std::map<std::string, double>& params) {
        const auto d = describe_potential(id, b, params);
        return py::make_tuple(d.text, d.all_pass);
      },
      py::arg("id"), py::arg("b"), py::arg("params") = std::map<std::string, double>{});

  m.def(
      "run",
      [](const std::string& command, const std::filesystem::path& config, const std::filesystem::path& out) {
        const auto cmd = parse_command(command);
        if (!cmd) throw std::invalid_argument("unknown command '" + command + "'");
        py::gil_scoped_release release;
        return run_file(*cmd, config, out);
      },
      py::arg("command"), py::arg("config"), py::arg("out"));
}
