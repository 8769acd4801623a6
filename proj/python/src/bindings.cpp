#include <optional>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "qgraph/diagnostics.hpp"
#include "qgraph/dirichlet.hpp"
#include "qgraph/error.hpp"
#include "qgraph/fem.hpp"
#include "qgraph/graph.hpp"
#include "qgraph/io.hpp"
#include "qgraph/sde.hpp"
#include "qgraph/solver.hpp"
#include "qgraph/spectral.hpp"

namespace py = pybind11;
using namespace qgraph;

namespace {

Space parse_space(const std::string& name) {
  if (name == "continuous") return Space::Continuous;
  if (name == "broken") return Space::Broken;
  throw Error(ErrorKind::InvalidArgument, "space must be 'continuous' or 'broken', got '" + name + "'");
}

py::dict verdict_dict(const SeriesVerdict& v) {
  py::dict d;
  d["verdict"] = to_string(v.verdict);
  d["slope"] = v.slope;
  d["ci_low"] = v.ci_low;
  d["ci_high"] = v.ci_high;
  d["tail_first"] = v.tail_first;
  d["increments"] = v.increments;
  d["partial_sums"] = v.partial_sums;
  return d;
}

}  // namespace

PYBIND11_MODULE(_qgraph, m) {
  m.doc() = "Stochastic evolution equations on metric graphs with dynamic boundary noise";
  m.attr("__version__") = kVersion;

  static py::handle error_type = py::exception<Error>(m, "QGraphError", PyExc_RuntimeError).release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type)(std::string(e.kind_name()) + ": " + e.what());
      exc.attr("kind") = e.kind_name();
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  py::class_<Edge>(m, "Edge")
      .def_readonly("id", &Edge::id)
      .def_readonly("tail", &Edge::tail)
      .def_readonly("head", &Edge::head)
      .def_readonly("length", &Edge::length)
      .def_property_readonly("conductance", [](const Edge& e) { return e.coeffs.conductance; })
      .def_property_readonly("potential", [](const Edge& e) { return e.coeffs.potential; });

  py::class_<MetricGraph>(m, "MetricGraph")
      .def_static("from_json", [](const std::string& text) { return MetricGraph::validate(parse_graph_spec(text)); },
                  py::arg("text"))
      .def_static("load", &load_graph, py::arg("path"))
      .def_static("interval", &make_interval, py::arg("length") = 1.0, py::arg("conductance") = 1.0,
                  py::arg("potential") = 0.0)
      .def_static("path", &make_path, py::arg("edges"), py::arg("length") = 1.0)
      .def_static("star", &make_star, py::arg("arms"), py::arg("length") = 1.0, py::arg("conductance") = 1.0)
      .def_property_readonly("vertex_count", &MetricGraph::vertex_count)
      .def_property_readonly("edge_count", &MetricGraph::edge_count)
      .def_property_readonly("vertex_ids",
                             [](const MetricGraph& g) {
                               std::vector<std::string> ids;
                               for (std::size_t v = 0; v < g.vertex_count(); ++v) ids.push_back(g.vertex_id(v));
                               return ids;
                             })
      .def_property_readonly("edges", &MetricGraph::edges)
      .def_property_readonly("warnings", &MetricGraph::warnings)
      .def("vertex_index", [](const MetricGraph& g, const std::string& id) { return g.vertex_index(id); })
      .def("degree", &MetricGraph::degree)
      .def("total_length", &MetricGraph::total_length)
      .def("to_json", [](const MetricGraph& g) { return graph_to_json(g); });

  py::class_<Mesh>(m, "Mesh")
      .def(py::init([](const MetricGraph& g, double h, const std::string& space) {
             return Mesh::build(g, h, parse_space(space));
           }),
           py::arg("graph"), py::arg("h"), py::arg("space") = "continuous")
      .def_property_readonly("dof_count", &Mesh::dof_count)
      .def_property_readonly("space",
                             [](const Mesh& mesh) { return mesh.space() == Space::Continuous ? "continuous" : "broken"; })
      .def_property_readonly("graph", &Mesh::graph)
      .def("cells", &Mesh::cells)
      .def("node_x", &Mesh::node_x)
      .def("node_dof", &Mesh::node_dof)
      .def("vertex_dof", &Mesh::vertex_dof)
      .def("with_space", [](const Mesh& mesh, const std::string& space) { return mesh.with_space(parse_space(space)); })
      .def("interpolate", [](const Mesh& mesh, const std::function<double(std::size_t, double)>& f) {
        return interpolate(mesh, f);
      });

  py::class_<FormMatrices>(m, "FormMatrices")
      .def_readonly("K", &FormMatrices::K)
      .def_readonly("M", &FormMatrices::M)
      .def_readonly("lumped_mass", &FormMatrices::lumped_mass);
  m.def("assemble_form", &assemble_form, py::arg("mesh"));
  m.def("vertex_trace", py::overload_cast<const Mesh&, const Eigen::VectorXd&>(&vertex_trace), py::arg("mesh"),
        py::arg("u"));

  py::class_<SpectralBasis>(m, "SpectralBasis")
      .def_readonly("lambdas", &SpectralBasis::lambdas)
      .def_readonly("eigvecs", &SpectralBasis::eigvecs)
      .def_readonly("vertex_traces", &SpectralBasis::vertex_traces)
      .def_readonly("deriv_traces", &SpectralBasis::deriv_traces)
      .def_readonly("lambda_shift", &SpectralBasis::lambda_shift)
      .def_property_readonly("mode_count", &SpectralBasis::mode_count);
  m.def("eigensolve", &eigensolve, py::arg("mesh"), py::arg("form"), py::arg("n_modes"),
        py::arg("lambda_shift") = 1.0);
  m.def("pinned_spectrum", &pinned_spectrum, py::arg("mesh"), py::arg("form"), py::arg("pinned_vertices"),
        py::arg("count"));
  m.def(
      "asymptotics_check",
      [](const SpectralBasis& b, double shift, std::size_t first, std::size_t last) {
        const auto r = asymptotics_check(b, shift, first, last);
        return py::dict(py::arg("l1") = r.l1, py::arg("l2") = r.l2, py::arg("slope") = r.loglog_slope);
      },
      py::arg("basis"), py::arg("shift"), py::arg("k_first"), py::arg("k_last"));
  m.def(
      "vertex_bound_estimate",
      [](const SpectralBasis& b) {
        const auto r = vertex_bound_estimate(b);
        return py::dict(py::arg("trace_norm2") = r.trace_norm2, py::arg("running_max") = r.running_max,
                        py::arg("sup") = r.sup, py::arg("growth_ratio") = r.growth_ratio,
                        py::arg("multiplets") = r.multiplets.size());
      },
      py::arg("basis"));

  py::class_<DirichletMapK>(m, "DirichletMapK")
      .def_readonly("columns", &DirichletMapK::columns)
      .def_readonly("lam", &DirichletMapK::lambda);
  m.def("dirichlet_map_K", &dirichlet_map_K, py::arg("mesh"), py::arg("form"), py::arg("lam"));
  m.def("adjoint_coefficients", &adjoint_coefficients, py::arg("mesh"), py::arg("form"), py::arg("basis"),
        py::arg("map"));
  m.def("drive_from_adjoint", &drive_from_adjoint, py::arg("basis"), py::arg("coefficients"), py::arg("lam"));

  py::class_<AnalyticFullSolution>(m, "AnalyticFullSolution")
      .def("value", &AnalyticFullSolution::value, py::arg("edge"), py::arg("x"))
      .def("derivative", &AnalyticFullSolution::derivative, py::arg("edge"), py::arg("x"))
      .def("end_values", &AnalyticFullSolution::end_values)
      .def("end_derivatives", &AnalyticFullSolution::end_derivatives);
  m.def("dirichlet_map_full",
        py::overload_cast<const MetricGraph&, double, const Eigen::VectorXd&>(&dirichlet_map_full),
        py::arg("graph"), py::arg("lam"), py::arg("z"));
  m.def("apply_boundary_operator", &apply_boundary_operator, py::arg("graph"), py::arg("end_values"),
        py::arg("derivatives"));
  m.def("full_drive_from_traces", &full_drive_from_traces, py::arg("graph"), py::arg("basis"));

  py::class_<SurjectivityResult>(m, "SurjectivityResult")
      .def_readonly("gamma", &SurjectivityResult::gamma)
      .def_readonly("doublings", &SurjectivityResult::doublings)
      .def_readonly("contraction", &SurjectivityResult::contraction)
      .def_readonly("residual_inf", &SurjectivityResult::residual_inf)
      .def_readonly("alpha", &SurjectivityResult::alpha)
      .def_readonly("beta", &SurjectivityResult::beta);
  m.def("surjectivity_construct", &surjectivity_construct, py::arg("graph"), py::arg("z"));
  m.def("surjectivity_contraction", &surjectivity_contraction, py::arg("graph"), py::arg("gamma"));

  py::class_<NoiseConfig>(m, "NoiseConfig")
      .def(py::init([](const Eigen::MatrixXd& q, std::uint64_t seed, double dt, double T) {
             NoiseConfig cfg{q, seed, dt, T};
             cfg.validate();
             return cfg;
           }),
           py::arg("covariance"), py::arg("seed"), py::arg("dt"), py::arg("T"))
      .def_readonly("covariance", &NoiseConfig::covariance)
      .def_readonly("seed", &NoiseConfig::seed)
      .def_readonly("dt", &NoiseConfig::dt)
      .def_readonly("T", &NoiseConfig::T);

  py::class_<OUEnsemble>(m, "OUEnsemble")
      .def_readonly("lambdas", &OUEnsemble::lambdas)
      .def_readonly("drives", &OUEnsemble::drives)
      .def_readonly("sigma2", &OUEnsemble::sigma2);
  m.def("build_drive_K", &build_drive_K, py::arg("basis"));
  m.def("build_drive_full", &build_drive_full, py::arg("graph"), py::arg("basis"));
  m.def("make_ensemble", &make_ensemble, py::arg("lambdas"), py::arg("drives"), py::arg("config"));
  m.def(
      "simulate_convolution",
      [](const OUEnsemble& ens, const NoiseConfig& cfg, std::uint64_t path, std::size_t record_every) {
        const auto s = simulate_convolution(ens, cfg, path, record_every);
        return py::make_tuple(s.times, s.states);
      },
      py::arg("ensemble"), py::arg("config"), py::arg("path") = 0, py::arg("record_every") = 1,
      "Returns (times, states) with one state column per time.");
  m.def(
      "simulate_ensemble",
      [](const OUEnsemble& ens, const NoiseConfig& cfg, std::size_t paths, const std::vector<double>& checkpoints,
         std::size_t threads) {
        EnsembleSample s;
        {
          py::gil_scoped_release release;
          s = simulate_ensemble(ens, cfg, paths, checkpoints, threads);
        }
        return py::make_tuple(s.times, s.states);
      },
      py::arg("ensemble"), py::arg("config"), py::arg("paths"), py::arg("checkpoints"), py::arg("threads") = 0,
      "Returns (times, states) with a paths x modes matrix per checkpoint.");
  m.def("exact_covariance", &exact_covariance, py::arg("ensemble"), py::arg("t"));

  m.def("frac_norm", &frac_norm, py::arg("coefficients"), py::arg("basis"), py::arg("lam"), py::arg("alpha"));
  m.def(
      "classify_series",
      [](const Eigen::VectorXd& inc, std::size_t min_modes) { return verdict_dict(classify_series(inc, min_modes)); },
      py::arg("increments"), py::arg("min_modes") = kMinSeriesModes);
  m.def(
      "regularity_series_K",
      [](const SpectralBasis& b, const Eigen::MatrixXd& q, double alpha, double t) {
        return verdict_dict(regularity_series_K(b, q, alpha, t));
      },
      py::arg("basis"), py::arg("covariance"), py::arg("alpha"), py::arg("t"));
  m.def(
      "regularity_series_full",
      [](const SpectralBasis& b, const Eigen::MatrixXd& drives, const Eigen::MatrixXd& q, double alpha, double t) {
        return verdict_dict(regularity_series_full(b, drives, q, alpha, t));
      },
      py::arg("basis"), py::arg("full_drives"), py::arg("covariance"), py::arg("alpha"), py::arg("t"));
  m.def(
      "trace_class_check", [](const SpectralBasis& b, double T) { return verdict_dict(trace_class_check(b, T)); },
      py::arg("basis"), py::arg("T"));
  m.def(
      "empirical_alpha_fit",
      [](const Eigen::MatrixXd& states, const SpectralBasis& b, double lam, const std::vector<double>& grid,
         std::size_t bootstrap, std::uint64_t seed) {
        const auto f = empirical_alpha_fit(states, b, lam, grid, bootstrap, seed);
        return py::dict(py::arg("status") = to_string(f.status), py::arg("threshold") = f.threshold,
                        py::arg("ci_low") = f.ci_low, py::arg("ci_high") = f.ci_high, py::arg("alphas") = f.alphas,
                        py::arg("slopes") = f.slopes);
      },
      py::arg("states"), py::arg("basis"), py::arg("lam"), py::arg("alpha_grid"), py::arg("bootstrap") = 200,
      py::arg("seed") = 1);

  py::class_<Drift>(m, "Drift")
      .def_static("zero", &Drift::zero)
      .def_static("linear", &Drift::linear, py::arg("a"))
      .def_static("sine", &Drift::sine, py::arg("L") = 1.0)
      .def_static("cubic", &Drift::cubic)
      .def_static("polynomial", &Drift::polynomial, py::arg("coefficients"))
      .def_static("parse", &parse_drift_spec, py::arg("text"))
      .def_readonly("name", &Drift::name)
      .def_readonly("lipschitz", &Drift::lipschitz);

  py::class_<GalerkinSpace>(m, "GalerkinSpace")
      .def(py::init<const Mesh&, const FormMatrices&, const SpectralBasis&>(), py::arg("mesh"), py::arg("form"),
           py::arg("basis"))
      .def_property_readonly("mode_count", &GalerkinSpace::mode_count)
      .def("reconstruct", &GalerkinSpace::reconstruct, py::arg("x"))
      .def("drift_coefficients", &GalerkinSpace::drift_coefficients, py::arg("drift"), py::arg("x"));
  m.def(
      "project_initial",
      [](const GalerkinSpace& s, const FormMatrices& f, const Eigen::VectorXd& u0) {
        const auto p = project_initial(s, f, u0);
        return py::make_tuple(p.coefficients, p.residual);
      },
      py::arg("space"), py::arg("form"), py::arg("u0"), "Returns (coefficients, residual).");
  m.def("step", &step, py::arg("space"), py::arg("x"), py::arg("drift"), py::arg("dZ"), py::arg("dt"));
  m.def(
      "solve_mild",
      [](const GalerkinSpace& s, const Drift& drift, const std::optional<OUEnsemble>& ens,
         const std::optional<NoiseConfig>& cfg, std::uint64_t path, const Eigen::VectorXd& x0, double T, double dt,
         std::size_t record_every) {
        std::optional<NoiseInput> noise;
        if (ens.has_value() != cfg.has_value()) {
          throw Error(ErrorKind::InvalidArgument, "ensemble and config must be given together");
        }
        if (ens) noise = NoiseInput{*ens, *cfg, path, 1};
        const auto sol = solve_mild(s, drift, noise, x0, T, dt, record_every);
        return py::make_tuple(sol.times, sol.coefficients);
      },
      py::arg("space"), py::arg("drift"), py::arg("ensemble") = py::none(), py::arg("config") = py::none(),
      py::arg("path") = 0, py::arg("x0"), py::arg("T"), py::arg("dt"), py::arg("record_every") = 1,
      "Returns (times, coefficients) with one column per recorded time.");
}
