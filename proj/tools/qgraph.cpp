#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "qgraph/diagnostics.hpp"
#include "qgraph/dirichlet.hpp"
#include "qgraph/error.hpp"
#include "qgraph/io.hpp"
#include "qgraph/sde.hpp"
#include "qgraph/solver.hpp"
#include "qgraph/spectral.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qgraph;

namespace {

struct Options {
  std::string graph;
  double h = 1.0 / 128;
  std::size_t modes = 0;
  double lambda = 1.0;
  std::string alpha;
  double T = 1.0;
  double dt = 1e-3;
  std::size_t paths = 0;
  std::optional<std::uint64_t> seed;
  std::string noise;
  std::string drift = "zero";
  std::string u0 = "mode:2";
  std::string out = "qgraph_out";
};

MetricGraph resolve_graph(const std::string& name) {
  if (name.empty()) throw Error(ErrorKind::ValidationError, "--graph is required");
  if (fs::exists(name)) return load_graph(name);
  if (name == "interval") return make_interval();
  if (name == "path2") return make_path(2);
  if (name == "star3") return make_star(3);
  throw Error(ErrorKind::ParseError, "no graph file or builtin graph named '" + name + "'");
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::ValidationError, what);
}

std::uint64_t require_seed(const Options& o, const std::string& command) {
  require(o.seed.has_value(), "--seed is required for " + command);
  return *o.seed;
}

void validate_common(const Options& o) {
  require(std::isfinite(o.h) && o.h > 0.0, "--h must be positive");
  require(std::isfinite(o.lambda) && o.lambda > 0.0, "--lambda must be positive");
  require(std::isfinite(o.T) && o.T >= 0.0, "--T must be nonnegative");
  require(std::isfinite(o.dt) && o.dt > 0.0, "--dt must be positive");
}

json config_json(const std::string& command, const Options& o) {
  json c{{"command", command}, {"graph", o.graph}, {"h", o.h},         {"modes", o.modes},
         {"lambda", o.lambda}, {"alpha", o.alpha}, {"T", o.T},         {"dt", o.dt},
         {"paths", o.paths},   {"noise", o.noise}, {"drift", o.drift}, {"u0", o.u0}};
  c["seed"] = o.seed ? json(*o.seed) : json(nullptr);
  return c;
}

struct Setup {
  MetricGraph graph;
  Mesh mesh;
  FormMatrices form;
  SpectralBasis basis;
};

Setup discretize(const Options& o, std::size_t default_modes) {
  MetricGraph g = resolve_graph(o.graph);
  for (const auto& w : g.warnings()) std::cerr << "warning: " << w << "\n";
  Mesh mesh = build_mesh(g, o.h, Space::Continuous);
  FormMatrices form = assemble_form(mesh);
  std::size_t modes = o.modes;
  if (modes == 0) modes = std::min(default_modes, mesh.dof_count() / 4);
  SpectralBasis basis = eigensolve(mesh, form, modes, o.lambda);
  return {std::move(g), std::move(mesh), std::move(form), std::move(basis)};
}

void finish(const Options& o, const std::string& command, const std::vector<std::string>& outputs) {
  const json c = config_json(command, o);
  write_manifest(o.out, command, c.dump(), outputs, o.seed ? std::to_string(*o.seed) : "none");
  std::cout << "wrote " << fmt::format("{}", fmt::join(outputs, ", ")) << " and manifest.json to " << o.out << "\n";
}

std::string json_number(double v) { return std::isfinite(v) ? format_number(v) : "null"; }

json verdict_json(double alpha, const SeriesVerdict& v) {
  json j;
  j["alpha"] = alpha;
  j["slope"] = std::isfinite(v.slope) ? json(v.slope) : json(nullptr);
  j["ci"] = {std::isfinite(v.ci_low) ? json(v.ci_low) : json(nullptr),
             std::isfinite(v.ci_high) ? json(v.ci_high) : json(nullptr)};
  j["verdict"] = to_string(v.verdict);
  j["thresholds"] = {{"converge_below", v.converge_below}, {"diverge_above", v.diverge_above}};
  j["tail_first_mode"] = v.tail_first + 1;
  j["partial_sums"] = std::vector<double>(v.partial_sums.data(), v.partial_sums.data() + v.partial_sums.size());
  return j;
}

Eigen::MatrixXd drives_for(const NoiseSpec& noise, const Setup& s) {
  return noise.kind == NoiseKind::Full ? build_drive_full(s.graph, s.basis) : build_drive_K(s.basis);
}

int run_spectrum(const Options& o) {
  validate_common(o);
  const Setup s = discretize(o, 100);
  const std::size_t n = s.basis.mode_count();
  const auto vb = vertex_bound_estimate(s.basis);
  CsvTable table({"k", "lambda", "trace_norm2", "deriv_trace_norm"});
  for (std::size_t k = 0; k < n; ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    table.add_row(std::vector<double>{static_cast<double>(k + 1), s.basis.lambdas(i), vb.trace_norm2(i),
                                      s.basis.deriv_traces.col(i).norm()});
  }
  fs::create_directories(o.out);
  table.write(fs::path(o.out) / "spectrum.csv");

  json report;
  const std::size_t k_first = std::min<std::size_t>(10, n), k_last = std::min<std::size_t>(40, n);
  if (k_last > k_first) {
    const auto a = asymptotics_check(s.basis, o.lambda, k_first, k_last);
    report["asymptotics"] = {{"k_range", {k_first, k_last}}, {"l1", a.l1}, {"l2", a.l2}, {"loglog_slope", a.loglog_slope}};
    std::cout << fmt::format("asymptotics k={}..{}: l1={:.6g} l2={:.6g} slope={:.6g}\n", k_first, k_last, a.l1, a.l2,
                             a.loglog_slope);
  }
  report["vertex_bound"] = {{"sup", vb.sup}, {"growth_ratio", vb.growth_ratio}, {"multiplets", vb.multiplets.size()}};
  report["modes"] = n;
  report["dofs"] = s.mesh.dof_count();
  write_text(fs::path(o.out) / "report.json", report.dump(2) + "\n");
  std::cout << fmt::format("modes={} sup|Lf|^2={:.6g} growth_ratio={:.6g}\n", n, vb.sup, vb.growth_ratio);
  finish(o, "spectrum", {"spectrum.csv", "report.json"});
  return 0;
}

int run_dirichlet(const Options& o) {
  validate_common(o);
  const Setup s = discretize(o, 40);
  const MetricGraph& g = s.graph;
  const auto dk = dirichlet_map_K(s.mesh, s.form, o.lambda);
  const Eigen::MatrixXd coeffs = adjoint_coefficients(s.mesh, s.form, s.basis, dk);
  const Eigen::MatrixXd scaled = drive_from_adjoint(s.basis, coeffs, o.lambda);
  const SparseMatrix A = s.form.K + o.lambda * s.form.M;

  CsvTable kcols({"column", "vertex", "value", "system_residual"});
  for (std::size_t i = 0; i < g.vertex_count(); ++i) {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.mesh.dof_count()));
    rhs(static_cast<Eigen::Index>(s.mesh.vertex_dof(i))) = 1.0;
    const double res = (A * dk.columns.col(static_cast<Eigen::Index>(i)) - rhs).lpNorm<Eigen::Infinity>();
    for (std::size_t v = 0; v < g.vertex_count(); ++v) {
      const double val = dk.columns(static_cast<Eigen::Index>(s.mesh.vertex_dof(v)), static_cast<Eigen::Index>(i));
      kcols.add_row(std::vector<std::string>{g.vertex_id(i), g.vertex_id(v), format_number(val), format_number(res)});
    }
  }
  CsvTable adj({"vertex", "k", "pairing", "scaled_pairing", "trace", "abs_error"});
  double max_err = 0.0;
  const double trace_scale = std::max(1e-300, s.basis.vertex_traces.cwiseAbs().maxCoeff());
  for (Eigen::Index k = 0; k < coeffs.cols(); ++k) {
    for (Eigen::Index i = 0; i < coeffs.rows(); ++i) {
      const double err = std::abs(scaled(i, k) - s.basis.vertex_traces(i, k));
      max_err = std::max(max_err, err);
      adj.add_row(std::vector<std::string>{g.vertex_id(static_cast<std::size_t>(i)), std::to_string(k + 1),
                                           format_number(coeffs(i, k)), format_number(scaled(i, k)),
                                           format_number(s.basis.vertex_traces(i, k)), format_number(err)});
    }
  }

  const Mesh broken = s.mesh.with_space(Space::Broken);
  const FormMatrices bform = assemble_form(broken);
  const auto full = dirichlet_map_full(broken, bform, o.lambda);
  const auto ops = jump_and_flux_operators(broken, bform, o.lambda);
  bool analytic = true;
  for (const auto& e : g.edges()) analytic = analytic && e.coeffs.is_piecewise_constant();
  CsvTable fcols({"column", "end", "fem_value", "analytic_value"});
  double roundtrip = 0.0, analytic_gap = 0.0;
  const auto width = static_cast<Eigen::Index>(2 * g.edge_count());
  const auto nc = static_cast<Eigen::Index>(g.continuity_row_count());
  for (Eigen::Index j = 0; j < width; ++j) {
    const Eigen::VectorXd col = full.columns.col(j);
    Eigen::VectorXd b(width);
    b << ops.jump * col, ops.flux * col;
    b(j) -= 1.0;
    roundtrip = std::max(roundtrip, b.lpNorm<Eigen::Infinity>());
    Eigen::VectorXd sample;
    if (analytic) {
      sample = dirichlet_map_full(g, o.lambda, Eigen::VectorXd::Unit(width, j)).sample(broken);
      analytic_gap = std::max(analytic_gap, (sample - col).lpNorm<Eigen::Infinity>());
    }
    for (Eigen::Index end = 0; end < width; ++end) {
      fcols.add_row(std::vector<std::string>{std::to_string(j), std::to_string(end), format_number(col(end)),
                                             analytic ? format_number(sample(end)) : "nan"});
    }
  }
  fs::create_directories(o.out);
  kcols.write(fs::path(o.out) / "dirichlet_K.csv");
  adj.write(fs::path(o.out) / "adjoint.csv");
  fcols.write(fs::path(o.out) / "dirichlet_full.csv");
  json report{{"lambda", o.lambda},
              {"adjoint_max_abs_error", max_err},
              {"adjoint_relative_error", max_err / trace_scale},
              {"full_roundtrip_residual", roundtrip},
              {"continuity_rows", nc},
              {"kirchhoff_rows", g.vertex_count()}};
  report["full_analytic_max_difference"] = analytic ? json(analytic_gap) : json(nullptr);
  write_text(fs::path(o.out) / "report.json", report.dump(2) + "\n");
  std::cout << fmt::format("adjoint identity: max error {:.3e} (relative {:.3e}); full map round trip {:.3e}\n", max_err,
                           max_err / trace_scale, roundtrip);
  if (analytic) std::cout << fmt::format("full map FEM vs analytic: {:.3e}\n", analytic_gap);
  finish(o, "dirichlet", {"dirichlet_K.csv", "adjoint.csv", "dirichlet_full.csv", "report.json"});
  return 0;
}

int run_convolve(const Options& o) {
  validate_common(o);
  const std::uint64_t seed = require_seed(o, "convolve");
  require(!o.noise.empty(), "--noise is required for convolve");
  const std::size_t paths = o.paths == 0 ? 1000 : o.paths;
  const Setup s = discretize(o, 100);
  const NoiseSpec noise = parse_noise_spec(o.noise, s.graph);
  require(noise.kind != NoiseKind::None, "convolve needs a noise other than none");
  NoiseConfig cfg;
  cfg.covariance = noise.covariance;
  cfg.seed = seed;
  cfg.dt = o.dt;
  cfg.T = o.T;
  const OUEnsemble ens = make_ensemble(s.basis.lambdas, drives_for(noise, s), cfg);
  const std::vector<double> checkpoints{0.25 * o.T, 0.5 * o.T, o.T};
  const EnsembleSample es = simulate_ensemble(ens, cfg, paths, checkpoints);

  CsvTable table({"t", "mode", "empirical_var", "exact_var", "standard_error"});
  double worst = 0.0;
  std::size_t within = 0, total = 0;
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    const double t = es.times(static_cast<Eigen::Index>(c));
    const Eigen::VectorXd emp = es.mean_square(c), se = es.mean_square_se(c), exact = exact_covariance(ens, t);
    for (Eigen::Index k = 0; k < emp.size(); ++k) {
      table.add_row(std::vector<double>{t, static_cast<double>(k + 1), emp(k), exact(k), se(k)});
      if (se(k) > 0.0) {
        const double z = std::abs(emp(k) - exact(k)) / se(k);
        worst = std::max(worst, z);
        within += z <= 3.0;
        ++total;
      }
    }
  }
  const std::size_t steps = cfg.steps();
  const PathSample p0 = simulate_convolution(ens, cfg, 0, std::max<std::size_t>(1, steps / 200));
  std::vector<std::string> header{"t"};
  for (std::size_t k = 0; k < ens.mode_count(); ++k) header.push_back("z" + std::to_string(k + 1));
  CsvTable path(header);
  for (Eigen::Index j = 0; j < p0.times.size(); ++j) {
    std::vector<double> row{p0.times(j)};
    for (Eigen::Index k = 0; k < p0.states.rows(); ++k) row.push_back(p0.states(k, j));
    path.add_row(row);
  }
  fs::create_directories(o.out);
  table.write(fs::path(o.out) / "ensemble.csv");
  path.write(fs::path(o.out) / "path0.csv");
  const double fraction = total ? static_cast<double>(within) / static_cast<double>(total) : 1.0;
  json report{{"paths", paths},
              {"noise", noise.kind == NoiseKind::Full ? "full" : "kirchhoff"},
              {"checkpoints", std::vector<double>(es.times.data(), es.times.data() + es.times.size())},
              {"max_z_score", worst},
              {"fraction_within_3se", fraction}};
  write_text(fs::path(o.out) / "report.json", report.dump(2) + "\n");
  std::cout << fmt::format("{} paths, {} modes: {:.1f}% of variances within 3 SE (max z {:.2f})\n", paths,
                           ens.mode_count(), 100.0 * fraction, worst);
  finish(o, "convolve", {"ensemble.csv", "path0.csv", "report.json"});
  return 0;
}

Eigen::VectorXd initial_state(const std::string& text, const Setup& s, const GalerkinSpace& space) {
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string tail = colon == std::string::npos ? "" : text.substr(colon + 1);
  const auto modes = static_cast<Eigen::Index>(s.basis.mode_count());
  if (head == "zero") return Eigen::VectorXd::Zero(modes);
  if (head == "mode") {
    const auto k = parse_number_list(tail);
    require(k.size() == 1 && k[0] >= 1 && k[0] <= static_cast<double>(modes) && k[0] == std::floor(k[0]),
            "--u0 mode:k needs 1 <= k <= modes");
    return Eigen::VectorXd::Unit(modes, static_cast<Eigen::Index>(k[0]) - 1);
  }
  if (head == "constant") {
    const auto c = parse_number_list(tail);
    require(c.size() == 1, "--u0 constant:c takes one number");
    const Eigen::VectorXd u = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(s.mesh.dof_count()), c[0]);
    return project_initial(space, s.form, u).coefficients;
  }
  throw Error(ErrorKind::ParseError, "unknown initial state '" + text + "'");
}

int run_solve(const Options& o) {
  validate_common(o);
  const std::uint64_t seed = require_seed(o, "solve");
  const Setup s = discretize(o, 100);
  const NoiseSpec noise = parse_noise_spec(o.noise.empty() ? "none" : o.noise, s.graph);
  const Drift drift = parse_drift_spec(o.drift);
  const GalerkinSpace space(s.mesh, s.form, s.basis);
  const Eigen::VectorXd x0 = initial_state(o.u0, s, space);

  std::optional<NoiseInput> input;
  if (noise.kind != NoiseKind::None) {
    NoiseConfig cfg;
    cfg.covariance = noise.covariance;
    cfg.seed = seed;
    cfg.dt = o.dt;
    cfg.T = std::max(o.T, o.dt);
    input = NoiseInput{make_ensemble(s.basis.lambdas, drives_for(noise, s), cfg), cfg, 0, 1};
  }
  const std::size_t steps = static_cast<std::size_t>(std::llround(o.T / o.dt));
  const SolutionPath sol = solve_mild(space, drift, input, x0, o.T, o.dt, std::max<std::size_t>(1, steps / 200));

  std::vector<std::string> header{"t", "norm_M"};
  for (std::size_t v = 0; v < s.graph.vertex_count(); ++v) header.push_back("u_" + s.graph.vertex_id(v));
  CsvTable table(header);
  for (Eigen::Index j = 0; j < sol.times.size(); ++j) {
    const Eigen::VectorXd x = sol.coefficients.col(j);
    std::vector<double> row{sol.times(j), x.norm()};
    const Eigen::VectorXd trace = s.basis.vertex_traces * x;
    for (Eigen::Index v = 0; v < trace.size(); ++v) row.push_back(trace(v));
    table.add_row(row);
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const auto modes = static_cast<Eigen::Index>(s.basis.mode_count());
  CsvTable feller({"pair", "initial_distance", "sup_distance", "ratio"});
  double worst = 0.0;
  for (int pair = 0; pair < 20; ++pair) {
    Eigen::VectorXd a(modes), b(modes);
    for (Eigen::Index k = 0; k < modes; ++k) a(k) = normal(rng) / static_cast<double>(k + 1);
    for (Eigen::Index k = 0; k < modes; ++k) b(k) = normal(rng) / static_cast<double>(k + 1);
    const auto r = feller_coupling_test(space, drift, input, a, b, o.T, o.dt);
    worst = std::max(worst, r.ratio);
    feller.add_row(std::vector<double>{static_cast<double>(pair), r.initial_distance, r.sup_distance, r.ratio});
  }
  fs::create_directories(o.out);
  table.write(fs::path(o.out) / "solution.csv");
  feller.write(fs::path(o.out) / "feller.csv");
  json report{{"drift", drift.name},
              {"final_norm", sol.coefficients.col(sol.coefficients.cols() - 1).norm()},
              {"feller_max_ratio", worst},
              {"lipschitz_constant", drift.lipschitz}};
  write_text(fs::path(o.out) / "report.json", report.dump(2) + "\n");
  std::cout << fmt::format("final |u|_M = {:.6g}; Feller coupling max ratio over 20 pairs = {:.6g}\n",
                           report["final_norm"].get<double>(), worst);
  finish(o, "solve", {"solution.csv", "feller.csv", "report.json"});
  return 0;
}

int run_regularity(const Options& o) {
  validate_common(o);
  const std::vector<double> alphas = parse_number_list(o.alpha.empty() ? "0.2,0.25,0.35" : o.alpha);
  const Setup s = discretize(o, 200);
  const NoiseSpec noise = parse_noise_spec(o.noise.empty() ? "kirchhoff" : o.noise, s.graph);
  require(noise.kind != NoiseKind::None, "regularity needs a noise other than none");
  const Eigen::MatrixXd drives = drives_for(noise, s);

  json report;
  report["noise"] = noise.kind == NoiseKind::Full ? "full" : "kirchhoff";
  report["modes"] = s.basis.mode_count();
  std::vector<std::string> header{"k"};
  std::vector<SeriesVerdict> verdicts;
  for (double a : alphas) {
    verdicts.push_back(regularity_series(s.basis, drives, noise.covariance, a, o.T));
    header.push_back("alpha=" + format_number(a));
    report["verdicts"].push_back(verdict_json(a, verdicts.back()));
    std::cout << fmt::format("alpha={:<6} slope={} verdict={}\n", format_number(a), json_number(verdicts.back().slope),
                             to_string(verdicts.back().verdict));
  }
  const auto tc = trace_class_check(s.basis, o.T);
  report["trace_class"] = verdict_json(0.0, tc);
  report["trace_class"].erase("alpha");

  CsvTable table(header);
  for (Eigen::Index k = 0; k < verdicts.front().increments.size(); ++k) {
    std::vector<double> row{static_cast<double>(k + 1)};
    for (const auto& v : verdicts) row.push_back(v.increments(k));
    table.add_row(row);
  }
  std::vector<std::string> outputs{"increments.csv", "report.json"};
  if (o.paths > 0) {
    const std::uint64_t seed = require_seed(o, "the empirical fit of regularity");
    NoiseConfig cfg;
    cfg.covariance = noise.covariance;
    cfg.seed = seed;
    cfg.dt = o.dt;
    cfg.T = o.T;
    const OUEnsemble ens = make_ensemble(s.basis.lambdas, drives, cfg);
    const EnsembleSample es = simulate_ensemble(ens, cfg, o.paths, {o.T});
    const double lo = *std::min_element(alphas.begin(), alphas.end());
    const double hi = *std::max_element(alphas.begin(), alphas.end());
    std::vector<double> grid;
    for (int i = 0; i <= 20; ++i) grid.push_back(lo + (hi - lo) * i / 20.0);
    const AlphaFit fit = empirical_alpha_fit(es.states[0], s.basis, o.lambda, grid, 200, seed);
    report["empirical_fit"] = {{"paths", o.paths},
                               {"status", to_string(fit.status)},
                               {"threshold", fit.status == FitStatus::Ok ? json(fit.threshold) : json(nullptr)},
                               {"ci", {fit.ci_low, fit.ci_high}},
                               {"alphas", fit.alphas},
                               {"slopes", fit.slopes}};
    std::cout << fmt::format("empirical threshold: {} [{}, {}] ({})\n", json_number(fit.threshold),
                             json_number(fit.ci_low), json_number(fit.ci_high), to_string(fit.status));
  }
  fs::create_directories(o.out);
  table.write(fs::path(o.out) / "increments.csv");
  write_text(fs::path(o.out) / "report.json", report.dump(2) + "\n");
  finish(o, "regularity", outputs);
  return 0;
}

int run_verify_appendix(const Options& o) {
  const std::uint64_t seed = require_seed(o, "verify-appendix");
  const MetricGraph g = resolve_graph(o.graph);
  const std::size_t trials = o.paths == 0 ? 100 : o.paths;
  const auto width = static_cast<Eigen::Index>(2 * g.edge_count());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  CsvTable table({"trial", "gamma", "doublings", "contraction", "residual"});
  double worst_res = 0.0, worst_contraction = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    Eigen::VectorXd z(width);
    for (Eigen::Index i = 0; i < width; ++i) z(i) = normal(rng);
    z /= z.norm();
    const auto r = surjectivity_construct(g, z);
    worst_res = std::max(worst_res, r.residual_inf);
    worst_contraction = std::max(worst_contraction, r.contraction);
    table.add_row(std::vector<double>{static_cast<double>(t), r.gamma, static_cast<double>(r.doublings), r.contraction,
                                      r.residual_inf});
  }
  fs::create_directories(o.out);
  table.write(fs::path(o.out) / "appendix.csv");
  json report{{"trials", trials}, {"max_residual", worst_res}, {"max_contraction", worst_contraction}};
  write_text(fs::path(o.out) / "report.json", report.dump(2) + "\n");
  std::cout << fmt::format("{} trials: max residual {:.3e}, max contraction {:.4f}\n", trials, worst_res,
                           worst_contraction);
  finish(o, "verify-appendix", {"appendix.csv", "report.json"});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral and stochastic computations on quantum graphs"};
  app.set_help_flag("--help", "print help and exit");
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--graph", o.graph, "graph JSON file, or interval | path2 | star3")->required();
    sub->add_option("--h", o.h, "target cell size");
    sub->add_option("--modes", o.modes, "number of modes (default depends on the command)");
    sub->add_option("--lambda", o.lambda, "positive shift");
    sub->add_option("--out", o.out, "output directory");
  };
  auto add_seed = [&](CLI::App* sub) {
    sub->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& s) { o.seed = s; }, "master seed");
  };

  auto* spectrum = app.add_subcommand("spectrum", "eigenpairs, asymptotics and vertex bound");
  add_common(spectrum);
  auto* dirichlet = app.add_subcommand("dirichlet", "Kirchhoff and full Dirichlet maps, adjoint identity");
  add_common(dirichlet);
  auto* convolve = app.add_subcommand("convolve", "stochastic convolution ensemble");
  add_common(convolve);
  add_seed(convolve);
  convolve->add_option("--T", o.T, "horizon");
  convolve->add_option("--dt", o.dt, "time step");
  convolve->add_option("--paths", o.paths, "number of paths (default 1000)");
  convolve->add_option("--noise", o.noise, "noise spec");
  auto* solve = app.add_subcommand("solve", "mild solution and Feller coupling test");
  add_common(solve);
  add_seed(solve);
  solve->add_option("--T", o.T, "horizon");
  solve->add_option("--dt", o.dt, "time step");
  solve->add_option("--noise", o.noise, "noise spec (default none)");
  solve->add_option("--drift", o.drift, "drift spec");
  solve->add_option("--u0", o.u0, "initial state: mode:k | constant:c | zero");
  auto* regularity = app.add_subcommand("regularity", "series verdicts and empirical threshold fit");
  add_common(regularity);
  add_seed(regularity);
  regularity->add_option("--alpha", o.alpha, "comma separated exponents");
  regularity->add_option("--T", o.T, "time of the expected norm");
  regularity->add_option("--dt", o.dt, "time step of the Monte Carlo fit");
  regularity->add_option("--paths", o.paths, "paths for the empirical fit (0 = skip)");
  regularity->add_option("--noise", o.noise, "noise spec (default kirchhoff)");
  auto* appendix = app.add_subcommand("verify-appendix", "surjectivity construction on random boundary data");
  appendix->add_option("--graph", o.graph, "graph JSON file, or interval | path2 | star3")->required();
  appendix->add_option("--paths", o.paths, "number of random trials (default 100)");
  appendix->add_option("--out", o.out, "output directory");
  add_seed(appendix);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: ValidationError: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*spectrum) return run_spectrum(o);
    if (*dirichlet) return run_dirichlet(o);
    if (*convolve) return run_convolve(o);
    if (*solve) return run_solve(o);
    if (*regularity) return run_regularity(o);
    if (*appendix) return run_verify_appendix(o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.kind_name() << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: Internal: " << e.what() << "\n";
    return 3;
  }
  return 1;
}
