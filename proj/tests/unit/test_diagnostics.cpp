#include <cmath>
#include <numbers>

#include "doctest.h"
#include "helpers.hpp"
#include "qgraph/diagnostics.hpp"
#include "qgraph/dirichlet.hpp"

using namespace qgraph;
using qgraph::test::check_throws_kind;
using std::numbers::pi;

namespace {

const SpectralBasis& fine_interval() {
  static const SpectralBasis basis = [] {
    const auto mesh = build_mesh(make_interval(), 1.0 / 1024, Space::Continuous);
    return eigensolve(mesh, assemble_form(mesh), 200);
  }();
  return basis;
}

const SpectralBasis& fine_path() {
  static const SpectralBasis basis = [] {
    const auto mesh = build_mesh(make_path(2), 1.0 / 1024, Space::Continuous);
    return eigensolve(mesh, assemble_form(mesh), 200);
  }();
  return basis;
}

Eigen::VectorXd power_series(double exponent, Eigen::Index n) {
  Eigen::VectorXd v(n);
  for (Eigen::Index k = 0; k < n; ++k) v(k) = std::pow(static_cast<double>(k + 1), exponent);
  return v;
}

}  // namespace

TEST_CASE("fractional norms") {
  const auto mesh = build_mesh(make_interval(), 1.0 / 512, Space::Continuous);
  const auto basis = eigensolve(mesh, assemble_form(mesh), 10);
  const Eigen::VectorXd c = Eigen::VectorXd::LinSpaced(10, 1.0, -2.0);
  CHECK(frac_norm(c, basis, 1.0, 0.0) == doctest::Approx(c.norm()));
  CHECK(frac_norm(Eigen::VectorXd::Unit(10, 1), basis, 1.0, 0.5) == doctest::Approx(std::sqrt(1.0 + pi * pi)).epsilon(1e-4));
  CHECK(frac_norm(2.0 * c, basis, 1.0, 0.3) == doctest::Approx(2.0 * frac_norm(c, basis, 1.0, 0.3)));
  double prev = 0.0;
  for (double a : {-0.9, -0.5, 0.0, 0.4, 0.9}) {
    const double v = frac_norm(c, basis, 1.0, a);
    CHECK(v >= prev);
    prev = v;
  }
  check_throws_kind([&] { frac_norm(c, basis, 1.0, 1.0); }, ErrorKind::InvalidArgument);
  check_throws_kind([&] { frac_norm(c, basis, 0.0, 0.1); }, ErrorKind::NonpositiveShift);
}

TEST_CASE("series classification") {
  CHECK(classify_series(power_series(-2.0, 200)).verdict == Verdict::Converging);
  CHECK(classify_series(power_series(-0.5, 200)).verdict == Verdict::Diverging);
  CHECK(classify_series(power_series(-1.0, 200)).verdict == Verdict::Inconclusive);
  check_throws_kind([] { classify_series(power_series(-2.0, 99)); }, ErrorKind::InsufficientModes);
  const auto zero = classify_series(Eigen::VectorXd::Zero(120));
  CHECK(zero.verdict == Verdict::Converging);
  const auto v = classify_series(power_series(-2.0, 200));
  CHECK(v.partial_sums(199) == doctest::Approx(power_series(-2.0, 200).sum()));
  CHECK(v.slope == doctest::Approx(-2.0).epsilon(0.01));
  CHECK(v.ci_low <= v.slope);
  CHECK(v.ci_high >= v.slope);
}

TEST_CASE("Kirchhoff regularity threshold at one quarter") {
  const auto& b = fine_interval();
  const Eigen::MatrixXd q = Eigen::Matrix2d::Identity();
  const auto a20 = regularity_series_K(b, q, 0.2, 1.0);
  CHECK(a20.verdict == Verdict::Converging);
  CHECK(a20.slope == doctest::Approx(-1.2).epsilon(0.05));
  const auto a35 = regularity_series_K(b, q, 0.35, 1.0);
  CHECK(a35.verdict == Verdict::Diverging);
  CHECK(a35.slope == doctest::Approx(-0.6).epsilon(0.1));
  CHECK(regularity_series_K(b, q, 0.25, 1.0).verdict == Verdict::Inconclusive);

  const auto mesh = build_mesh(make_interval(), 1.0 / 512, Space::Continuous);
  const auto coarse = eigensolve(mesh, assemble_form(mesh), 100);
  CHECK(regularity_series_K(coarse, q, 0.2, 1.0).verdict == Verdict::Converging);
  CHECK(regularity_series_K(coarse, q, 0.35, 1.0).verdict == Verdict::Diverging);
}

TEST_CASE("full-noise regularity threshold at minus one quarter") {
  const auto& b = fine_path();
  const auto g = make_path(2);
  const Eigen::MatrixXd drives = full_drive_from_traces(g, b);
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(4, 4);
  q(0, 0) = 1.0;
  CHECK(regularity_series_full(b, drives, q, -0.3, 1.0).verdict == Verdict::Converging);
  CHECK(regularity_series_full(b, drives, q, -0.2, 1.0).verdict == Verdict::Diverging);

  Eigen::MatrixXd kirchhoff_only = Eigen::MatrixXd::Zero(4, 4);
  kirchhoff_only.bottomRightCorner(3, 3).setIdentity();
  for (double a : {0.2, 0.35}) {
    const auto full = regularity_series_full(b, drives, kirchhoff_only, a, 1.0);
    const auto k = regularity_series_K(b, Eigen::Matrix3d::Identity(), a, 1.0);
    CHECK((full.increments - k.increments).cwiseAbs().maxCoeff() <= 1e-9 * k.increments.cwiseAbs().maxCoeff());
    CHECK(full.verdict == k.verdict);
  }
  const Eigen::MatrixXd few = drives.leftCols(50);
  SpectralBasis small = b;
  small.lambdas.conservativeResize(50);
  check_throws_kind([&] { regularity_series_full(small, few, q, -0.3, 1.0); }, ErrorKind::InsufficientModes);
}

TEST_CASE("trace-class check") {
  const auto& b = fine_interval();
  const auto tc = trace_class_check(b, 1.0);
  CHECK(tc.verdict == Verdict::Converging);
  CHECK(tc.slope <= -1.8);
  double limit = 1.0;
  for (int k = 1; k < 100000; ++k) limit += 1.0 / (2.0 * k * k * pi * pi);
  CHECK(tc.partial_sums(199) == doctest::Approx(limit).epsilon(2e-3));
  CHECK(trace_class_check(b, 0.0).partial_sums.cwiseAbs().maxCoeff() == 0.0);

  const auto mesh = build_mesh(make_interval(2.0), 1.0 / 512, Space::Continuous);
  const auto longer = eigensolve(mesh, assemble_form(mesh), 200);
  CHECK(longer.lambdas(10) == doctest::Approx(b.lambdas(10) / 4.0).epsilon(1e-3));
  CHECK(trace_class_check(longer, 1.0).slope == doctest::Approx(tc.slope).epsilon(0.02));
}

TEST_CASE("Monte Carlo series agree with the closed form") {
  const auto mesh = build_mesh(make_interval(), 1.0 / 256, Space::Continuous);
  const auto basis = eigensolve(mesh, assemble_form(mesh), 50);
  NoiseConfig cfg;
  cfg.covariance = Eigen::Matrix2d::Identity();
  cfg.seed = 21;
  cfg.dt = 0.005;
  cfg.T = 1.0;
  const auto ens = make_ensemble(basis.lambdas, build_drive_K(basis), cfg);
  const auto es = simulate_ensemble(ens, cfg, 2000, {0.5, 1.0});
  for (std::size_t c = 0; c < 2; ++c) {
    const double t = es.times(static_cast<Eigen::Index>(c));
    for (double a : {-0.2, 0.1, 0.3}) {
      const Eigen::VectorXd w = (1.0 - basis.lambdas.array()).pow(2.0 * a).matrix();
      const Eigen::VectorXd per_path = es.states[c].array().square().matrix() * w;
      const double mean = per_path.mean();
      const double se = std::sqrt((per_path.array() - mean).square().sum() / (per_path.size() - 1.0) / per_path.size());
      const double exact = w.dot(exact_covariance(ens, t));
      CHECK(std::abs(mean - exact) <= 3.0 * se);
    }
  }
}

TEST_CASE("empirical threshold fits") {
  const std::size_t paths = 1000;
  NoiseConfig cfg;
  cfg.seed = 31;
  cfg.dt = 1e-3;
  cfg.T = 1.0;
  SUBCASE("Kirchhoff noise on the interval") {
    const auto& b = fine_interval();
    cfg.covariance = Eigen::Matrix2d::Identity();
    const auto es = simulate_ensemble(make_ensemble(b.lambdas, build_drive_K(b), cfg), cfg, paths, {1.0});
    std::vector<double> grid;
    for (int i = 0; i <= 10; ++i) grid.push_back(0.05 * i);
    const auto fit = empirical_alpha_fit(es.states[0], b, 1.0, grid);
    CHECK(fit.status == FitStatus::Ok);
    CHECK(fit.threshold >= 0.15);
    CHECK(fit.threshold <= 0.35);
    CHECK(fit.ci_low <= fit.threshold);
    CHECK(fit.ci_high >= fit.threshold);
  }
  SUBCASE("full noise on the path graph") {
    const auto& b = fine_path();
    cfg.covariance = Eigen::Matrix4d::Identity();
    const auto es = simulate_ensemble(make_ensemble(b.lambdas, full_drive_from_traces(make_path(2), b), cfg), cfg,
                                      paths, {1.0});
    std::vector<double> grid;
    for (int i = 0; i <= 10; ++i) grid.push_back(-0.5 + 0.05 * i);
    const auto fit = empirical_alpha_fit(es.states[0], b, 1.0, grid);
    CHECK(fit.status == FitStatus::Ok);
    CHECK(fit.threshold >= -0.35);
    CHECK(fit.threshold <= -0.15);
  }
  SUBCASE("zero noise has no signal") {
    const auto& b = fine_interval();
    const Eigen::MatrixXd states = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(paths), 200);
    CHECK(empirical_alpha_fit(states, b, 1.0, {0.0, 0.2, 0.4}).status == FitStatus::NoSignal);
  }
}
