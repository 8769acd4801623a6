#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "qgraph/spectral.hpp"

using namespace qgraph;
using qgraph::test::check_throws_kind;
using std::numbers::pi;

namespace {

struct Problem {
  Mesh mesh;
  FormMatrices form;
  SpectralBasis basis;
};

Problem solve(const MetricGraph& g, double h, std::size_t modes) {
  Mesh mesh = build_mesh(g, h, Space::Continuous);
  FormMatrices form = assemble_form(mesh);
  SpectralBasis basis = eigensolve(mesh, form, modes);
  return {std::move(mesh), std::move(form), std::move(basis)};
}

double closed_form_slope(std::size_t k_first, std::size_t k_last) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(k_last - k_first + 1);
  for (std::size_t k = k_first; k <= k_last; ++k) {
    const double x = std::log(static_cast<double>(k));
    const double y = std::log(1.0 + std::pow((static_cast<double>(k) - 1.0) * pi, 2));
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST_CASE("interval Neumann eigenvalues") {
  const double h = 1.0 / 128;
  const auto p = solve(make_interval(), h, 6);
  for (int k = 1; k <= 5; ++k) {
    const double exact = -std::pow((k - 1) * pi, 2);
    const double got = p.basis.lambdas(k - 1);
    if (k == 1) {
      CHECK(std::abs(got) < 1e-8);
    } else {
      CHECK(std::abs(got - exact) / std::abs(exact) <= std::pow(k * h, 2));
    }
  }
}

TEST_CASE("constant ground state and potential shift") {
  const auto g = make_star(3, 1.0);
  const auto p = solve(g, 1.0 / 32, 8);
  CHECK(std::abs(p.basis.lambdas(0)) < 1e-9);
  const Eigen::VectorXd f1 = p.basis.eigvecs.col(0);
  CHECK(f1.minCoeff() == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-9));
  CHECK(f1.maxCoeff() == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-9));

  const auto q = solve(make_interval(1.0, 1.0, 1.0), 1.0 / 64, 8);
  const auto r = solve(make_interval(), 1.0 / 64, 8);
  for (Eigen::Index k = 0; k < 8; ++k) CHECK(q.basis.lambdas(k) - r.basis.lambdas(k) == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("basis invariants") {
  const auto p = solve(make_star(3), 1.0 / 64, 40);
  const auto n = p.basis.eigvecs.cols();
  const Eigen::MatrixXd gram = p.basis.eigvecs.transpose() * (p.form.M * p.basis.eigvecs);
  CHECK((gram - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-10);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::VectorXd f = p.basis.eigvecs.col(k);
    const double nu = -p.basis.lambdas(k);
    const Eigen::VectorXd kf = p.form.K * f, mf = p.form.M * f;
    CHECK((kf - nu * mf).norm() <= 1e-8 * (kf.norm() + nu * mf.norm()) + 1e-10);
    CHECK(p.basis.lambdas(k) <= 1e-12);
    if (k > 0) CHECK(p.basis.lambdas(k) <= p.basis.lambdas(k - 1));
    for (Eigen::Index v = 0; v < p.basis.vertex_traces.rows(); ++v) {
      const double t = p.basis.vertex_traces(v, k);
      if (std::abs(t) > 1e-10) {
        CHECK(t > 0.0);
        break;
      }
    }
  }
  check_throws_kind([&] { eigensolve(p.mesh, p.form, p.mesh.dof_count() / 4 + 1); }, ErrorKind::TooManyModes);
}

TEST_CASE("Parseval in the computed span") {
  const auto p = solve(make_path(2), 1.0 / 32, 16);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  Eigen::VectorXd c(16);
  for (auto& x : c) x = normal(rng);
  const Eigen::VectorXd u = p.basis.eigvecs * c;
  const Eigen::VectorXd back = p.basis.eigvecs.transpose() * (p.form.M * u);
  CHECK(back.squaredNorm() == doctest::Approx(u.dot(p.form.M * u)).epsilon(1e-10));
}

TEST_CASE("asymptotics on the interval follow the closed-form spectrum") {
  const auto p = solve(make_interval(), 1.0 / 512, 40);
  const auto a = asymptotics_check(p.basis, 1.0, 10, 40);
  // The exact spectrum 1 + (k-1)^2 pi^2 itself has slope 2.105 on k = 10..40.
  CHECK(a.loglog_slope == doctest::Approx(closed_form_slope(10, 40)).epsilon(2e-3));
  CHECK(a.l2 / a.l1 <= 1.5);
  CHECK(a.l1 > 0.0);
}

TEST_CASE("3-star asymptotic slope") {
  const auto p = solve(make_star(3), 1.0 / 256, 40);
  const auto q = solve(make_star(3), 1.0 / 512, 40);
  const auto a = asymptotics_check(p.basis, 1.0, 10, 40);
  const auto b = asymptotics_check(q.basis, 1.0, 10, 40);
  CHECK(b.loglog_slope >= 1.9);
  CHECK(b.loglog_slope <= 2.1);
  CHECK(std::abs(a.loglog_slope - b.loglog_slope) / b.loglog_slope < 0.01);
  CHECK(std::abs(a.l2 / a.l1 - b.l2 / b.l1) / (b.l2 / b.l1) < 0.05);
}

TEST_CASE("vertex bound on the interval and the equilateral star") {
  const auto p = solve(make_interval(), 1.0 / 1024, 10);
  const auto vb = vertex_bound_estimate(p.basis);
  CHECK(vb.trace_norm2(0) == doctest::Approx(2.0).epsilon(1e-9));
  for (Eigen::Index k = 1; k < 10; ++k) CHECK(vb.trace_norm2(k) == doctest::Approx(4.0).epsilon(1e-3));
  CHECK(vb.sup == doctest::Approx(4.0).epsilon(1e-3));

  const auto s = solve(make_star(3), 1.0 / 128, 60);
  const auto sb = vertex_bound_estimate(s.basis);
  CHECK(sb.growth_ratio <= 1.1);
  CHECK(std::isfinite(sb.sup));
  std::size_t triple = 0;
  for (const auto& m : sb.multiplets) triple += m.size == 2;
  CHECK(triple > 0);
}

TEST_CASE("pinning a vertex interlaces the spectrum") {
  const auto mesh = build_mesh(make_interval(), 1.0 / 256, Space::Continuous);
  const auto form = assemble_form(mesh);
  const auto b = eigensolve(mesh, form, 12);
  const Eigen::VectorXd pinned = pinned_spectrum(mesh, form, {0}, 10);
  for (Eigen::Index k = 0; k < 10; ++k) {
    CHECK(b.lambdas(k + 1) <= pinned(k) + 1e-9);
    CHECK(pinned(k) <= b.lambdas(k) + 1e-9);
    const double exact = -std::pow((static_cast<double>(k) + 0.5) * pi, 2);
    CHECK(pinned(k) == doctest::Approx(exact).epsilon(2e-3));
  }
}

TEST_CASE("refinement shows second-order convergence") {
  const double exact = -std::pow(3 * pi, 2);
  double prev = 0.0;
  for (double h : {1.0 / 32, 1.0 / 64, 1.0 / 128}) {
    const double err = std::abs(solve(make_interval(), h, 6).basis.lambdas(3) - exact);
    if (prev > 0.0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.05));
    prev = err;
  }
}
