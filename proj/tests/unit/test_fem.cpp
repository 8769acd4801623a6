#include <cmath>
#include <numbers>

#include "doctest.h"
#include "helpers.hpp"
#include "qgraph/fem.hpp"

using namespace qgraph;
using qgraph::test::check_throws_kind;
using std::numbers::pi;

TEST_CASE("dof counts") {
  CHECK(build_mesh(make_interval(), 0.5, Space::Continuous).dof_count() == 3);
  CHECK(build_mesh(make_star(3), 0.25, Space::Continuous).dof_count() == 13);
  CHECK(build_mesh(make_star(3), 0.25, Space::Broken).dof_count() == 15);
  check_throws_kind([] { build_mesh(make_interval(), 1.5, Space::Continuous); }, ErrorKind::MeshTooCoarse);
}

TEST_CASE("two-cell interval matrices") {
  const auto mesh = build_mesh(make_interval(), 0.5, Space::Continuous);
  const auto f = assemble_form(mesh);
  // Dofs: v0, v1, interior.
  Eigen::Matrix3d K_nodes, M_nodes;
  K_nodes << 2, -2, 0, -2, 4, -2, 0, -2, 2;
  M_nodes << 2, 1, 0, 1, 4, 1, 0, 1, 2;
  M_nodes /= 12.0;
  const std::size_t order[3] = {mesh.node_dof(0, 0), mesh.node_dof(0, 1), mesh.node_dof(0, 2)};
  const Eigen::MatrixXd K = Eigen::MatrixXd(f.K), M = Eigen::MatrixXd(f.M);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const auto a = static_cast<Eigen::Index>(order[i]), b = static_cast<Eigen::Index>(order[j]);
      CHECK(K(a, b) == doctest::Approx(K_nodes(i, j)).epsilon(1e-14));
      CHECK(M(a, b) == doctest::Approx(M_nodes(i, j)).epsilon(1e-14));
    }
  }
}

TEST_CASE("form properties") {
  const auto g = make_star(3);
  const auto mesh = build_mesh(g, 0.1, Space::Continuous);
  const auto f = assemble_form(mesh);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(mesh.dof_count()));
  CHECK(std::abs(ones.dot(f.K * ones)) < 1e-12);
  CHECK(ones.dot(f.M * ones) == doctest::Approx(g.total_length()).epsilon(1e-12));
  CHECK(Eigen::MatrixXd(f.K - SparseMatrix(f.K.transpose())).cwiseAbs().maxCoeff() == 0.0);
  CHECK(Eigen::MatrixXd(f.M - SparseMatrix(f.M.transpose())).cwiseAbs().maxCoeff() == 0.0);

  const auto g2 = make_star(3, 1.0, 2.0);
  const auto f2 = assemble_form(build_mesh(g2, 0.1, Space::Continuous));
  CHECK(Eigen::MatrixXd(f2.stiffness - 2.0 * f.stiffness).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(Eigen::MatrixXd(f2.M - f.M).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Galerkin consistency is second order") {
  // a(u, v) for u = cos(pi x), v = x^3 on the unit interval equals
  // -3 (pi^2 - 4) / pi^2.
  auto error = [](double h) {
    const auto mesh = build_mesh(make_interval(), h, Space::Continuous);
    const auto f = assemble_form(mesh);
    const Eigen::VectorXd u = interpolate(mesh, [](std::size_t, double x) { return std::cos(pi * x); });
    const Eigen::VectorXd v = interpolate(mesh, [](std::size_t, double x) { return x * x * x; });
    return std::abs(u.dot(f.K * v) + 3.0 * (pi * pi - 4.0) / (pi * pi));
  };
  const double e1 = error(1.0 / 32), e2 = error(1.0 / 64);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("vertex trace") {
  const auto mesh = build_mesh(make_interval(), 1.0 / 64, Space::Continuous);
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(mesh.dof_count()));
  CHECK((vertex_trace(mesh, one) - Eigen::Vector2d(1, 1)).norm() == 0.0);
  const Eigen::VectorXd u =
      interpolate(mesh, [](std::size_t, double x) { return std::sqrt(2.0) * std::cos(std::numbers::pi * x); });
  const Eigen::VectorXd t = vertex_trace(mesh, u);
  CHECK(t(0) == doctest::Approx(std::sqrt(2.0)));
  CHECK(t(1) == doctest::Approx(-std::sqrt(2.0)));

  const auto path = build_mesh(make_path(2), 0.25, Space::Continuous);
  GraphFunction broken = to_graph_function(path, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(path.dof_count())));
  broken.continuous = false;
  broken.values[0](broken.values[0].size() - 1) = 1.0;
  check_throws_kind([&] { vertex_trace(path, broken); }, ErrorKind::BrokenSpaceInput);
}

TEST_CASE("jump and flux operators") {
  const auto g = make_path(2);
  const auto cont = build_mesh(g, 0.125, Space::Continuous);
  const auto broken = cont.with_space(Space::Broken);
  const auto f = assemble_form(broken);
  const auto ops = jump_and_flux_operators(broken, f);
  CHECK(ops.jump.rows() == 1);
  CHECK(ops.flux.rows() == 3);

  const Eigen::VectorXd smooth = prolongation(cont, broken) * interpolate(cont, [](std::size_t e, double x) {
                                   return std::sin(static_cast<double>(e + 1) * x);
                                 });
  CHECK((ops.jump * smooth).norm() < 1e-14);
  const Eigen::VectorXd c = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(broken.dof_count()), 3.0);
  CHECK((ops.flux * c).norm() < 1e-12);

  const auto ib = build_mesh(make_interval(), 0.125, Space::Broken);
  const auto fi = assemble_form(ib);
  const Eigen::VectorXd x = interpolate(ib, [](std::size_t, double s) { return s; });
  const Eigen::VectorXd phi = jump_and_flux_operators(ib, fi).flux * x;
  CHECK(phi(0) == doctest::Approx(1.0));
  CHECK(phi(1) == doctest::Approx(-1.0));
}

TEST_CASE("sampled coefficient profiles") {
  GraphSpec spec;
  spec.vertices = {"a", "b"};
  GraphSpec::EdgeSpec e;
  e.from = "a";
  e.to = "b";
  e.length = 1.0;
  e.conductance_profile = {2.0, 2.0, 2.0};
  spec.edges = {e};
  const auto g = MetricGraph::validate(spec);
  const auto f = assemble_form(build_mesh(g, 0.1, Space::Continuous));
  const auto f1 = assemble_form(build_mesh(make_interval(), 0.1, Space::Continuous));
  CHECK(Eigen::MatrixXd(f.stiffness - 2.0 * f1.stiffness).cwiseAbs().maxCoeff() < 1e-12);
}
