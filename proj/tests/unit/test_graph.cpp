#include "doctest.h"
#include "helpers.hpp"
#include "qgraph/graph.hpp"

using namespace qgraph;
using qgraph::test::check_throws_kind;
using qgraph::test::edge;

TEST_CASE("path graph validates with the expected degrees") {
  GraphSpec spec;
  spec.vertices = {"v1", "v2", "v3"};
  spec.edges = {edge("v1", "v2"), edge("v2", "v3")};
  const auto g = MetricGraph::validate(spec);
  CHECK(g.vertex_count() == 3);
  CHECK(g.edge_count() == 2);
  CHECK(g.degree(0) == 1);
  CHECK(g.degree(1) == 2);
  CHECK(g.degree(2) == 1);
}

TEST_CASE("structural errors name the offending element") {
  GraphSpec spec;
  spec.vertices = {"v1", "v2"};
  spec.edges = {edge("v1", "v1")};
  check_throws_kind([&] { MetricGraph::validate(spec); }, ErrorKind::LoopEdge);

  spec.edges = {edge("v1", "v2"), edge("v2", "v1")};
  check_throws_kind([&] { MetricGraph::validate(spec); }, ErrorKind::ParallelEdge);

  spec.edges = {edge("v1", "v2", 0.0)};
  check_throws_kind([&] { MetricGraph::validate(spec); }, ErrorKind::NonpositiveLength);

  spec.edges = {edge("v1", "v2", 1.0, -1.0)};
  check_throws_kind([&] { MetricGraph::validate(spec); }, ErrorKind::NonpositiveConductance);

  spec.edges = {edge("v1", "v2", 1.0, 1.0, -0.5)};
  check_throws_kind([&] { MetricGraph::validate(spec); }, ErrorKind::NegativePotential);

  spec.edges = {edge("v1", "v9")};
  check_throws_kind([&] { MetricGraph::validate(spec); }, ErrorKind::UnknownVertex);

  spec.edges = {edge("v1", "v2")};
  spec.edges[0].id = "bad-edge";
  spec.edges[0].length = -2.0;
  try {
    MetricGraph::validate(spec);
    FAIL("expected NonpositiveLength");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("bad-edge") != std::string::npos);
  }
}

TEST_CASE("3-star satisfies the handshake identity") {
  const auto g = make_star(3);
  CHECK(g.degree(g.vertex_index("v0")) == 3);
  std::size_t total = 0;
  for (std::size_t v = 0; v < g.vertex_count(); ++v) total += g.degree(v);
  CHECK(total == 2 * g.edge_count());
  CHECK(g.continuity_row_count() == 2);
}

TEST_CASE("edges are oriented from the smaller vertex id") {
  GraphSpec spec;
  spec.vertices = {"b", "a"};
  spec.edges = {edge("b", "a")};
  const auto g = MetricGraph::validate(spec);
  CHECK(g.vertex_id(g.edge(0).tail) == "a");
  CHECK(g.vertex_id(g.edge(0).head) == "b");
}

TEST_CASE("vertex matrices") {
  SUBCASE("degree one has no continuity rows") {
    const auto g = make_interval();
    const auto vc = vertex_matrices(g, 0);
    CHECK(vc.continuity.rows() == 0);
    CHECK(vc.continuity.cols() == 1);
    REQUIRE(vc.conductance.size() == 1);
    CHECK(vc.conductance(0) == 1.0);
  }
  SUBCASE("degree three bidiagonal pattern") {
    const auto g = make_star(3);
    const auto vc = vertex_matrices(g, "v0");
    Eigen::MatrixXd expected(2, 3);
    expected << 1, -1, 0, 0, 1, -1;
    CHECK((vc.continuity - expected).norm() == 0.0);
    CHECK((vc.derivatives.row(2) - Eigen::RowVector3d(1, 1, 1)).norm() == 0.0);
    CHECK(vc.derivatives.topRows(2).norm() == 0.0);
    CHECK(vc.values.row(2).norm() == 0.0);
    Eigen::MatrixXd block(3, 6);
    block << vc.values, vc.derivatives;
    CHECK(Eigen::FullPivLU<Eigen::MatrixXd>(block).rank() == 3);
  }
  SUBCASE("conductance row and weighted Kirchhoff condition") {
    GraphSpec spec;
    spec.vertices = {"v1", "v2", "v3"};
    spec.edges = {edge("v1", "v2", 1.0, 2.0), edge("v2", "v3", 1.0, 3.0)};
    const auto g = MetricGraph::validate(spec);
    const auto vc = vertex_matrices(g, "v2");
    CHECK(vc.conductance(0) == 2.0);
    CHECK(vc.conductance(1) == 3.0);
    // 2 u'_1 + 3 u'_2 = 0 holds for u' = (3, -2).
    CHECK(vc.conductance.dot(Eigen::Vector2d(3.0, -2.0)) == doctest::Approx(0.0));
  }
  SUBCASE("unknown vertex") {
    check_throws_kind([] { vertex_matrices(make_interval(), "nope"); }, ErrorKind::UnknownVertex);
  }
}

TEST_CASE("continuity rows vanish exactly on constants") {
  const auto g = make_star(4);
  std::size_t rows = 0;
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    const auto vc = vertex_matrices(g, v);
    rows += static_cast<std::size_t>(vc.continuity.rows());
    CHECK((vc.continuity * Eigen::VectorXd::Constant(vc.continuity.cols(), 2.5)).norm() == 0.0);
    if (vc.continuity.rows() > 0) {
      Eigen::VectorXd x = Eigen::VectorXd::Constant(vc.continuity.cols(), 1.0);
      x(0) = 1.5;
      CHECK((vc.continuity * x).norm() > 0.0);
    }
  }
  CHECK(rows + g.vertex_count() == 2 * g.edge_count());
}

TEST_CASE("disconnected graphs are accepted with a warning") {
  GraphSpec spec;
  spec.vertices = {"a", "b", "c", "d"};
  spec.edges = {edge("a", "b"), edge("c", "d")};
  const auto g = MetricGraph::validate(spec);
  CHECK_FALSE(g.is_connected());
  CHECK_FALSE(g.warnings().empty());
}
