#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "helpers.hpp"
#include "qgraph/io.hpp"

using namespace qgraph;
using qgraph::test::check_throws_kind;

TEST_CASE("graph JSON round trip") {
  const std::string text = R"({"vertices": ["a", "b", "c"],
    "edges": [{"id": "x", "from": "a", "to": "b", "length": 2.0, "c": 3.0, "p": 0.5},
              {"from": "c", "to": "b", "length": 1.0}]})";
  const auto g = MetricGraph::validate(parse_graph_spec(text));
  CHECK(g.edge(0).id == "x");
  CHECK(g.edge(0).length == 2.0);
  CHECK(g.edge(0).coeffs.conductance == 3.0);
  CHECK(g.edge(0).coeffs.potential == 0.5);
  CHECK(g.vertex_id(g.edge(1).tail) == "b");
  const auto again = MetricGraph::validate(parse_graph_spec(graph_to_json(g)));
  CHECK(graph_to_json(again) == graph_to_json(g));
}

TEST_CASE("parser rejects unknown keys and malformed input") {
  check_throws_kind([] { parse_graph_spec(R"({"vertices": [], "edges": [], "extra": 1})"); }, ErrorKind::ParseError);
  check_throws_kind([] { parse_graph_spec(R"({"vertices": ["a","b"], "edges": [{"from":"a","to":"b","length":1,"k":2}]})"); },
                    ErrorKind::ParseError);
  check_throws_kind([] { parse_graph_spec("{not json"); }, ErrorKind::ParseError);
  check_throws_kind([] { parse_graph_spec(R"({"vertices": ["a","b"], "edges": [{"from":"a","to":"b"}]})"); },
                    ErrorKind::ParseError);
}

TEST_CASE("bundled graph files load") {
  const std::filesystem::path dir = QGRAPH_DATA_DIR;
  CHECK(load_graph(dir / "interval.json").edge_count() == 1);
  CHECK(load_graph(dir / "path2.json").vertex_count() == 3);
  CHECK(load_graph(dir / "star3.json").degree(0) == 3);
}

TEST_CASE("noise and drift specs") {
  const auto g = make_path(2);
  CHECK(parse_noise_spec("none", g).kind == NoiseKind::None);
  CHECK(parse_noise_spec("kirchhoff", g).covariance.rows() == 3);
  CHECK(parse_noise_spec("kirchhoff-diag:1,0,2", g).covariance(2, 2) == 2.0);
  const auto full = parse_noise_spec("full-continuity", g);
  CHECK(full.covariance.rows() == 4);
  CHECK(full.covariance(0, 0) == 1.0);
  CHECK(full.covariance.diagonal().tail(3).norm() == 0.0);
  check_throws_kind([&] { parse_noise_spec("kirchhoff-diag:1,2", g); }, ErrorKind::ParseError);
  check_throws_kind([&] { parse_noise_spec("bogus", g); }, ErrorKind::ParseError);

  CHECK(parse_drift_spec("zero").is_zero());
  CHECK(parse_drift_spec("linear:-2").apply(0, 1.5) == -3.0);
  CHECK(parse_drift_spec("sine:2").lipschitz == 2.0);
  CHECK(parse_drift_spec("cubic").apply(0, 2.0) == -6.0);
  CHECK(parse_drift_spec("poly:0,1,0,-1").kind == DriftKind::OddPolynomial);
  check_throws_kind([] { parse_drift_spec("poly:1,2"); }, ErrorKind::InvalidArgument);
  check_throws_kind([] { parse_drift_spec("linear:x"); }, ErrorKind::ParseError);
}

TEST_CASE("CSV formatting and hashing") {
  CsvTable t({"a", "b"});
  t.add_row(std::vector<double>{0.1, 2.0});
  CHECK(t.str() == "a,b\n0.1,2\n");
  check_throws_kind([&] { t.add_row(std::vector<double>{1.0}); }, ErrorKind::InvalidArgument);
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}
