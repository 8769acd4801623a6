#include "qgraph/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <utility>

#include "qgraph/error.hpp"

namespace qgraph {

namespace {

double sample_profile(const std::vector<double>& profile, double fallback, double s) {
  if (profile.empty()) return fallback;
  if (profile.size() == 1) return profile.front();
  const double pos = std::clamp(s, 0.0, 1.0) * static_cast<double>(profile.size() - 1);
  const auto i = std::min(static_cast<std::size_t>(pos), profile.size() - 2);
  const double t = pos - static_cast<double>(i);
  return (1.0 - t) * profile[i] + t * profile[i + 1];
}

}  // namespace

double EdgeCoefficients::conductance_at(double s) const {
  return sample_profile(conductance_profile, conductance, s);
}

double EdgeCoefficients::potential_at(double s) const {
  return sample_profile(potential_profile, potential, s);
}

MetricGraph MetricGraph::validate(const GraphSpec& spec) {
  MetricGraph g;
  if (spec.vertices.empty()) throw Error(ErrorKind::ValidationError, "graph has no vertices");
  if (spec.edges.empty()) throw Error(ErrorKind::ValidationError, "graph has no edges");

  for (const auto& id : spec.vertices) {
    if (g.find_vertex(id)) throw Error(ErrorKind::DuplicateVertex, "duplicate vertex '" + id + "'");
    g.vertex_ids_.push_back(id);
  }

  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (std::size_t i = 0; i < spec.edges.size(); ++i) {
    const auto& es = spec.edges[i];
    Edge e;
    e.id = es.id.empty() ? "e" + std::to_string(i) : es.id;
    const std::size_t a = g.vertex_index(es.from);
    const std::size_t b = g.vertex_index(es.to);
    if (a == b) throw Error(ErrorKind::LoopEdge, "edge '" + e.id + "' is a loop at '" + es.from + "'");
    if (!(std::isfinite(es.length) && es.length > 0.0)) {
      throw Error(ErrorKind::NonpositiveLength, "edge '" + e.id + "' has length " + std::to_string(es.length));
    }
    auto positive = [](double c) { return std::isfinite(c) && c > 0.0; };
    auto nonnegative = [](double p) { return std::isfinite(p) && p >= 0.0; };
    if (!positive(es.conductance) ||
        !std::all_of(es.conductance_profile.begin(), es.conductance_profile.end(), positive)) {
      throw Error(ErrorKind::NonpositiveConductance, "edge '" + e.id + "' has a nonpositive conductance");
    }
    if (!nonnegative(es.potential) ||
        !std::all_of(es.potential_profile.begin(), es.potential_profile.end(), nonnegative)) {
      throw Error(ErrorKind::NegativePotential, "edge '" + e.id + "' has a negative potential");
    }
    const auto key = std::minmax(a, b);
    if (!seen.insert(key).second) {
      throw Error(ErrorKind::ParallelEdge, "edge '" + e.id + "' duplicates the pair ('" + es.from +
                                               "', '" + es.to + "')");
    }

    e.length = es.length;
    e.coeffs.conductance = es.conductance;
    e.coeffs.potential = es.potential;
    e.coeffs.conductance_profile = es.conductance_profile;
    e.coeffs.potential_profile = es.potential_profile;
    // Coordinate 0 at the lexicographically smaller id; profiles follow the flip.
    if (g.vertex_ids_[a] < g.vertex_ids_[b]) {
      e.tail = a;
      e.head = b;
    } else {
      e.tail = b;
      e.head = a;
      std::reverse(e.coeffs.conductance_profile.begin(), e.coeffs.conductance_profile.end());
      std::reverse(e.coeffs.potential_profile.begin(), e.coeffs.potential_profile.end());
    }
    g.edges_.push_back(std::move(e));
  }

  g.incidence_.assign(g.vertex_count(), {});
  for (std::size_t e = 0; e < g.edges_.size(); ++e) {
    g.incidence_[g.edges_[e].tail].push_back({e, EndRole::Tail});
    g.incidence_[g.edges_[e].head].push_back({e, EndRole::Head});
  }
  g.continuity_offset_.resize(g.vertex_count());
  std::size_t offset = 0;
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    if (g.incidence_[v].empty()) {
      throw Error(ErrorKind::ValidationError, "vertex '" + g.vertex_ids_[v] + "' is isolated");
    }
    g.continuity_offset_[v] = offset;
    offset += g.incidence_[v].size() - 1;
  }

  if (!g.is_connected()) g.warnings_.push_back("graph is disconnected");
  return g;
}

std::optional<std::size_t> MetricGraph::find_vertex(std::string_view id) const {
  const auto it = std::find(vertex_ids_.begin(), vertex_ids_.end(), id);
  if (it == vertex_ids_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - vertex_ids_.begin());
}

std::size_t MetricGraph::vertex_index(std::string_view id) const {
  if (auto v = find_vertex(id)) return *v;
  throw Error(ErrorKind::UnknownVertex, "unknown vertex '" + std::string(id) + "'");
}

double MetricGraph::conductance_at_end(std::size_t e, EndRole end) const {
  return edge(e).coeffs.conductance_at(end == EndRole::Tail ? 0.0 : 1.0);
}

double MetricGraph::total_length() const {
  return std::accumulate(edges_.begin(), edges_.end(), 0.0,
                         [](double acc, const Edge& e) { return acc + e.length; });
}

double MetricGraph::min_length() const {
  double l = edges_.front().length;
  for (const auto& e : edges_) l = std::min(l, e.length);
  return l;
}

bool MetricGraph::is_connected() const {
  std::vector<char> visited(vertex_count(), 0);
  std::vector<std::size_t> stack{0};
  visited[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    for (const auto& inc : incidence_[v]) {
      const auto& e = edges_[inc.edge];
      const std::size_t w = inc.end == EndRole::Tail ? e.head : e.tail;
      if (!visited[w]) {
        visited[w] = 1;
        ++count;
        stack.push_back(w);
      }
    }
  }
  return count == vertex_count();
}

VertexConditions vertex_matrices(const MetricGraph& g, std::size_t v) {
  if (v >= g.vertex_count()) {
    throw Error(ErrorKind::UnknownVertex, "vertex index " + std::to_string(v) + " out of range");
  }
  const auto& inc = g.incident(v);
  const auto d = static_cast<Eigen::Index>(inc.size());

  VertexConditions vc;
  vc.continuity = Eigen::MatrixXd::Zero(d - 1, d);
  for (Eigen::Index r = 0; r + 1 < d; ++r) {
    vc.continuity(r, r) = 1.0;
    vc.continuity(r, r + 1) = -1.0;
  }
  vc.conductance.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    vc.conductance(j) = g.conductance_at_end(inc[j].edge, inc[j].end);
  }
  vc.values = Eigen::MatrixXd::Zero(d, d);
  vc.values.topRows(d - 1) = vc.continuity;
  vc.derivatives = Eigen::MatrixXd::Zero(d, d);
  vc.derivatives.row(d - 1) = vc.conductance;
  return vc;
}

VertexConditions vertex_matrices(const MetricGraph& g, std::string_view vertex_id) {
  return vertex_matrices(g, g.vertex_index(vertex_id));
}

MetricGraph make_interval(double length, double conductance, double potential) {
  GraphSpec spec;
  spec.vertices = {"v0", "v1"};
  spec.edges.push_back({"e0", "v0", "v1", length, conductance, potential, {}, {}});
  return MetricGraph::validate(spec);
}

MetricGraph make_path(std::size_t edges, double length) {
  GraphSpec spec;
  // Zero padded so lexicographic order follows the path.
  auto name = [](std::size_t i) {
    std::string s = std::to_string(i);
    return "v" + std::string(s.size() < 3 ? 3 - s.size() : 0, '0') + s;
  };
  for (std::size_t i = 0; i <= edges; ++i) spec.vertices.push_back(name(i + 1));
  for (std::size_t i = 0; i < edges; ++i) {
    spec.edges.push_back({"e" + std::to_string(i), name(i + 1), name(i + 2), length, 1.0, 0.0, {}, {}});
  }
  return MetricGraph::validate(spec);
}

MetricGraph make_star(std::size_t arms, double length, double conductance) {
  GraphSpec spec;
  spec.vertices.push_back("v0");
  for (std::size_t i = 1; i <= arms; ++i) spec.vertices.push_back("v" + std::to_string(i));
  for (std::size_t i = 1; i <= arms; ++i) {
    spec.edges.push_back({"e" + std::to_string(i - 1), "v0", "v" + std::to_string(i), length,
                          conductance, 0.0, {}, {}});
  }
  return MetricGraph::validate(spec);
}

}  // namespace qgraph
