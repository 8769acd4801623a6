#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace qgraph {

/// Per-edge coefficients of the edge operator (c u')' - p u.
///
/// The scalar values are the piecewise-constant data used by the analytic
/// kernels. Optional profiles hold samples at uniformly spaced points of
/// [0, length] (first sample at 0, last at length); when present they take
/// precedence in the finite element assembly.
struct EdgeCoefficients {
  double conductance = 1.0;
  double potential = 0.0;
  std::vector<double> conductance_profile;
  std::vector<double> potential_profile;

  /// Conductance at relative position s in [0, 1].
  double conductance_at(double s) const;
  /// Potential at relative position s in [0, 1].
  double potential_at(double s) const;
  bool is_piecewise_constant() const {
    return conductance_profile.empty() && potential_profile.empty();
  }
};

enum class EndRole { Tail, Head };  // Tail sits at x = 0, Head at x = length

struct Edge {
  std::string id;
  std::size_t tail = 0;
  std::size_t head = 0;
  double length = 1.0;
  EdgeCoefficients coeffs;

  std::size_t vertex_at(EndRole end) const { return end == EndRole::Tail ? tail : head; }
};

/// One entry of the ordered incident-edge list E_v.
struct Incidence {
  std::size_t edge;
  EndRole end;
};

/// Unvalidated graph description, as read from a file or built in code.
struct GraphSpec {
  struct EdgeSpec {
    std::string id;  // optional; defaults to "e<index>"
    std::string from;
    std::string to;
    double length = 1.0;
    double conductance = 1.0;
    double potential = 0.0;
    std::vector<double> conductance_profile;
    std::vector<double> potential_profile;
  };
  std::vector<std::string> vertices;
  std::vector<EdgeSpec> edges;
};

/// Validated, immutable metric graph.
///
/// Vertices keep the order of the description. Edges keep their order too,
/// but each edge is oriented so that x = 0 sits at the lexicographically
/// smaller vertex id. The incident list of a vertex follows edge order.
class MetricGraph {
 public:
  static MetricGraph validate(const GraphSpec& spec);

  std::size_t vertex_count() const { return vertex_ids_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const std::string& vertex_id(std::size_t v) const { return vertex_ids_.at(v); }
  std::optional<std::size_t> find_vertex(std::string_view id) const;
  /// Throws UnknownVertex.
  std::size_t vertex_index(std::string_view id) const;

  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(std::size_t e) const { return edges_.at(e); }
  const std::vector<Incidence>& incident(std::size_t v) const { return incidence_.at(v); }
  std::size_t degree(std::size_t v) const { return incidence_.at(v).size(); }

  /// c_e at the end of edge e that meets a vertex.
  double conductance_at_end(std::size_t e, EndRole end) const;
  double total_length() const;
  double min_length() const;
  bool is_connected() const;
  /// Number of continuity conditions, sum over v of (d_v - 1) = 2m - n.
  std::size_t continuity_row_count() const { return 2 * edge_count() - vertex_count(); }
  /// Row of the continuity block where the rows of vertex v start.
  std::size_t continuity_row_offset(std::size_t v) const { return continuity_offset_.at(v); }

  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  std::vector<std::string> vertex_ids_;
  std::vector<Edge> edges_;
  std::vector<std::vector<Incidence>> incidence_;
  std::vector<std::size_t> continuity_offset_;
  std::vector<std::string> warnings_;
};

/// Vertex condition matrices I_v, A_v, B_v and C(v)^T, columns in the
/// incident-edge order of v.
struct VertexConditions {
  Eigen::MatrixXd continuity;      // (d_v - 1) x d_v bidiagonal
  Eigen::MatrixXd values;          // A_v: continuity padded with a zero row
  Eigen::MatrixXd derivatives;     // B_v: zero except the last row
  Eigen::RowVectorXd conductance;  // C(v)^T
};

VertexConditions vertex_matrices(const MetricGraph& g, std::size_t v);
VertexConditions vertex_matrices(const MetricGraph& g, std::string_view vertex_id);

/// A function on the graph, stored as nodal values per edge (first entry at
/// x = 0). In the continuous space all edge ends meeting at a vertex agree.
struct GraphFunction {
  std::vector<Eigen::VectorXd> values;
  bool continuous = true;

  /// Value of edge e at the end meeting a vertex.
  double end_value(std::size_t e, EndRole end) const {
    const auto& v = values.at(e);
    return end == EndRole::Tail ? v(0) : v(v.size() - 1);
  }
};

// Small graphs used throughout the tests and the CLI.
MetricGraph make_interval(double length = 1.0, double conductance = 1.0, double potential = 0.0);
/// Path v1 - v2 - ... with `edges` unit-length edges.
MetricGraph make_path(std::size_t edges, double length = 1.0);
/// Star with center v0 and leaves v1..v<arms>.
MetricGraph make_star(std::size_t arms, double length = 1.0, double conductance = 1.0);

}  // namespace qgraph
