#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "qgraph/graph.hpp"

namespace qgraph {

using SparseMatrix = Eigen::SparseMatrix<double>;

enum class Space { Continuous, Broken };

/// Uniform piecewise-linear grid on every edge plus the global dof map.
///
/// Continuous space: dofs 0..n-1 are the vertices, interior nodes follow
/// edge by edge. Broken space: dofs 0..2m-1 are the edge ends (2e for the
/// tail of edge e, 2e+1 for its head), interior nodes follow.
class Mesh {
 public:
  /// Throws MeshTooCoarse when some edge would get fewer than 2 cells.
  static Mesh build(const MetricGraph& g, double h, Space space);

  const MetricGraph& graph() const { return graph_; }
  Space space() const { return space_; }
  double target_h() const { return h_; }
  std::size_t dof_count() const { return dof_count_; }
  std::size_t cells(std::size_t e) const { return cells_.at(e); }
  double cell_size(std::size_t e) const { return graph_.edge(e).length / static_cast<double>(cells_.at(e)); }
  /// Global dof of node j (0..cells) of edge e.
  std::size_t node_dof(std::size_t e, std::size_t j) const;
  /// Dof of the edge end; in the continuous space this is the vertex dof.
  std::size_t end_dof(std::size_t e, EndRole end) const;
  /// Continuous space only.
  std::size_t vertex_dof(std::size_t v) const;
  /// Coordinate of node j of edge e.
  double node_x(std::size_t e, std::size_t j) const { return static_cast<double>(j) * cell_size(e); }

  /// Same grid in the other space.
  Mesh with_space(Space space) const;
  /// True when both meshes discretize the same graph with the same cells.
  bool same_grid(const Mesh& other) const;

 private:
  Mesh(const MetricGraph& g) : graph_(g) {}

  MetricGraph graph_;
  Space space_ = Space::Continuous;
  double h_ = 0.0;
  std::size_t dof_count_ = 0;
  std::vector<std::size_t> cells_;
  std::vector<std::size_t> interior_offset_;
};

inline Mesh build_mesh(const MetricGraph& g, double h, Space space) { return Mesh::build(g, h, space); }

/// Stiffness-plus-potential matrix K realizing the form a(u, v) and the
/// consistent mass matrix M. `stiffness` and `potential` are the two parts
/// of K; `lumped_mass` is the row-sum diagonal of M.
struct FormMatrices {
  SparseMatrix K;
  SparseMatrix M;
  SparseMatrix stiffness;
  SparseMatrix potential;
  Eigen::VectorXd lumped_mass;
};

FormMatrices assemble_form(const Mesh& mesh);

/// Vertex values (the operator L) of a continuous-space coefficient vector.
Eigen::VectorXd vertex_trace(const Mesh& mesh, const Eigen::VectorXd& u);
/// Throws BrokenSpaceInput when the edge ends at some vertex disagree.
Eigen::VectorXd vertex_trace(const Mesh& mesh, const GraphFunction& u);

GraphFunction to_graph_function(const Mesh& mesh, const Eigen::VectorXd& u);
/// Throws BrokenSpaceInput when a broken function is mapped to a continuous mesh.
Eigen::VectorXd from_graph_function(const Mesh& mesh, const GraphFunction& u);
/// Nodal interpolant of f(edge, x).
Eigen::VectorXd interpolate(const Mesh& mesh, const std::function<double(std::size_t, double)>& f);

/// Embedding of the continuous space into the broken space on the same grid.
SparseMatrix prolongation(const Mesh& continuous, const Mesh& broken);

/// Edge-local residual at every edge end, ordered 2e (tail), 2e+1 (head):
/// r = ((K_e + shift M_e) u) evaluated at the end node, with K_e, M_e the
/// matrices of edge e alone. For a solution of the edge equation this is
/// -c_e(v) times the derivative pointing into the edge.
Eigen::VectorXd end_residuals(const Mesh& mesh, const Eigen::VectorXd& u, double shift);

/// Boundary operator of the broken space.
///
/// `jump` stacks I_v U(v) vertex by vertex (2m - n rows); `flux` computes
/// C(v)^T U'(v) (derivatives into the edges) as the negated sum of the
/// (K + shift M) rows of the edge ends at v. The flux is exact for discrete
/// solutions of (K + shift M) u = 0 at the interior nodes.
struct BoundaryOperators {
  SparseMatrix jump;
  SparseMatrix flux;
};

BoundaryOperators jump_and_flux_operators(const Mesh& broken, const FormMatrices& form, double shift = 0.0);

}  // namespace qgraph
