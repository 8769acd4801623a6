#include "qgraph/fem.hpp"

#include <cmath>

#include "qgraph/error.hpp"

namespace qgraph {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

// Cell-midpoint coefficient samples; exact for piecewise-constant data.
double cell_conductance(const Edge& e, std::size_t cell, std::size_t cells) {
  if (e.coeffs.conductance_profile.empty()) return e.coeffs.conductance;
  return e.coeffs.conductance_at((static_cast<double>(cell) + 0.5) / static_cast<double>(cells));
}

double cell_potential(const Edge& e, std::size_t cell, std::size_t cells) {
  if (e.coeffs.potential_profile.empty()) return e.coeffs.potential;
  return e.coeffs.potential_at((static_cast<double>(cell) + 0.5) / static_cast<double>(cells));
}

void add_symmetric(Triplets& t, std::size_t a, std::size_t b, double diag_a, double diag_b, double off) {
  const auto ia = static_cast<Eigen::Index>(a);
  const auto ib = static_cast<Eigen::Index>(b);
  t.emplace_back(ia, ia, diag_a);
  t.emplace_back(ib, ib, diag_b);
  t.emplace_back(ia, ib, off);
  t.emplace_back(ib, ia, off);
}

}  // namespace

Mesh Mesh::build(const MetricGraph& g, double h, Space space) {
  if (!(std::isfinite(h) && h > 0.0)) throw Error(ErrorKind::InvalidArgument, "mesh size must be positive");
  Mesh mesh(g);
  mesh.space_ = space;
  mesh.h_ = h;
  const std::size_t m = g.edge_count();
  std::size_t next = space == Space::Continuous ? g.vertex_count() : 2 * m;
  for (std::size_t e = 0; e < m; ++e) {
    const double ratio = g.edge(e).length / h;
    const auto cells = static_cast<std::size_t>(std::ceil(ratio - 1e-9 * std::max(1.0, ratio)));
    if (cells < 2) {
      throw Error(ErrorKind::MeshTooCoarse, "edge '" + g.edge(e).id + "' would get " + std::to_string(cells) +
                                                " cell(s) at h = " + std::to_string(h));
    }
    mesh.cells_.push_back(cells);
    mesh.interior_offset_.push_back(next);
    next += cells - 1;
  }
  mesh.dof_count_ = next;
  return mesh;
}

std::size_t Mesh::node_dof(std::size_t e, std::size_t j) const {
  const std::size_t n = cells_.at(e);
  if (j == 0) return end_dof(e, EndRole::Tail);
  if (j == n) return end_dof(e, EndRole::Head);
  return interior_offset_[e] + j - 1;
}

std::size_t Mesh::end_dof(std::size_t e, EndRole end) const {
  if (space_ == Space::Broken) return 2 * e + (end == EndRole::Tail ? 0 : 1);
  return graph_.edge(e).vertex_at(end);
}

std::size_t Mesh::vertex_dof(std::size_t v) const {
  if (space_ != Space::Continuous) throw Error(ErrorKind::BrokenSpaceInput, "broken mesh has no vertex dofs");
  return v;
}

Mesh Mesh::with_space(Space space) const { return build(graph_, h_, space); }

bool Mesh::same_grid(const Mesh& other) const {
  return cells_ == other.cells_ && graph_.vertex_count() == other.graph_.vertex_count();
}

FormMatrices assemble_form(const Mesh& mesh) {
  const auto& g = mesh.graph();
  Triplets ts, tp, tm;
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    const auto& edge = g.edge(e);
    const std::size_t n = mesh.cells(e);
    const double h = mesh.cell_size(e);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t a = mesh.node_dof(e, i);
      const std::size_t b = mesh.node_dof(e, i + 1);
      const double c = cell_conductance(edge, i, n) / h;
      const double p = cell_potential(edge, i, n) * h / 6.0;
      const double w = h / 6.0;
      add_symmetric(ts, a, b, c, c, -c);
      add_symmetric(tp, a, b, 2.0 * p, 2.0 * p, p);
      add_symmetric(tm, a, b, 2.0 * w, 2.0 * w, w);
    }
  }
  const auto n = static_cast<Eigen::Index>(mesh.dof_count());
  FormMatrices f;
  f.stiffness.resize(n, n);
  f.potential.resize(n, n);
  f.M.resize(n, n);
  f.stiffness.setFromTriplets(ts.begin(), ts.end());
  f.potential.setFromTriplets(tp.begin(), tp.end());
  f.M.setFromTriplets(tm.begin(), tm.end());
  f.K = f.stiffness + f.potential;
  f.lumped_mass = f.M * Eigen::VectorXd::Ones(n);
  return f;
}

Eigen::VectorXd vertex_trace(const Mesh& mesh, const Eigen::VectorXd& u) {
  if (mesh.space() != Space::Continuous) {
    throw Error(ErrorKind::BrokenSpaceInput, "vertex trace needs a continuous-space vector");
  }
  return u.head(static_cast<Eigen::Index>(mesh.graph().vertex_count()));
}

Eigen::VectorXd vertex_trace(const Mesh& mesh, const GraphFunction& u) {
  const auto& g = mesh.graph();
  Eigen::VectorXd trace(g.vertex_count());
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    const auto& inc = g.incident(v);
    const double first = u.end_value(inc.front().edge, inc.front().end);
    for (const auto& i : inc) {
      const double value = u.end_value(i.edge, i.end);
      if (std::abs(value - first) > 1e-12 * std::max(1.0, std::abs(first))) {
        throw Error(ErrorKind::BrokenSpaceInput,
                    "edge ends disagree at vertex '" + g.vertex_id(v) + "'");
      }
    }
    trace(static_cast<Eigen::Index>(v)) = first;
  }
  return trace;
}

GraphFunction to_graph_function(const Mesh& mesh, const Eigen::VectorXd& u) {
  GraphFunction gf;
  gf.continuous = mesh.space() == Space::Continuous;
  for (std::size_t e = 0; e < mesh.graph().edge_count(); ++e) {
    Eigen::VectorXd values(static_cast<Eigen::Index>(mesh.cells(e) + 1));
    for (std::size_t j = 0; j <= mesh.cells(e); ++j) values(static_cast<Eigen::Index>(j)) = u(static_cast<Eigen::Index>(mesh.node_dof(e, j)));
    gf.values.push_back(std::move(values));
  }
  return gf;
}

Eigen::VectorXd from_graph_function(const Mesh& mesh, const GraphFunction& u) {
  const auto& g = mesh.graph();
  if (u.values.size() != g.edge_count()) throw Error(ErrorKind::MeshMismatch, "edge count differs from the mesh");
  if (mesh.space() == Space::Continuous) vertex_trace(mesh, u);  // validates continuity
  Eigen::VectorXd out(static_cast<Eigen::Index>(mesh.dof_count()));
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    if (u.values[e].size() != static_cast<Eigen::Index>(mesh.cells(e) + 1)) {
      throw Error(ErrorKind::MeshMismatch, "edge '" + g.edge(e).id + "' has the wrong number of nodes");
    }
    for (std::size_t j = 0; j <= mesh.cells(e); ++j) out(static_cast<Eigen::Index>(mesh.node_dof(e, j))) = u.values[e](static_cast<Eigen::Index>(j));
  }
  return out;
}

Eigen::VectorXd interpolate(const Mesh& mesh, const std::function<double(std::size_t, double)>& f) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(mesh.dof_count()));
  for (std::size_t e = 0; e < mesh.graph().edge_count(); ++e) {
    for (std::size_t j = 0; j <= mesh.cells(e); ++j) {
      out(static_cast<Eigen::Index>(mesh.node_dof(e, j))) = f(e, mesh.node_x(e, j));
    }
  }
  return out;
}

SparseMatrix prolongation(const Mesh& continuous, const Mesh& broken) {
  if (continuous.space() != Space::Continuous || broken.space() != Space::Broken || !continuous.same_grid(broken)) {
    throw Error(ErrorKind::MeshMismatch, "prolongation needs a continuous and a broken mesh on the same grid");
  }
  Triplets t;
  for (std::size_t e = 0; e < continuous.graph().edge_count(); ++e) {
    for (std::size_t j = 0; j <= continuous.cells(e); ++j) {
      t.emplace_back(static_cast<Eigen::Index>(broken.node_dof(e, j)),
                     static_cast<Eigen::Index>(continuous.node_dof(e, j)), 1.0);
    }
  }
  SparseMatrix p(static_cast<Eigen::Index>(broken.dof_count()), static_cast<Eigen::Index>(continuous.dof_count()));
  p.setFromTriplets(t.begin(), t.end());
  return p;
}

Eigen::VectorXd end_residuals(const Mesh& mesh, const Eigen::VectorXd& u, double shift) {
  const auto& g = mesh.graph();
  Eigen::VectorXd r(static_cast<Eigen::Index>(2 * g.edge_count()));
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    const auto& edge = g.edge(e);
    const std::size_t n = mesh.cells(e);
    const double h = mesh.cell_size(e);
    auto at = [&](std::size_t j) { return u(static_cast<Eigen::Index>(mesh.node_dof(e, j))); };
    auto local = [&](std::size_t cell, double end_value, double other) {
      const double c = cell_conductance(edge, cell, n);
      const double p = cell_potential(edge, cell, n);
      return c / h * (end_value - other) + (p + shift) * h / 6.0 * (2.0 * end_value + other);
    };
    r(static_cast<Eigen::Index>(2 * e)) = local(0, at(0), at(1));
    r(static_cast<Eigen::Index>(2 * e + 1)) = local(n - 1, at(n), at(n - 1));
  }
  return r;
}

BoundaryOperators jump_and_flux_operators(const Mesh& broken, const FormMatrices& form, double shift) {
  if (broken.space() != Space::Broken) {
    throw Error(ErrorKind::InvalidArgument, "jump and flux operators live on the broken space");
  }
  const auto& g = broken.graph();
  const auto cols = static_cast<Eigen::Index>(broken.dof_count());
  const SparseMatrix a = form.K + shift * form.M;

  Triplets tj, tf;
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    const auto& inc = g.incident(v);
    const std::size_t row0 = g.continuity_row_offset(v);
    for (std::size_t r = 0; r + 1 < inc.size(); ++r) {
      tj.emplace_back(static_cast<Eigen::Index>(row0 + r), static_cast<Eigen::Index>(broken.end_dof(inc[r].edge, inc[r].end)), 1.0);
      tj.emplace_back(static_cast<Eigen::Index>(row0 + r), static_cast<Eigen::Index>(broken.end_dof(inc[r + 1].edge, inc[r + 1].end)), -1.0);
    }
    for (const auto& i : inc) {
      // A is symmetric, so column end_dof holds the row.
      for (SparseMatrix::InnerIterator it(a, static_cast<Eigen::Index>(broken.end_dof(i.edge, i.end))); it; ++it) {
        tf.emplace_back(static_cast<Eigen::Index>(v), it.row(), -it.value());
      }
    }
  }
  BoundaryOperators ops;
  ops.jump.resize(static_cast<Eigen::Index>(g.continuity_row_count()), cols);
  ops.flux.resize(static_cast<Eigen::Index>(g.vertex_count()), cols);
  ops.jump.setFromTriplets(tj.begin(), tj.end());
  ops.flux.setFromTriplets(tf.begin(), tf.end());
  return ops;
}

}  // namespace qgraph
