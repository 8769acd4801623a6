#include "qgraph/dirichlet.hpp"

#include <cmath>
#include <limits>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "qgraph/error.hpp"

namespace qgraph {

namespace {

void require_shift(double lambda) {
  if (!(std::isfinite(lambda) && lambda > 0.0)) {
    throw Error(ErrorKind::NonpositiveShift, "lambda must be positive, got " + std::to_string(lambda));
  }
}

Eigen::Index end_index(const Incidence& i) {
  return static_cast<Eigen::Index>(2 * i.edge + (i.end == EndRole::Tail ? 0 : 1));
}

}  // namespace

DirichletMapK dirichlet_map_K(const Mesh& mesh, const FormMatrices& form, double lambda) {
  require_shift(lambda);
  if (mesh.space() != Space::Continuous) {
    throw Error(ErrorKind::InvalidArgument, "the Kirchhoff map lives on the continuous space");
  }
  const SparseMatrix a = form.K + lambda * form.M;
  Eigen::SimplicialLDLT<SparseMatrix> solver(a);
  if (solver.info() != Eigen::Success) throw Error(ErrorKind::SolverFailure, "factorization of K + lambda M failed");

  const auto n = static_cast<Eigen::Index>(mesh.graph().vertex_count());
  Eigen::MatrixXd loads = Eigen::MatrixXd::Zero(a.rows(), n);
  for (Eigen::Index i = 0; i < n; ++i) loads(static_cast<Eigen::Index>(mesh.vertex_dof(static_cast<std::size_t>(i))), i) = 1.0;
  DirichletMapK map;
  map.lambda = lambda;
  map.columns = solver.solve(loads);
  return map;
}

Eigen::MatrixXd adjoint_coefficients(const Mesh& mesh, const FormMatrices& form, const SpectralBasis& basis,
                                     const DirichletMapK& map) {
  if (!basis.matches(mesh) || map.columns.rows() != static_cast<Eigen::Index>(mesh.dof_count())) {
    throw Error(ErrorKind::MeshMismatch, "basis and Dirichlet map were built on different meshes");
  }
  return map.columns.transpose() * (form.M * basis.eigvecs);
}

Eigen::MatrixXd drive_from_adjoint(const SpectralBasis& basis, const Eigen::MatrixXd& coefficients, double lambda) {
  require_shift(lambda);
  Eigen::MatrixXd out = coefficients;
  for (Eigen::Index k = 0; k < out.cols(); ++k) out.col(k) *= lambda - basis.lambdas(k);
  return out;
}

Eigen::VectorXd apply_boundary_operator(const MetricGraph& g, const Eigen::VectorXd& end_values,
                                        const Eigen::VectorXd& derivatives) {
  const auto ends = static_cast<Eigen::Index>(2 * g.edge_count());
  if (end_values.size() != ends || derivatives.size() != ends) {
    throw Error(ErrorKind::InvalidArgument, "edge-end data must have 2m entries");
  }
  Eigen::VectorXd out(ends);
  const auto kirchhoff0 = static_cast<Eigen::Index>(g.continuity_row_count());
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    const auto vc = vertex_matrices(g, v);
    const auto& inc = g.incident(v);
    Eigen::VectorXd u(static_cast<Eigen::Index>(inc.size())), du(static_cast<Eigen::Index>(inc.size()));
    for (std::size_t j = 0; j < inc.size(); ++j) {
      u(static_cast<Eigen::Index>(j)) = end_values(end_index(inc[j]));
      du(static_cast<Eigen::Index>(j)) = derivatives(end_index(inc[j]));
    }
    if (vc.continuity.rows() > 0) {
      out.segment(static_cast<Eigen::Index>(g.continuity_row_offset(v)), vc.continuity.rows()) = vc.continuity * u;
    }
    out(kirchhoff0 + static_cast<Eigen::Index>(v)) = vc.conductance.dot(du);
  }
  return out;
}

double AnalyticFullSolution::value(std::size_t e, double x) const {
  return a[e] * std::cosh(mu[e] * x) + b[e] * std::sinh(mu[e] * x);
}

double AnalyticFullSolution::derivative(std::size_t e, double x) const {
  return mu[e] * (a[e] * std::sinh(mu[e] * x) + b[e] * std::cosh(mu[e] * x));
}

Eigen::VectorXd AnalyticFullSolution::end_values() const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(2 * a.size()));
  for (std::size_t e = 0; e < a.size(); ++e) {
    out(static_cast<Eigen::Index>(2 * e)) = value(e, 0.0);
    out(static_cast<Eigen::Index>(2 * e + 1)) = value(e, lengths[e]);
  }
  return out;
}

Eigen::VectorXd AnalyticFullSolution::end_derivatives() const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(2 * a.size()));
  for (std::size_t e = 0; e < a.size(); ++e) {
    out(static_cast<Eigen::Index>(2 * e)) = derivative(e, 0.0);
    out(static_cast<Eigen::Index>(2 * e + 1)) = -derivative(e, lengths[e]);
  }
  return out;
}

Eigen::VectorXd AnalyticFullSolution::sample(const Mesh& broken) const {
  if (broken.graph().edge_count() != a.size()) throw Error(ErrorKind::MeshMismatch, "edge count differs");
  Eigen::VectorXd out(static_cast<Eigen::Index>(broken.dof_count()));
  for (std::size_t e = 0; e < a.size(); ++e) {
    for (std::size_t j = 0; j <= broken.cells(e); ++j) {
      out(static_cast<Eigen::Index>(broken.node_dof(e, j))) = value(e, broken.node_x(e, j));
    }
  }
  return out;
}

AnalyticFullSolution dirichlet_map_full(const MetricGraph& g, double lambda, const Eigen::VectorXd& z) {
  require_shift(lambda);
  const std::size_t m = g.edge_count();
  const auto dim = static_cast<Eigen::Index>(2 * m);
  if (z.size() != dim) throw Error(ErrorKind::InvalidArgument, "boundary datum must have 2m entries");
  AnalyticFullSolution s;
  s.lambda = lambda;
  for (const auto& e : g.edges()) {
    if (!e.coeffs.is_piecewise_constant()) {
      throw Error(ErrorKind::InvalidArgument, "edge '" + e.id + "' has sampled coefficients; use the mesh variant");
    }
    s.mu.push_back(std::sqrt((lambda + e.coeffs.potential) / e.coeffs.conductance));
    s.lengths.push_back(e.length);
  }
  s.a.assign(m, 0.0);
  s.b.assign(m, 0.0);

  // Column j of the system is B applied to the j-th coefficient unit vector.
  Eigen::MatrixXd sys(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    const auto e = static_cast<std::size_t>(j / 2);
    (j % 2 == 0 ? s.a : s.b)[e] = 1.0;
    sys.col(j) = apply_boundary_operator(g, s.end_values(), s.end_derivatives());
    s.a[e] = s.b[e] = 0.0;
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(sys);
  lu.setThreshold(1e-13);
  if (!lu.isInvertible()) throw Error(ErrorKind::SingularVertexSystem, "vertex system is numerically singular");
  const Eigen::VectorXd coef = lu.solve(z);
  for (std::size_t e = 0; e < m; ++e) {
    s.a[e] = coef(static_cast<Eigen::Index>(2 * e));
    s.b[e] = coef(static_cast<Eigen::Index>(2 * e + 1));
  }
  return s;
}

namespace {

class FullMapSystem {
 public:
  FullMapSystem(const Mesh& broken, const FormMatrices& form, double lambda) {
    require_shift(lambda);
    if (broken.space() != Space::Broken) throw Error(ErrorKind::InvalidArgument, "the full map needs a broken mesh");
    const auto& g = broken.graph();
    const auto ends = static_cast<Eigen::Index>(2 * g.edge_count());
    const auto nc = static_cast<Eigen::Index>(g.continuity_row_count());
    const SparseMatrix a = form.K + lambda * form.M;
    const auto ops = jump_and_flux_operators(broken, form, lambda);

    std::vector<Eigen::Triplet<double>> t;
    for (Eigen::Index k = 0; k < a.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(a, k); it; ++it) {
        if (it.row() >= ends) t.emplace_back(it.row(), it.col(), it.value());
      }
    }
    for (Eigen::Index k = 0; k < ops.jump.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(ops.jump, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
    }
    for (Eigen::Index k = 0; k < ops.flux.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(ops.flux, k); it; ++it) t.emplace_back(nc + it.row(), it.col(), it.value());
    }
    SparseMatrix sys(a.rows(), a.cols());
    sys.setFromTriplets(t.begin(), t.end());
    sys.makeCompressed();
    lu_.compute(sys);
    if (lu_.info() != Eigen::Success) {
      throw Error(ErrorKind::SingularVertexSystem, "broken-space vertex system is singular");
    }
    rows_ = a.rows();
    ends_ = ends;
  }

  Eigen::MatrixXd solve(const Eigen::MatrixXd& z) {
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(rows_, z.cols());
    rhs.topRows(ends_) = z;
    return lu_.solve(rhs);
  }

 private:
  Eigen::SparseLU<SparseMatrix> lu_;
  Eigen::Index rows_ = 0;
  Eigen::Index ends_ = 0;
};

}  // namespace

DirichletMapFull dirichlet_map_full(const Mesh& broken, const FormMatrices& form, double lambda) {
  FullMapSystem sys(broken, form, lambda);
  DirichletMapFull map;
  map.lambda = lambda;
  const auto ends = static_cast<Eigen::Index>(2 * broken.graph().edge_count());
  map.columns = sys.solve(Eigen::MatrixXd::Identity(ends, ends));
  return map;
}

Eigen::VectorXd dirichlet_map_full(const Mesh& broken, const FormMatrices& form, double lambda,
                                   const Eigen::VectorXd& z) {
  if (z.size() != static_cast<Eigen::Index>(2 * broken.graph().edge_count())) {
    throw Error(ErrorKind::InvalidArgument, "boundary datum must have 2m entries");
  }
  FullMapSystem sys(broken, form, lambda);
  return sys.solve(z);
}

Eigen::MatrixXd full_mode_coefficients(const Mesh& continuous, const Mesh& broken, const FormMatrices& broken_form,
                                       const SpectralBasis& basis, const DirichletMapFull& map) {
  if (!basis.matches(continuous) || map.columns.rows() != static_cast<Eigen::Index>(broken.dof_count())) {
    throw Error(ErrorKind::MeshMismatch, "basis and full map were built on different meshes");
  }
  const SparseMatrix p = prolongation(continuous, broken);
  const Eigen::MatrixXd pf = p * basis.eigvecs;
  return map.columns.transpose() * (broken_form.M * pf);
}

Eigen::MatrixXd full_drive_from_traces(const MetricGraph& g, const SpectralBasis& basis) {
  const auto modes = static_cast<Eigen::Index>(basis.mode_count());
  const auto nc = static_cast<Eigen::Index>(g.continuity_row_count());
  Eigen::MatrixXd out(static_cast<Eigen::Index>(2 * g.edge_count()), modes);
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    const auto& inc = g.incident(v);
    const auto row0 = static_cast<Eigen::Index>(g.continuity_row_offset(v));
    // A unit datum in row r forces U_j - U_{j+1} = delta_jr; take U_j = 1
    // for j <= r and 0 beyond. The flux sum over v vanishes for eigenvectors,
    // so the additive constant does not matter.
    Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(modes);
    for (std::size_t r = 0; r + 1 < inc.size(); ++r) {
      const double c = g.conductance_at_end(inc[r].edge, inc[r].end);
      acc += c * basis.deriv_traces.row(end_index(inc[r]));
      out.row(row0 + static_cast<Eigen::Index>(r)) = acc;
    }
    out.row(nc + static_cast<Eigen::Index>(v)) = -basis.vertex_traces.row(static_cast<Eigen::Index>(v));
  }
  return out;
}

namespace {

struct SurjectivityBlocks {
  Eigen::MatrixXd N;
  Eigen::MatrixXd Ntilde;
  Eigen::VectorXd E;
};

SurjectivityBlocks surjectivity_blocks(const MetricGraph& g, double gamma) {
  const auto m = static_cast<Eigen::Index>(g.edge_count());
  const auto n = static_cast<Eigen::Index>(g.vertex_count());
  const auto nc = static_cast<Eigen::Index>(g.continuity_row_count());
  Eigen::MatrixXd V0 = Eigen::MatrixXd::Zero(nc, m), V1 = Eigen::MatrixXd::Zero(nc, m);
  Eigen::MatrixXd W0 = Eigen::MatrixXd::Zero(n, m), W1 = Eigen::MatrixXd::Zero(n, m);
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    const auto& inc = g.incident(v);
    const auto row0 = static_cast<Eigen::Index>(g.continuity_row_offset(v));
    for (std::size_t r = 0; r + 1 < inc.size(); ++r) {
      for (const auto& [which, sign] : {std::pair{r, 1.0}, std::pair{r + 1, -1.0}}) {
        const auto& i = inc[which];
        auto& target = i.end == EndRole::Tail ? V0 : V1;
        target(row0 + static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i.edge)) += sign;
      }
    }
    for (const auto& i : inc) {
      auto& target = i.end == EndRole::Tail ? W0 : W1;
      target(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(i.edge)) = g.conductance_at_end(i.edge, i.end);
    }
  }
  SurjectivityBlocks s;
  s.N.resize(2 * m, 2 * m);
  s.N << V0, V1, -gamma * W0, -gamma * W1;
  s.Ntilde.resize(2 * m, 2 * m);
  s.Ntilde << V1, V0, gamma * W1, gamma * W0;
  s.E.resize(2 * m);
  for (Eigen::Index e = 0; e < m; ++e) {
    s.E(e) = s.E(m + e) = std::exp(-gamma * g.edge(static_cast<std::size_t>(e)).length);
  }
  return s;
}

Eigen::MatrixXd contraction_matrix(const SurjectivityBlocks& s) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(s.N);
  if (!lu.isInvertible()) throw Error(ErrorKind::SingularVertexSystem, "N_gamma is singular");
  return lu.solve(s.Ntilde * s.E.asDiagonal());
}

}  // namespace

double surjectivity_contraction(const MetricGraph& g, double gamma) {
  if (!(gamma > 0.0)) throw Error(ErrorKind::InvalidArgument, "gamma must be positive");
  return contraction_matrix(surjectivity_blocks(g, gamma)).cwiseAbs().maxCoeff();
}

double SurjectivityResult::value(const MetricGraph& g, std::size_t e, double x) const {
  const auto i = static_cast<Eigen::Index>(e);
  return alpha(i) * std::exp(-gamma * x) + beta(i) * std::exp(-gamma * (g.edge(e).length - x));
}

SurjectivityResult surjectivity_construct(const MetricGraph& g, const Eigen::VectorXd& z) {
  const auto m = static_cast<Eigen::Index>(g.edge_count());
  if (z.size() != 2 * m) throw Error(ErrorKind::InvalidArgument, "boundary datum must have 2m entries");
  constexpr double kGammaMax = 1099511627776.0;  // 2^40

  SurjectivityResult r;
  SurjectivityBlocks blocks;
  for (r.gamma = 1.0;; r.gamma *= 2.0, ++r.doublings) {
    if (r.gamma > kGammaMax) {
      throw Error(ErrorKind::GammaOverflow, "no contracting gamma up to 2^40");
    }
    blocks = surjectivity_blocks(g, r.gamma);
    r.contraction = contraction_matrix(blocks).cwiseAbs().maxCoeff();
    if (r.contraction < 1.0) break;
  }

  const Eigen::MatrixXd sys = blocks.N + blocks.Ntilde * blocks.E.asDiagonal();
  const Eigen::VectorXd ab = sys.fullPivLu().solve(z);
  r.alpha = ab.head(m);
  r.beta = ab.tail(m);

  Eigen::VectorXd values(2 * m), derivs(2 * m);
  for (Eigen::Index e = 0; e < m; ++e) {
    const double E = blocks.E(e);
    values(2 * e) = r.alpha(e) + r.beta(e) * E;
    values(2 * e + 1) = r.alpha(e) * E + r.beta(e);
    derivs(2 * e) = r.gamma * (-r.alpha(e) + r.beta(e) * E);
    derivs(2 * e + 1) = -r.gamma * (-r.alpha(e) * E + r.beta(e));
  }
  r.residual = apply_boundary_operator(g, values, derivs) - z;
  r.residual_inf = r.residual.size() ? r.residual.cwiseAbs().maxCoeff() : 0.0;
  return r;
}

}  // namespace qgraph
