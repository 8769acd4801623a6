#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "qgraph/fem.hpp"

namespace qgraph {

/// Leading eigenpairs of the discrete generator, lambda_k = -nu_k where
/// K f = nu M f.
///
/// `lambdas` is nonincreasing and nonpositive, `eigvecs` holds M-orthonormal
/// columns. `vertex_traces` has one column L f_k per mode; `deriv_traces`
/// holds per edge end (2e tail, 2e+1 head) the derivative of f_k pointing
/// into the edge, recovered from the edge-local residual.
struct SpectralBasis {
  Eigen::VectorXd lambdas;
  Eigen::MatrixXd eigvecs;
  Eigen::MatrixXd vertex_traces;
  Eigen::MatrixXd deriv_traces;
  double lambda_shift = 1.0;
  std::vector<std::size_t> mesh_cells;

  std::size_t mode_count() const { return static_cast<std::size_t>(lambdas.size()); }
  std::size_t dof_count() const { return static_cast<std::size_t>(eigvecs.rows()); }
  bool matches(const Mesh& mesh) const;
};

/// Dense symmetric-definite solve after a Cholesky reduction of M.
///
/// At most a quarter of the dofs may be requested (TooManyModes); the upper
/// part of a piecewise-linear spectrum is unreliable. Signs are fixed so the
/// first nonzero vertex value of every mode is positive.
SpectralBasis eigensolve(const Mesh& mesh, const FormMatrices& form, std::size_t n_modes,
                         double lambda_shift = 1.0);

/// All generalized eigenvalues nu of K f = nu M f in ascending order.
Eigen::VectorXd generalized_eigenvalues(const Eigen::MatrixXd& K, const Eigen::MatrixXd& M);

/// Eigenvalues lambda (nonincreasing) of the operator with a Dirichlet
/// condition at the listed vertices.
Eigen::VectorXd pinned_spectrum(const Mesh& mesh, const FormMatrices& form,
                                const std::vector<std::size_t>& pinned_vertices, std::size_t count);

struct AsymptoticsReport {
  double l1 = 0.0;
  double l2 = 0.0;
  double loglog_slope = 0.0;
};

/// Empirical bounds l1 k^2 <= shift - lambda_k <= l2 k^2 over k in
/// [k_first, k_last] (1-based) and the least-squares slope of
/// log(shift - lambda_k) against log k.
AsymptoticsReport asymptotics_check(const SpectralBasis& basis, double shift, std::size_t k_first,
                                    std::size_t k_last);

/// Group of (numerically) equal eigenvalues, [first, first + size).
struct Multiplet {
  std::size_t first = 0;
  std::size_t size = 0;
  double lambda = 0.0;
  double trace_norm2 = 0.0;  // sum of |L f|^2 over the group
};

std::vector<Multiplet> group_multiplets(const SpectralBasis& basis, double rel_tol = 1e-8);

struct VertexBoundReport {
  Eigen::VectorXd trace_norm2;  // |L f_k|^2 per mode
  Eigen::VectorXd running_max;
  double sup = 0.0;
  /// Max of multiplet-aggregated |L f|^2 over the upper half of multiplets
  /// divided by the max over the lower half.
  double growth_ratio = 0.0;
  std::vector<Multiplet> multiplets;
};

VertexBoundReport vertex_bound_estimate(const SpectralBasis& basis);

}  // namespace qgraph
