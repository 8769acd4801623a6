#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "qgraph/fem.hpp"
#include "qgraph/graph.hpp"
#include "qgraph/spectral.hpp"

namespace qgraph {

/// Dirichlet map for Kirchhoff data only, one column per vertex.
///
/// Column i solves (K + lambda M) u = e_i with e_i the unit load at the dof
/// of vertex i, i.e. a_lambda(u, v) = v(v_i) for every test function v.
struct DirichletMapK {
  double lambda = 1.0;
  Eigen::MatrixXd columns;  // continuous dofs x vertices

  std::size_t size() const { return static_cast<std::size_t>(columns.cols()); }
};

DirichletMapK dirichlet_map_K(const Mesh& mesh, const FormMatrices& form, double lambda);

/// Matrix of pairings <D_K e_i, f_k>_M, vertices x modes.
/// Throws MeshMismatch when the basis was computed on another grid.
Eigen::MatrixXd adjoint_coefficients(const Mesh& mesh, const FormMatrices& form, const SpectralBasis& basis,
                                     const DirichletMapK& map);

/// Scales column k of the pairing matrix by (lambda - lambda_k). For the
/// Kirchhoff map the result equals the vertex traces L f_k.
Eigen::MatrixXd drive_from_adjoint(const SpectralBasis& basis, const Eigen::MatrixXd& coefficients, double lambda);

/// Boundary operator applied to edge-end data (2e tail, 2e+1 head).
/// `derivatives` point into the edges. Rows: continuity block I_v U(v) vertex
/// by vertex, then one Kirchhoff row C(v)^T U'(v) per vertex.
Eigen::VectorXd apply_boundary_operator(const MetricGraph& g, const Eigen::VectorXd& end_values,
                                        const Eigen::VectorXd& derivatives);

/// Closed-form element of Ker(lambda - A_max) for piecewise-constant
/// coefficients: u_e(x) = a_e cosh(mu_e x) + b_e sinh(mu_e x).
struct AnalyticFullSolution {
  double lambda = 1.0;
  std::vector<double> mu;
  std::vector<double> a;
  std::vector<double> b;
  std::vector<double> lengths;

  double value(std::size_t e, double x) const;
  double derivative(std::size_t e, double x) const;
  Eigen::VectorXd end_values() const;
  /// Derivatives pointing into the edges.
  Eigen::VectorXd end_derivatives() const;
  /// Nodal values on a broken mesh.
  Eigen::VectorXd sample(const Mesh& broken) const;
};

/// Solves B u = z on Ker(lambda - A_max) with the 2m x 2m system for the
/// cosh/sinh coefficients. z is ordered (continuity block, Kirchhoff block).
/// Throws NonpositiveShift, InvalidArgument for sampled coefficient profiles,
/// SingularVertexSystem.
AnalyticFullSolution dirichlet_map_full(const MetricGraph& g, double lambda, const Eigen::VectorXd& z);

/// Full map on the broken space: interior rows of (K + lambda M) u = 0 with
/// jump u = z_C and flux u = z_K, one column per unit datum.
struct DirichletMapFull {
  double lambda = 1.0;
  Eigen::MatrixXd columns;  // broken dofs x 2m
};

DirichletMapFull dirichlet_map_full(const Mesh& broken, const FormMatrices& form, double lambda);
/// Single datum variant of the broken-space solve.
Eigen::VectorXd dirichlet_map_full(const Mesh& broken, const FormMatrices& form, double lambda,
                                   const Eigen::VectorXd& z);

/// Pairings <D e_j, f_k> in the broken mass inner product, 2m x modes.
/// `continuous` is the mesh of the basis, `broken` the mesh of the map.
Eigen::MatrixXd full_mode_coefficients(const Mesh& continuous, const Mesh& broken, const FormMatrices& broken_form,
                                       const SpectralBasis& basis, const DirichletMapFull& map);

/// The products (lambda - lambda_k) <D e_j, f_k> from the vertex and
/// derivative traces alone, 2m x modes. Kirchhoff rows are -L f_k;
/// continuity rows combine the derivative traces with the end values
/// forced by the jump datum. Independent of lambda.
Eigen::MatrixXd full_drive_from_traces(const MetricGraph& g, const SpectralBasis& basis);

struct SurjectivityResult {
  double gamma = 1.0;
  int doublings = 0;
  double contraction = 0.0;  // max-norm of N^-1 Ntilde F at gamma
  Eigen::VectorXd alpha;
  Eigen::VectorXd beta;
  Eigen::VectorXd residual;  // B u - z
  double residual_inf = 0.0;

  double value(const MetricGraph& g, std::size_t e, double x) const;
};

/// Max-norm of N_gamma^-1 Ntilde_gamma F_gamma.
double surjectivity_contraction(const MetricGraph& g, double gamma);

/// Builds u_e(x) = alpha_e exp(-gamma x) + beta_e exp(-gamma (l_e - x)) with
/// B u = z, doubling gamma from 1 until the contraction bound holds.
/// Throws GammaOverflow past 2^40.
SurjectivityResult surjectivity_construct(const MetricGraph& g, const Eigen::VectorXd& z);

}  // namespace qgraph
