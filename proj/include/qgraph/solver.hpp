#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qgraph/fem.hpp"
#include "qgraph/sde.hpp"
#include "qgraph/spectral.hpp"

namespace qgraph {

enum class DriftKind { Lipschitz, OddPolynomial };

/// Pointwise drift F_e acting on the values of edge e.
struct Drift {
  DriftKind kind = DriftKind::Lipschitz;
  std::string name = "zero";
  std::function<double(std::size_t edge, double u)> apply = [](std::size_t, double) { return 0.0; };
  /// Lipschitz constant (Lipschitz kind) or one-sided constant of the linear
  /// part (polynomial kind).
  double lipschitz = 0.0;
  /// Polynomial kind: ascending coefficients per edge (one set shared when
  /// the list has a single entry).
  std::vector<std::vector<double>> coefficients;

  bool is_zero() const { return name == "zero"; }

  static Drift zero();
  /// F(u) = a u.
  static Drift linear(double a);
  /// F(u) = L sin(u), Lipschitz with constant |L|.
  static Drift sine(double L = 1.0);
  /// Ascending coefficients a_0..a_d with d odd and a_d < 0.
  /// Throws InvalidArgument otherwise.
  static Drift polynomial(std::vector<double> coefficients);
  static Drift polynomial_per_edge(std::vector<std::vector<double>> coefficients);
  /// F(u) = u - u^3.
  static Drift cubic();
};

/// Spectral Galerkin space: eigenbasis plus the lumped quadrature used for
/// the drift. Vertex nodes carry h_e / 2 for each incident edge e, so every
/// edge evaluates its own F_e there.
class GalerkinSpace {
 public:
  GalerkinSpace(const Mesh& mesh, const FormMatrices& form, const SpectralBasis& basis);

  const Mesh& mesh() const { return mesh_; }
  const SpectralBasis& basis() const { return basis_; }
  std::size_t mode_count() const { return basis_.mode_count(); }

  /// Nodal values sum_k x_k f_k.
  Eigen::VectorXd reconstruct(const Eigen::VectorXd& x) const;
  /// <F(u), f_k> with lumped quadrature, u = reconstruct(x).
  Eigen::VectorXd drift_coefficients(const Drift& drift, const Eigen::VectorXd& x) const;
  /// M-norm of the reconstruction, equal to |x| by orthonormality.
  double norm(const Eigen::VectorXd& x) const { return x.norm(); }

 private:
  struct Node {
    Eigen::Index dof;
    std::size_t edge;
    double weight;
  };
  Mesh mesh_;
  SpectralBasis basis_;
  std::vector<Node> nodes_;
};

struct Projection {
  Eigen::VectorXd coefficients;
  double residual = 0.0;  // |u0 - sum c_k f_k|_M
};

/// Coefficients <u0, f_k>_M of a continuous-space nodal vector.
Projection project_initial(const GalerkinSpace& space, const FormMatrices& form, const Eigen::VectorXd& u0);
Projection project_initial(const GalerkinSpace& space, const FormMatrices& form, const GraphFunction& u0);

/// One exponential Euler step
/// x <- exp(lambda dt) x + dt phi1(lambda dt) <F(u), f> + dZ.
/// Polynomial drifts are substepped (deterministic part only) whenever a
/// step would more than double the norm or the drift increment exceeds half
/// of max(|x|, 1). Throws NonFiniteState.
Eigen::VectorXd step(const GalerkinSpace& space, const Eigen::VectorXd& x, const Drift& drift,
                     const Eigen::VectorXd& dZ, double dt);

/// Noise input of the mild solver: an OU ensemble on the basis modes.
struct NoiseInput {
  OUEnsemble ensemble;
  NoiseConfig config;  // seed and covariance; dt and T are taken from the solve
  std::uint64_t path = 0;
  /// The convolution is simulated at dt / substeps and subsampled, so runs
  /// with dt and dt / 2 (substeps 2 and 1) see the same noise path.
  std::size_t substeps = 1;
};

struct SolutionPath {
  Eigen::VectorXd times;
  Eigen::MatrixXd coefficients;  // modes x times
  Eigen::MatrixXd convolution;   // Z(t) on the same grid, empty without noise
  Eigen::VectorXd initial;

  Eigen::VectorXd norms() const { return coefficients.colwise().norm().transpose(); }
};

/// Mild solution on [0, T] with step dt; every `record_every`-th state is
/// kept together with the final one.
SolutionPath solve_mild(const GalerkinSpace& space, const Drift& drift, const std::optional<NoiseInput>& noise,
                        const Eigen::VectorXd& x0, double T, double dt, std::size_t record_every = 1);

struct CouplingResult {
  double sup_distance = 0.0;
  double initial_distance = 0.0;
  double ratio = 0.0;
};

/// Runs two solutions from x0 and y0 with the same noise path.
CouplingResult feller_coupling_test(const GalerkinSpace& space, const Drift& drift,
                                    const std::optional<NoiseInput>& noise, const Eigen::VectorXd& x0,
                                    const Eigen::VectorXd& y0, double T, double dt);

}  // namespace qgraph
