#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "qgraph/graph.hpp"
#include "qgraph/spectral.hpp"

namespace qgraph {

/// (1 - exp(2 lambda t)) / (-2 lambda), with the limit t at lambda = 0.
inline double ou_variance_factor(double lambda, double t) {
  if (lambda == 0.0) return t;
  return std::expm1(2.0 * lambda * t) / (2.0 * lambda);
}

/// Covariance of the driving Brownian motion plus the time grid.
struct NoiseConfig {
  Eigen::MatrixXd covariance;
  std::uint64_t seed = 0;
  double dt = 1e-3;
  double T = 1.0;

  /// Checks symmetry, dt > 0, T >= dt and that dt divides T; clips
  /// eigenvalues in [-1e-12, 0) to zero. Throws InvalidArgument otherwise.
  void validate() const;
  std::size_t steps() const;
  /// Symmetric square root of the clipped covariance.
  Eigen::MatrixXd sqrt_covariance() const;
};

/// Gaussian stream of one path, seeded from (master seed, path index).
class PathRng {
 public:
  PathRng(std::uint64_t seed, std::uint64_t path);
  double normal() { return dist_(engine_); }
  void fill(Eigen::VectorXd& w) {
    for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = dist_(engine_);
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> dist_;
};

/// Per-mode Ornstein-Uhlenbeck system dz_k = lambda_k z_k dt + g_k^T dbeta.
struct OUEnsemble {
  Eigen::VectorXd lambdas;
  Eigen::MatrixXd drives;  // column g_k per mode
  Eigen::VectorXd sigma2;  // g_k^T Q g_k
  Eigen::MatrixXd shaped;  // rows g_k^T Q^{1/2}

  std::size_t mode_count() const { return static_cast<std::size_t>(lambdas.size()); }
};

/// Drives for the Kirchhoff-noise convolution: g_k = L f_k.
Eigen::MatrixXd build_drive_K(const SpectralBasis& basis);
/// Drives for full vertex noise: g_k = (lambda - lambda_k) D^* f_k.
Eigen::MatrixXd build_drive_full(const MetricGraph& g, const SpectralBasis& basis);

OUEnsemble make_ensemble(const Eigen::VectorXd& lambdas, const Eigen::MatrixXd& drives, const NoiseConfig& cfg);

/// Mode coefficients on a time grid. Column j of `states` is the state at
/// `times(j)`.
struct PathSample {
  Eigen::VectorXd times;
  Eigen::MatrixXd states;
  std::uint64_t seed = 0;
  std::uint64_t path = 0;
};

/// Exact OU recursion z <- exp(lambda dt) z + phi_k g_k^T Q^{1/2} w with one
/// standard normal vector w per step shared by all modes. Every
/// `record_every`-th state is kept, plus the final one.
PathSample simulate_convolution(const OUEnsemble& ens, const NoiseConfig& cfg, std::uint64_t path = 0,
                                std::size_t record_every = 1);

/// States of many paths at a few checkpoint times.
struct EnsembleSample {
  Eigen::VectorXd times;
  std::vector<Eigen::MatrixXd> states;  // per checkpoint: paths x modes

  std::size_t path_count() const { return states.empty() ? 0 : static_cast<std::size_t>(states[0].rows()); }
  /// Mean of z_k^2 over paths at checkpoint c.
  Eigen::VectorXd mean_square(std::size_t c) const;
  /// Standard error of that mean.
  Eigen::VectorXd mean_square_se(std::size_t c) const;
};

/// Paths 0..paths-1 of simulate_convolution, run in parallel; results do not
/// depend on the thread count. Checkpoints are rounded to the grid.
EnsembleSample simulate_ensemble(const OUEnsemble& ens, const NoiseConfig& cfg, std::size_t paths,
                                 const std::vector<double>& checkpoints, std::size_t threads = 0);

/// Var z_k(t) = sigma_k^2 (1 - exp(2 lambda_k t)) / (-2 lambda_k), sigma_k^2 t
/// for lambda_k = 0.
Eigen::VectorXd exact_covariance(const OUEnsemble& ens, double t);

/// OU modes driven by independent unit noises (space-time white noise in the
/// eigenbasis). Throws TraceDivergence when the trace-class series of the
/// basis diverges.
PathSample simulate_whitenoise_forcing(const SpectralBasis& basis, const NoiseConfig& cfg, std::uint64_t path = 0,
                                       std::size_t record_every = 1);

}  // namespace qgraph
