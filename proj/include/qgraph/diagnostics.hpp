#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qgraph/sde.hpp"
#include "qgraph/spectral.hpp"

namespace qgraph {

/// Series verdicts need at least this many modes.
inline constexpr std::size_t kMinSeriesModes = 100;

/// sqrt(sum_k (lambda - lambda_k)^(2 alpha) c_k^2) for alpha in (-1, 1).
double frac_norm(const Eigen::VectorXd& coefficients, const SpectralBasis& basis, double lambda, double alpha);

enum class Verdict { Converging, Diverging, Inconclusive };
std::string to_string(Verdict v);

/// Evidence for the convergence of a positive series from its tail.
///
/// The tail is modes [N/2, N); increments are summed in blocks of four
/// consecutive modes (absorbing multiplets and vanishing terms) and
/// log(block sum) is regressed on log(block centre). Converging needs
/// slope < -1.15 with the 95% interval below -1, diverging needs
/// slope > -0.85 with the interval above -1.
struct SeriesVerdict {
  Eigen::VectorXd increments;
  Eigen::VectorXd partial_sums;
  double slope = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  Verdict verdict = Verdict::Inconclusive;
  double converge_below = -1.15;
  double diverge_above = -0.85;
  std::size_t tail_first = 0;  // 0-based first mode of the tail
  std::size_t block = 4;
};

/// Least-squares tail slope with its 95% interval, as used by the verdicts.
struct TailSlope {
  double slope = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t points = 0;
};
TailSlope tail_slope(const Eigen::VectorXd& increments, std::size_t block = 4);

/// Throws InsufficientModes below `min_modes` increments.
SeriesVerdict classify_series(const Eigen::VectorXd& increments, std::size_t min_modes = kMinSeriesModes);

/// Closed-form E|Z(t)|_alpha^2 series for mode drives g_k and noise
/// covariance Q: increments (lambda - lambda_k)^(2 alpha) g_k^T Q g_k
/// (1 - exp(2 lambda_k t)) / (-2 lambda_k), lambda = basis.lambda_shift.
SeriesVerdict regularity_series(const SpectralBasis& basis, const Eigen::MatrixXd& drives, const Eigen::MatrixXd& Q,
                                double alpha, double t);
/// Kirchhoff noise: drives L f_k, Q of size n.
SeriesVerdict regularity_series_K(const SpectralBasis& basis, const Eigen::MatrixXd& Q, double alpha, double t);
/// Full vertex noise: drives (lambda - lambda_k) D^* f_k (2m x modes), Q of size 2m.
SeriesVerdict regularity_series_full(const SpectralBasis& basis, const Eigen::MatrixXd& full_drives,
                                     const Eigen::MatrixXd& Q, double alpha, double t);

/// Terms (1 - exp(2 lambda_k T)) / (-2 lambda_k) (T for lambda_k = 0) of the
/// Hilbert-Schmidt integral of the semigroup.
SeriesVerdict trace_class_check(const SpectralBasis& basis, double T);

enum class FitStatus { Ok, NoSignal, NoCrossing };
std::string to_string(FitStatus s);

/// Threshold alpha at which the Monte Carlo series sum_k (lambda -
/// lambda_k)^(2 alpha) E z_k^2 switches from converging to diverging,
/// located as the root of tail slope + 1 over the alpha grid. The interval
/// comes from a path bootstrap.
struct AlphaFit {
  std::vector<double> alphas;
  std::vector<double> slopes;
  double threshold = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  FitStatus status = FitStatus::NoSignal;
};

AlphaFit empirical_alpha_fit(const Eigen::MatrixXd& states, const SpectralBasis& basis, double lambda,
                             const std::vector<double>& alpha_grid, std::size_t bootstrap = 200,
                             std::uint64_t seed = 1);

/// Mean-square increments E|Z(t0 + lag) - Z(t0)|^2 over paths and the
/// least-squares exponent of their log-log fit against the lag.
struct IncrementFit {
  std::vector<double> lags;
  std::vector<double> mean_square;
  double exponent = 0.0;
};

IncrementFit mean_square_increments(const OUEnsemble& ens, const NoiseConfig& cfg, std::size_t paths, double t0,
                                    const std::vector<std::size_t>& lag_steps, std::size_t threads = 0);

}  // namespace qgraph
