#include "qgraph/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <boost/math/distributions/students_t.hpp>

#include "qgraph/error.hpp"
#include "qgraph/parallel.hpp"

namespace qgraph {

namespace {

void require_shift(double lambda) {
  if (!(std::isfinite(lambda) && lambda > 0.0)) throw Error(ErrorKind::NonpositiveShift, "lambda must be positive");
}

}  // namespace

double frac_norm(const Eigen::VectorXd& coefficients, const SpectralBasis& basis, double lambda, double alpha) {
  require_shift(lambda);
  if (!(alpha > -1.0 && alpha < 1.0)) throw Error(ErrorKind::InvalidArgument, "alpha must lie in (-1, 1)");
  if (coefficients.size() > basis.lambdas.size()) {
    throw Error(ErrorKind::InvalidArgument, "more coefficients than basis modes");
  }
  double s = 0.0;
  for (Eigen::Index k = 0; k < coefficients.size(); ++k) {
    s += std::pow(lambda - basis.lambdas(k), 2.0 * alpha) * coefficients(k) * coefficients(k);
  }
  return std::sqrt(s);
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Converging: return "converging";
    case Verdict::Diverging: return "diverging";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

std::string to_string(FitStatus s) {
  switch (s) {
    case FitStatus::Ok: return "ok";
    case FitStatus::NoSignal: return "NoSignal";
    case FitStatus::NoCrossing: return "NoCrossing";
  }
  return "NoSignal";
}

TailSlope tail_slope(const Eigen::VectorXd& increments, std::size_t block) {
  const auto n = static_cast<std::size_t>(increments.size());
  const std::size_t first = n / 2;
  std::vector<double> xs, ys;
  for (std::size_t b0 = first; b0 + block <= n; b0 += block) {
    double sum = 0.0;
    for (std::size_t k = b0; k < b0 + block; ++k) sum += increments(static_cast<Eigen::Index>(k));
    if (sum > 0.0) {
      // Block centre in 1-based mode numbering.
      xs.push_back(std::log(static_cast<double>(b0) + 0.5 * static_cast<double>(block) + 0.5));
      ys.push_back(std::log(sum));
    }
  }
  TailSlope r;
  r.points = xs.size();
  if (xs.size() < 3) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    r.slope = r.ci_low = r.ci_high = nan;
    return r;
  }
  const auto cnt = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= cnt;
  my /= cnt;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  r.slope = sxy / sxx;
  double rss = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double res = ys[i] - my - r.slope * (xs[i] - mx);
    rss += res * res;
  }
  const double se = std::sqrt(rss / (cnt - 2.0) / sxx);
  const boost::math::students_t dist(cnt - 2.0);
  const double q = boost::math::quantile(dist, 0.975);
  r.ci_low = r.slope - q * se;
  r.ci_high = r.slope + q * se;
  return r;
}

SeriesVerdict classify_series(const Eigen::VectorXd& increments, std::size_t min_modes) {
  const auto n = static_cast<std::size_t>(increments.size());
  if (n < min_modes) {
    throw Error(ErrorKind::InsufficientModes, std::to_string(n) + " modes given, at least " +
                                                  std::to_string(min_modes) + " are needed for a verdict");
  }
  SeriesVerdict v;
  v.increments = increments;
  v.partial_sums.resize(increments.size());
  double acc = 0.0;
  for (Eigen::Index k = 0; k < increments.size(); ++k) v.partial_sums(k) = acc += increments(k);
  v.tail_first = n / 2;

  if (increments.tail(static_cast<Eigen::Index>(n - n / 2)).cwiseAbs().maxCoeff() == 0.0) {
    // A tail of exact zeros: the series is a finite sum.
    v.slope = v.ci_low = v.ci_high = -std::numeric_limits<double>::infinity();
    v.verdict = Verdict::Converging;
    return v;
  }
  const TailSlope t = tail_slope(increments, v.block);
  v.slope = t.slope;
  v.ci_low = t.ci_low;
  v.ci_high = t.ci_high;
  if (std::isnan(t.slope)) {
    v.verdict = Verdict::Inconclusive;
  } else if (t.slope < v.converge_below && t.ci_high < -1.0) {
    v.verdict = Verdict::Converging;
  } else if (t.slope > v.diverge_above && t.ci_low > -1.0) {
    v.verdict = Verdict::Diverging;
  } else {
    v.verdict = Verdict::Inconclusive;
  }
  return v;
}

SeriesVerdict regularity_series(const SpectralBasis& basis, const Eigen::MatrixXd& drives, const Eigen::MatrixXd& Q,
                                double alpha, double t) {
  const double lambda = basis.lambda_shift;
  require_shift(lambda);
  if (!(t >= 0.0)) throw Error(ErrorKind::InvalidArgument, "t must be nonnegative");
  if (drives.cols() != basis.lambdas.size() || drives.rows() != Q.rows() || Q.rows() != Q.cols()) {
    throw Error(ErrorKind::InvalidArgument, "drive and covariance dimensions do not match");
  }
  if (basis.mode_count() < kMinSeriesModes) {
    throw Error(ErrorKind::InsufficientModes, std::to_string(basis.mode_count()) + " modes computed, at least " +
                                                  std::to_string(kMinSeriesModes) + " are needed");
  }
  const Eigen::VectorXd s2 = (drives.transpose() * Q * drives).diagonal();
  Eigen::VectorXd inc(s2.size());
  for (Eigen::Index k = 0; k < inc.size(); ++k) {
    const double lk = basis.lambdas(k);
    inc(k) = std::pow(lambda - lk, 2.0 * alpha) * std::max(s2(k), 0.0) * ou_variance_factor(lk, t);
  }
  return classify_series(inc);
}

SeriesVerdict regularity_series_K(const SpectralBasis& basis, const Eigen::MatrixXd& Q, double alpha, double t) {
  return regularity_series(basis, basis.vertex_traces, Q, alpha, t);
}

SeriesVerdict regularity_series_full(const SpectralBasis& basis, const Eigen::MatrixXd& full_drives,
                                     const Eigen::MatrixXd& Q, double alpha, double t) {
  return regularity_series(basis, full_drives, Q, alpha, t);
}

SeriesVerdict trace_class_check(const SpectralBasis& basis, double T) {
  if (!(T >= 0.0)) throw Error(ErrorKind::InvalidArgument, "T must be nonnegative");
  Eigen::VectorXd inc(basis.lambdas.size());
  for (Eigen::Index k = 0; k < inc.size(); ++k) inc(k) = ou_variance_factor(basis.lambdas(k), T);
  return classify_series(inc);
}

namespace {

double threshold_for(const Eigen::VectorXd& v, const SpectralBasis& basis, double lambda,
                     const std::vector<double>& alphas, std::vector<double>* slopes, bool* found) {
  *found = false;
  double prev_alpha = 0.0, prev_g = 0.0;
  double root = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    Eigen::VectorXd inc(v.size());
    for (Eigen::Index k = 0; k < v.size(); ++k) inc(k) = std::pow(lambda - basis.lambdas(k), 2.0 * alphas[i]) * v(k);
    const double g = tail_slope(inc).slope + 1.0;
    if (slopes) slopes->push_back(g - 1.0);
    if (!*found && i > 0 && prev_g < 0.0 && g >= 0.0) {
      root = prev_alpha + (alphas[i] - prev_alpha) * (-prev_g) / (g - prev_g);
      *found = true;
    }
    prev_alpha = alphas[i];
    prev_g = g;
  }
  return root;
}

}  // namespace

AlphaFit empirical_alpha_fit(const Eigen::MatrixXd& states, const SpectralBasis& basis, double lambda,
                             const std::vector<double>& alpha_grid, std::size_t bootstrap, std::uint64_t seed) {
  require_shift(lambda);
  if (states.cols() != basis.lambdas.size()) throw Error(ErrorKind::InvalidArgument, "one column per mode expected");
  if (alpha_grid.size() < 2) throw Error(ErrorKind::InvalidArgument, "alpha grid needs at least two points");
  AlphaFit fit;
  fit.alphas = alpha_grid;
  std::sort(fit.alphas.begin(), fit.alphas.end());
  const Eigen::VectorXd v = states.array().square().colwise().mean().transpose();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (v.size() == 0 || v.maxCoeff() == 0.0) {
    fit.status = FitStatus::NoSignal;
    fit.threshold = fit.ci_low = fit.ci_high = nan;
    return fit;
  }
  bool found = false;
  fit.threshold = threshold_for(v, basis, lambda, fit.alphas, &fit.slopes, &found);
  fit.status = found ? FitStatus::Ok : FitStatus::NoCrossing;
  fit.ci_low = fit.ci_high = fit.threshold;
  if (!found || bootstrap == 0) return fit;

  std::mt19937_64 rng(seed);
  const auto paths = states.rows();
  std::uniform_int_distribution<Eigen::Index> pick(0, paths - 1);
  std::vector<double> roots;
  const Eigen::MatrixXd sq = states.array().square();
  for (std::size_t b = 0; b < bootstrap; ++b) {
    Eigen::VectorXd vb = Eigen::VectorXd::Zero(v.size());
    for (Eigen::Index p = 0; p < paths; ++p) vb += sq.row(pick(rng)).transpose();
    vb /= static_cast<double>(paths);
    bool ok = false;
    const double r = threshold_for(vb, basis, lambda, fit.alphas, nullptr, &ok);
    if (ok) roots.push_back(r);
  }
  if (roots.empty()) return fit;
  std::sort(roots.begin(), roots.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(roots.size() - 1);
    const auto i = static_cast<std::size_t>(pos);
    const double w = pos - static_cast<double>(i);
    return i + 1 < roots.size() ? (1.0 - w) * roots[i] + w * roots[i + 1] : roots[i];
  };
  fit.ci_low = quantile(0.025);
  fit.ci_high = quantile(0.975);
  return fit;
}

IncrementFit mean_square_increments(const OUEnsemble& ens, const NoiseConfig& cfg, std::size_t paths, double t0,
                                    const std::vector<std::size_t>& lag_steps, std::size_t threads) {
  cfg.validate();
  if (lag_steps.empty() || paths == 0) throw Error(ErrorKind::InvalidArgument, "need lags and paths");
  const auto start = static_cast<std::size_t>(std::llround(t0 / cfg.dt));
  const std::size_t max_lag = *std::max_element(lag_steps.begin(), lag_steps.end());
  NoiseConfig run = cfg;
  run.T = static_cast<double>(start + max_lag) * cfg.dt;

  Eigen::MatrixXd per_path(static_cast<Eigen::Index>(paths), static_cast<Eigen::Index>(lag_steps.size()));
  parallel_for(paths, threads, [&](std::size_t p) {
    const PathSample s = simulate_convolution(ens, run, p);
    const Eigen::VectorXd base = s.states.col(static_cast<Eigen::Index>(start));
    for (std::size_t j = 0; j < lag_steps.size(); ++j) {
      per_path(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(j)) =
          (s.states.col(static_cast<Eigen::Index>(start + lag_steps[j])) - base).squaredNorm();
    }
  });

  IncrementFit fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t used = 0;
  for (std::size_t j = 0; j < lag_steps.size(); ++j) {
    const double lag = static_cast<double>(lag_steps[j]) * cfg.dt;
    const double ms = per_path.col(static_cast<Eigen::Index>(j)).mean();
    fit.lags.push_back(lag);
    fit.mean_square.push_back(ms);
    if (lag > 0.0 && ms > 0.0) {
      const double x = std::log(lag), y = std::log(ms);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++used;
    }
  }
  const auto cnt = static_cast<double>(used);
  fit.exponent = used >= 2 ? (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx) : std::numeric_limits<double>::quiet_NaN();
  return fit;
}

}  // namespace qgraph
