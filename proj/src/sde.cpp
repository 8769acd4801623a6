#include "qgraph/sde.hpp"

#include <cmath>

#include "qgraph/diagnostics.hpp"
#include "qgraph/dirichlet.hpp"
#include "qgraph/error.hpp"
#include "qgraph/parallel.hpp"

namespace qgraph {

namespace {

Eigen::MatrixXd clipped_sqrt(const Eigen::MatrixXd& q) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (q + q.transpose()));
  Eigen::VectorXd ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) ev(i) = std::sqrt(std::max(ev(i), 0.0));
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

void NoiseConfig::validate() const {
  if (!(std::isfinite(dt) && dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "dt must be positive");
  if (!(std::isfinite(T) && T >= dt * (1.0 - 1e-12))) throw Error(ErrorKind::InvalidArgument, "T must be at least dt");
  const double ratio = T / dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio)) {
    throw Error(ErrorKind::InvalidArgument, "dt must divide T");
  }
  if (covariance.rows() != covariance.cols()) throw Error(ErrorKind::InvalidArgument, "covariance must be square");
  if (covariance.size() == 0) return;
  if (!covariance.allFinite()) throw Error(ErrorKind::InvalidArgument, "covariance has non-finite entries");
  const double scale = std::max(1.0, covariance.cwiseAbs().maxCoeff());
  if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw Error(ErrorKind::InvalidArgument, "covariance is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(covariance, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-12 * scale) {
    throw Error(ErrorKind::InvalidArgument, "covariance is not positive semidefinite");
  }
}

std::size_t NoiseConfig::steps() const { return static_cast<std::size_t>(std::llround(T / dt)); }

Eigen::MatrixXd NoiseConfig::sqrt_covariance() const { return clipped_sqrt(covariance); }

PathRng::PathRng(std::uint64_t seed, std::uint64_t path) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32), 0x71u};
  engine_.seed(seq);
}

Eigen::MatrixXd build_drive_K(const SpectralBasis& basis) { return basis.vertex_traces; }

Eigen::MatrixXd build_drive_full(const MetricGraph& g, const SpectralBasis& basis) {
  return full_drive_from_traces(g, basis);
}

OUEnsemble make_ensemble(const Eigen::VectorXd& lambdas, const Eigen::MatrixXd& drives, const NoiseConfig& cfg) {
  cfg.validate();
  if (drives.cols() != lambdas.size()) throw Error(ErrorKind::InvalidArgument, "one drive per mode is required");
  if (drives.rows() != cfg.covariance.rows()) {
    throw Error(ErrorKind::InvalidArgument, "covariance dimension " + std::to_string(cfg.covariance.rows()) +
                                                " does not match the drive dimension " +
                                                std::to_string(drives.rows()));
  }
  if ((lambdas.array() > 0.0).any()) throw Error(ErrorKind::InvalidArgument, "mode eigenvalues must be nonpositive");
  OUEnsemble ens;
  ens.lambdas = lambdas;
  ens.drives = drives;
  const Eigen::MatrixXd root = cfg.sqrt_covariance();
  ens.shaped = drives.transpose() * root;
  ens.sigma2 = ens.shaped.rowwise().squaredNorm();
  return ens;
}

namespace {

// Runs one path, calling record(step, state) for the selected steps.
template <class Record>
void run_path(const OUEnsemble& ens, const NoiseConfig& cfg, std::uint64_t path, Record&& record) {
  const std::size_t steps = cfg.steps();
  const auto modes = static_cast<Eigen::Index>(ens.mode_count());
  Eigen::ArrayXd decay(modes), phi(modes);
  for (Eigen::Index k = 0; k < modes; ++k) {
    decay(k) = std::exp(ens.lambdas(k) * cfg.dt);
    phi(k) = std::sqrt(ou_variance_factor(ens.lambdas(k), cfg.dt));
  }
  PathRng rng(cfg.seed, path);
  Eigen::VectorXd w(ens.shaped.cols());
  Eigen::ArrayXd z = Eigen::ArrayXd::Zero(modes);
  record(std::size_t{0}, z);
  for (std::size_t s = 1; s <= steps; ++s) {
    rng.fill(w);
    z = decay * z + phi * (ens.shaped * w).array();
    record(s, z);
  }
}

}  // namespace

PathSample simulate_convolution(const OUEnsemble& ens, const NoiseConfig& cfg, std::uint64_t path,
                                std::size_t record_every) {
  cfg.validate();
  if (record_every == 0) throw Error(ErrorKind::InvalidArgument, "record_every must be positive");
  const std::size_t steps = cfg.steps();
  const std::size_t records = steps / record_every + 1 + (steps % record_every ? 1 : 0);
  PathSample out;
  out.seed = cfg.seed;
  out.path = path;
  out.times.resize(static_cast<Eigen::Index>(records));
  out.states.resize(static_cast<Eigen::Index>(ens.mode_count()), static_cast<Eigen::Index>(records));
  Eigen::Index col = 0;
  run_path(ens, cfg, path, [&](std::size_t s, const Eigen::ArrayXd& z) {
    if (s % record_every == 0 || s == steps) {
      out.times(col) = static_cast<double>(s) * cfg.dt;
      out.states.col(col++) = z.matrix();
    }
  });
  return out;
}

Eigen::VectorXd EnsembleSample::mean_square(std::size_t c) const {
  const auto& s = states.at(c);
  return s.array().square().colwise().mean().transpose();
}

Eigen::VectorXd EnsembleSample::mean_square_se(std::size_t c) const {
  const auto& s = states.at(c);
  const auto p = static_cast<double>(s.rows());
  const Eigen::ArrayXXd sq = s.array().square();
  const Eigen::ArrayXd mean = sq.colwise().mean().transpose();
  Eigen::ArrayXd var = Eigen::ArrayXd::Zero(mean.size());
  for (Eigen::Index k = 0; k < mean.size(); ++k) var(k) = (sq.col(k) - mean(k)).square().sum() / std::max(1.0, p - 1.0);
  return (var / p).sqrt().matrix();
}

EnsembleSample simulate_ensemble(const OUEnsemble& ens, const NoiseConfig& cfg, std::size_t paths,
                                 const std::vector<double>& checkpoints, std::size_t threads) {
  cfg.validate();
  if (paths == 0) throw Error(ErrorKind::InvalidArgument, "at least one path is required");
  std::vector<std::size_t> at;
  for (double t : checkpoints) {
    if (!(t >= 0.0 && t <= cfg.T * (1.0 + 1e-12))) throw Error(ErrorKind::InvalidArgument, "checkpoint outside [0, T]");
    at.push_back(static_cast<std::size_t>(std::llround(t / cfg.dt)));
  }
  EnsembleSample out;
  out.times.resize(static_cast<Eigen::Index>(at.size()));
  for (std::size_t c = 0; c < at.size(); ++c) out.times(static_cast<Eigen::Index>(c)) = static_cast<double>(at[c]) * cfg.dt;
  out.states.assign(at.size(), Eigen::MatrixXd(static_cast<Eigen::Index>(paths), static_cast<Eigen::Index>(ens.mode_count())));
  // Each path writes only its own rows.
  parallel_for(paths, threads, [&](std::size_t p) {
    run_path(ens, cfg, p, [&](std::size_t s, const Eigen::ArrayXd& z) {
      for (std::size_t c = 0; c < at.size(); ++c) {
        if (at[c] == s) out.states[c].row(static_cast<Eigen::Index>(p)) = z.matrix().transpose();
      }
    });
  });
  return out;
}

Eigen::VectorXd exact_covariance(const OUEnsemble& ens, double t) {
  if (!(t >= 0.0)) throw Error(ErrorKind::InvalidArgument, "t must be nonnegative");
  Eigen::VectorXd out(ens.lambdas.size());
  for (Eigen::Index k = 0; k < out.size(); ++k) out(k) = ens.sigma2(k) * ou_variance_factor(ens.lambdas(k), t);
  return out;
}

PathSample simulate_whitenoise_forcing(const SpectralBasis& basis, const NoiseConfig& cfg, std::uint64_t path,
                                       std::size_t record_every) {
  if (basis.mode_count() >= kMinSeriesModes) {
    if (trace_class_check(basis, cfg.T).verdict == Verdict::Diverging) {
      throw Error(ErrorKind::TraceDivergence, "trace-class series diverges for this basis");
    }
  }
  NoiseConfig white = cfg;
  const auto modes = static_cast<Eigen::Index>(basis.mode_count());
  white.covariance = Eigen::MatrixXd::Identity(modes, modes);
  const OUEnsemble ens = make_ensemble(basis.lambdas, Eigen::MatrixXd::Identity(modes, modes), white);
  return simulate_convolution(ens, white, path, record_every);
}

}  // namespace qgraph
