#include "qgraph/solver.hpp"

#include <cmath>
#include <utility>

#include "qgraph/error.hpp"

namespace qgraph {

namespace {

double phi1(double z) { return std::abs(z) < 1e-8 ? 1.0 + 0.5 * z : std::expm1(z) / z; }

double horner(const std::vector<double>& c, double u) {
  double r = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) r = r * u + *it;
  return r;
}

void check_polynomial(const std::vector<double>& c) {
  if (c.size() < 2 || c.size() % 2 != 0) {
    throw Error(ErrorKind::InvalidArgument, "polynomial drift needs odd degree");
  }
  if (!(c.back() < 0.0)) throw Error(ErrorKind::InvalidArgument, "leading coefficient must be negative");
  for (double a : c) {
    if (!std::isfinite(a)) throw Error(ErrorKind::InvalidArgument, "polynomial coefficients must be finite");
  }
}

}  // namespace

Drift Drift::zero() { return Drift{}; }

Drift Drift::linear(double a) {
  Drift d;
  d.name = "linear";
  d.apply = [a](std::size_t, double u) { return a * u; };
  d.lipschitz = std::abs(a);
  return d;
}

Drift Drift::sine(double L) {
  Drift d;
  d.name = "sine";
  d.apply = [L](std::size_t, double u) { return L * std::sin(u); };
  d.lipschitz = std::abs(L);
  return d;
}

Drift Drift::polynomial_per_edge(std::vector<std::vector<double>> coefficients) {
  if (coefficients.empty()) throw Error(ErrorKind::InvalidArgument, "no polynomial coefficients given");
  for (const auto& c : coefficients) check_polynomial(c);
  Drift d;
  d.kind = DriftKind::OddPolynomial;
  d.name = "polynomial";
  d.coefficients = std::move(coefficients);
  // The odd leading term is decreasing, so the one-sided constant is bounded
  // by the largest derivative of the lower-order part at its maximum.
  double one_sided = 0.0;
  for (const auto& c : d.coefficients) one_sided = std::max(one_sided, c.size() > 1 ? c[1] : 0.0);
  d.lipschitz = one_sided;
  d.apply = [coef = d.coefficients](std::size_t e, double u) {
    return horner(coef.size() == 1 ? coef.front() : coef.at(e), u);
  };
  return d;
}

Drift Drift::polynomial(std::vector<double> coefficients) {
  return polynomial_per_edge({std::move(coefficients)});
}

Drift Drift::cubic() {
  Drift d = polynomial({0.0, 1.0, 0.0, -1.0});
  d.name = "cubic";
  return d;
}

GalerkinSpace::GalerkinSpace(const Mesh& mesh, const FormMatrices&, const SpectralBasis& basis)
    : mesh_(mesh), basis_(basis) {
  if (!basis.matches(mesh)) throw Error(ErrorKind::MeshMismatch, "basis was computed on another mesh");
  for (std::size_t e = 0; e < mesh.graph().edge_count(); ++e) {
    const double h = mesh.cell_size(e);
    for (std::size_t j = 0; j <= mesh.cells(e); ++j) {
      const bool end = j == 0 || j == mesh.cells(e);
      nodes_.push_back({static_cast<Eigen::Index>(mesh.node_dof(e, j)), e, end ? 0.5 * h : h});
    }
  }
}

Eigen::VectorXd GalerkinSpace::reconstruct(const Eigen::VectorXd& x) const { return basis_.eigvecs * x; }

Eigen::VectorXd GalerkinSpace::drift_coefficients(const Drift& drift, const Eigen::VectorXd& x) const {
  const Eigen::VectorXd u = reconstruct(x);
  Eigen::VectorXd q = Eigen::VectorXd::Zero(u.size());
  for (const auto& n : nodes_) q(n.dof) += n.weight * drift.apply(n.edge, u(n.dof));
  return basis_.eigvecs.transpose() * q;
}

Projection project_initial(const GalerkinSpace& space, const FormMatrices& form, const Eigen::VectorXd& u0) {
  if (u0.size() != static_cast<Eigen::Index>(space.mesh().dof_count())) {
    throw Error(ErrorKind::MeshMismatch, "initial state does not match the mesh");
  }
  Projection p;
  p.coefficients = space.basis().eigvecs.transpose() * (form.M * u0);
  const Eigen::VectorXd r = u0 - space.reconstruct(p.coefficients);
  p.residual = std::sqrt(std::max(0.0, r.dot(form.M * r)));
  return p;
}

Projection project_initial(const GalerkinSpace& space, const FormMatrices& form, const GraphFunction& u0) {
  return project_initial(space, form, from_graph_function(space.mesh(), u0));
}

namespace {

// Exponential Euler without noise; polynomial drifts split the step while it
// would more than double the norm, or while the drift increment exceeds half
// the size of the state (floored at one).
Eigen::VectorXd deterministic_step(const GalerkinSpace& space, const Eigen::VectorXd& x, const Drift& drift,
                                   double dt, int depth) {
  const Eigen::ArrayXd z = space.basis().lambdas.array() * dt;
  Eigen::VectorXd next = (z.exp() * x.array()).matrix();
  if (drift.is_zero()) return next;
  const Eigen::ArrayXd weight = z.unaryExpr([](double v) { return phi1(v); }) * dt;
  const Eigen::VectorXd increment = (weight * space.drift_coefficients(drift, x).array()).matrix();
  next += increment;
  const double size = std::max(x.norm(), 1.0);
  const bool blowup = !next.allFinite() || next.norm() > 2.0 * size || increment.norm() > 0.5 * size;
  if (drift.kind == DriftKind::OddPolynomial && blowup && depth < 30) {
    const Eigen::VectorXd half = deterministic_step(space, x, drift, 0.5 * dt, depth + 1);
    return deterministic_step(space, half, drift, 0.5 * dt, depth + 1);
  }
  return next;
}

std::size_t step_count(double T, double dt) {
  if (!(std::isfinite(dt) && dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "dt must be positive");
  if (!(std::isfinite(T) && T >= 0.0)) throw Error(ErrorKind::InvalidArgument, "T must be nonnegative");
  const double ratio = T / dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio)) {
    throw Error(ErrorKind::InvalidArgument, "dt must divide T");
  }
  return static_cast<std::size_t>(std::llround(ratio));
}

}  // namespace

Eigen::VectorXd step(const GalerkinSpace& space, const Eigen::VectorXd& x, const Drift& drift,
                     const Eigen::VectorXd& dZ, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "dt must be positive");
  if (x.size() != static_cast<Eigen::Index>(space.mode_count()) || dZ.size() != x.size()) {
    throw Error(ErrorKind::InvalidArgument, "state and increment must have one entry per mode");
  }
  Eigen::VectorXd next = deterministic_step(space, x, drift, dt, 0) + dZ;
  if (!next.allFinite()) throw Error(ErrorKind::NonFiniteState, "state became non-finite (drift blow-up)");
  return next;
}

SolutionPath solve_mild(const GalerkinSpace& space, const Drift& drift, const std::optional<NoiseInput>& noise,
                        const Eigen::VectorXd& x0, double T, double dt, std::size_t record_every) {
  const std::size_t steps = step_count(T, dt);
  if (record_every == 0) throw Error(ErrorKind::InvalidArgument, "record_every must be positive");
  const auto modes = static_cast<Eigen::Index>(space.mode_count());
  if (x0.size() != modes) throw Error(ErrorKind::InvalidArgument, "initial state needs one entry per mode");

  Eigen::MatrixXd z;
  if (noise) {
    if (noise->ensemble.mode_count() != space.mode_count()) {
      throw Error(ErrorKind::InvalidArgument, "noise ensemble and basis have different mode counts");
    }
    if (noise->substeps == 0) throw Error(ErrorKind::InvalidArgument, "substeps must be positive");
    NoiseConfig cfg = noise->config;
    cfg.dt = dt / static_cast<double>(noise->substeps);
    cfg.T = static_cast<double>(steps) * dt;
    if (steps > 0) z = simulate_convolution(noise->ensemble, cfg, noise->path, noise->substeps).states;
  }
  const Eigen::ArrayXd decay = (space.basis().lambdas.array() * dt).exp();

  const std::size_t records = steps / record_every + 1 + (steps % record_every ? 1 : 0);
  SolutionPath out;
  out.initial = x0;
  out.times.resize(static_cast<Eigen::Index>(records));
  out.coefficients.resize(modes, static_cast<Eigen::Index>(records));
  if (noise) out.convolution.resize(modes, static_cast<Eigen::Index>(records));
  Eigen::Index col = 0;
  auto record = [&](std::size_t s, const Eigen::VectorXd& x) {
    if (s % record_every == 0 || s == steps) {
      out.times(col) = static_cast<double>(s) * dt;
      out.coefficients.col(col) = x;
      if (noise) out.convolution.col(col) = steps > 0 ? Eigen::VectorXd(z.col(static_cast<Eigen::Index>(s))) : Eigen::VectorXd::Zero(modes);
      ++col;
    }
  };

  Eigen::VectorXd x = x0;
  Eigen::VectorXd dZ = Eigen::VectorXd::Zero(modes);
  record(0, x);
  for (std::size_t s = 0; s < steps; ++s) {
    if (noise) {
      const auto i = static_cast<Eigen::Index>(s);
      dZ = z.col(i + 1) - (decay * z.col(i).array()).matrix();
    }
    x = step(space, x, drift, dZ, dt);
    record(s + 1, x);
  }
  return out;
}

CouplingResult feller_coupling_test(const GalerkinSpace& space, const Drift& drift,
                                    const std::optional<NoiseInput>& noise, const Eigen::VectorXd& x0,
                                    const Eigen::VectorXd& y0, double T, double dt) {
  const SolutionPath a = solve_mild(space, drift, noise, x0, T, dt);
  const SolutionPath b = solve_mild(space, drift, noise, y0, T, dt);
  CouplingResult r;
  r.initial_distance = (x0 - y0).norm();
  r.sup_distance = (a.coefficients - b.coefficients).colwise().norm().maxCoeff();
  r.ratio = r.initial_distance > 0.0 ? r.sup_distance / r.initial_distance : 0.0;
  return r;
}

}  // namespace qgraph
