#include "qgraph/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "qgraph/error.hpp"

extern "C" void dsyevr_(const char* jobz, const char* range, const char* uplo, const int* n, double* a,
                        const int* lda, const double* vl, const double* vu, const int* il, const int* iu,
                        const double* abstol, int* m, double* w, double* z, const int* ldz, int* isuppz,
                        double* work, const int* lwork, int* iwork, const int* liwork, int* info, std::size_t, std::size_t, std::size_t);

namespace qgraph {

namespace {

// Reduces K x = nu M x to C y = nu y with C = L^-1 K L^-T (M = L L^T) and
// solves the smallest `count` eigenpairs with LAPACK's MRRR driver.
struct ReducedSolution {
  Eigen::MatrixXd chol;  // lower factor of M in the lower triangle
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;  // eigenvectors of the standard problem
};

ReducedSolution solve_reduced(const Eigen::MatrixXd& K, const Eigen::MatrixXd& M, Eigen::Index count, bool vectors) {
  const auto n = static_cast<int>(K.rows());
  ReducedSolution out;
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::SolverFailure, "mass matrix is not positive definite");
  Eigen::MatrixXd c = llt.matrixL().solve(K);
  c = llt.matrixL().solve(c.transpose()).eval();
  const char jobz = vectors ? 'V' : 'N', range = 'I', uplo = 'L';
  const int il = 1, iu = static_cast<int>(count), ldz = static_cast<int>(vectors ? n : 1);
  const double zero = 0.0;
  int found = 0, info = 0;
  out.values.resize(n);
  out.vectors.resize(ldz, vectors ? count : 1);
  std::vector<int> support(2 * static_cast<std::size_t>(std::max<Eigen::Index>(count, 1)));
  // Workspace query first.
  double wsize = 0.0;
  int isize = 0, lwork = -1, liwork = -1;
  dsyevr_(&jobz, &range, &uplo, &n, c.data(), &n, &zero, &zero, &il, &iu, &zero, &found, out.values.data(),
          out.vectors.data(), &ldz, support.data(), &wsize, &lwork, &isize, &liwork, &info, 1, 1, 1);
  lwork = static_cast<int>(wsize);
  liwork = isize;
  std::vector<double> work(static_cast<std::size_t>(lwork));
  std::vector<int> iwork(static_cast<std::size_t>(liwork));
  dsyevr_(&jobz, &range, &uplo, &n, c.data(), &n, &zero, &zero, &il, &iu, &zero, &found, out.values.data(),
          out.vectors.data(), &ldz, support.data(), work.data(), &lwork, iwork.data(), &liwork, &info, 1, 1, 1);
  if (info != 0 || found != count) throw Error(ErrorKind::SolverFailure, "symmetric eigensolver did not converge");
  out.values.conservativeResize(count);
  out.chol = llt.matrixL();
  return out;
}

double max_abs_row_sum(const SparseMatrix& a) {
  Eigen::VectorXd rows = Eigen::VectorXd::Zero(a.rows());
  for (Eigen::Index k = 0; k < a.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) rows(it.row()) += std::abs(it.value());
  }
  return rows.maxCoeff();
}

}  // namespace

bool SpectralBasis::matches(const Mesh& mesh) const {
  if (mesh.dof_count() != dof_count() || mesh.graph().edge_count() != mesh_cells.size()) return false;
  for (std::size_t e = 0; e < mesh_cells.size(); ++e) {
    if (mesh.cells(e) != mesh_cells[e]) return false;
  }
  return true;
}

Eigen::VectorXd generalized_eigenvalues(const Eigen::MatrixXd& K, const Eigen::MatrixXd& M) {
  return solve_reduced(K, M, K.rows(), false).values;
}

SpectralBasis eigensolve(const Mesh& mesh, const FormMatrices& form, std::size_t n_modes, double lambda_shift) {
  if (mesh.space() != Space::Continuous) throw Error(ErrorKind::InvalidArgument, "eigensolve needs a continuous mesh");
  const std::size_t dofs = mesh.dof_count();
  if (n_modes == 0 || 4 * n_modes > dofs) {
    throw Error(ErrorKind::TooManyModes, std::to_string(n_modes) + " modes requested, at most " +
                                             std::to_string(dofs / 4) + " are reliable on " +
                                             std::to_string(dofs) + " dofs");
  }
  if (!(lambda_shift > 0.0)) throw Error(ErrorKind::NonpositiveShift, "lambda shift must be positive");

  const auto nm = static_cast<Eigen::Index>(n_modes);
  ReducedSolution p = solve_reduced(Eigen::MatrixXd(form.K), Eigen::MatrixXd(form.M), nm, true);

  const auto& g = mesh.graph();
  SpectralBasis b;
  b.lambda_shift = lambda_shift;
  for (std::size_t e = 0; e < g.edge_count(); ++e) b.mesh_cells.push_back(mesh.cells(e));

  Eigen::VectorXd nu = p.values;
  // Round-off can leave the kernel eigenvalue slightly negative.
  for (Eigen::Index k = 0; k < nm; ++k) nu(k) = std::max(nu(k), 0.0);
  b.lambdas = -nu;
  b.eigvecs = std::move(p.vectors);
  p.chol.triangularView<Eigen::Lower>().transpose().solveInPlace(b.eigvecs);

  const auto n = static_cast<Eigen::Index>(g.vertex_count());
  for (Eigen::Index k = 0; k < nm; ++k) {
    auto f = b.eigvecs.col(k);
    const Eigen::VectorXd trace = f.head(n);
    const double scale = trace.cwiseAbs().maxCoeff();
    double pivot = 0.0;
    if (scale > 1e-10) {
      for (Eigen::Index i = 0; i < n && pivot == 0.0; ++i) {
        if (std::abs(trace(i)) > 1e-8 * scale) pivot = trace(i);
      }
    } else {
      const double fscale = f.cwiseAbs().maxCoeff();
      for (Eigen::Index i = 0; i < f.size() && pivot == 0.0; ++i) {
        if (std::abs(f(i)) > 1e-8 * fscale) pivot = f(i);
      }
    }
    if (pivot < 0.0) f = -f;
  }

  const double knorm = max_abs_row_sum(form.K) + max_abs_row_sum(form.M);
  for (Eigen::Index k = 0; k < nm; ++k) {
    const Eigen::VectorXd f = b.eigvecs.col(k);
    const double res = (form.K * f - nu(k) * (form.M * f)).norm();
    const double denom = (form.K * f).norm() + nu(k) * (form.M * f).norm();
    // The floor covers the kernel mode, where both terms vanish.
    if (!(res <= 1e-8 * denom + 1e-11 * knorm * f.norm())) {
      throw Error(ErrorKind::SolverFailure, "eigenpair " + std::to_string(k + 1) + " has residual " +
                                                std::to_string(res));
    }
  }

  b.vertex_traces = b.eigvecs.topRows(n);
  b.deriv_traces.resize(static_cast<Eigen::Index>(2 * g.edge_count()), nm);
  for (Eigen::Index k = 0; k < nm; ++k) {
    const Eigen::VectorXd rho = end_residuals(mesh, b.eigvecs.col(k), -nu(k));
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
      const auto i = static_cast<Eigen::Index>(2 * e);
      b.deriv_traces(i, k) = -rho(i) / g.conductance_at_end(e, EndRole::Tail);
      b.deriv_traces(i + 1, k) = -rho(i + 1) / g.conductance_at_end(e, EndRole::Head);
    }
  }
  return b;
}

Eigen::VectorXd pinned_spectrum(const Mesh& mesh, const FormMatrices& form,
                                const std::vector<std::size_t>& pinned_vertices, std::size_t count) {
  std::vector<char> pinned(mesh.dof_count(), 0);
  for (auto v : pinned_vertices) pinned.at(mesh.vertex_dof(v)) = 1;
  std::vector<Eigen::Index> keep;
  for (std::size_t i = 0; i < mesh.dof_count(); ++i) {
    if (!pinned[i]) keep.push_back(static_cast<Eigen::Index>(i));
  }
  const Eigen::MatrixXd K(form.K), M(form.M);
  const auto c = std::min<Eigen::Index>(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(keep.size()));
  return -solve_reduced(K(keep, keep), M(keep, keep), c, false).values;
}

AsymptoticsReport asymptotics_check(const SpectralBasis& basis, double shift, std::size_t k_first,
                                    std::size_t k_last) {
  if (k_first < 1 || k_last < k_first + 1 || k_last > basis.mode_count()) {
    throw Error(ErrorKind::InvalidArgument, "k range must lie inside the computed modes");
  }
  AsymptoticsReport r;
  r.l1 = INFINITY;
  r.l2 = 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const auto cnt = static_cast<double>(k_last - k_first + 1);
  for (std::size_t k = k_first; k <= k_last; ++k) {
    const double gap = shift - basis.lambdas(static_cast<Eigen::Index>(k - 1));
    const double kk = static_cast<double>(k);
    r.l1 = std::min(r.l1, gap / (kk * kk));
    r.l2 = std::max(r.l2, gap / (kk * kk));
    const double x = std::log(kk), y = std::log(gap);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  r.loglog_slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  return r;
}

std::vector<Multiplet> group_multiplets(const SpectralBasis& basis, double rel_tol) {
  std::vector<Multiplet> out;
  const auto nm = basis.mode_count();
  for (std::size_t k = 0; k < nm; ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    const double lam = basis.lambdas(i);
    const double t2 = basis.vertex_traces.col(i).squaredNorm();
    if (!out.empty() && std::abs(lam - out.back().lambda) <= rel_tol * std::max(1.0, std::abs(lam))) {
      out.back().size += 1;
      out.back().trace_norm2 += t2;
    } else {
      out.push_back({k, 1, lam, t2});
    }
  }
  return out;
}

VertexBoundReport vertex_bound_estimate(const SpectralBasis& basis) {
  VertexBoundReport r;
  const auto nm = static_cast<Eigen::Index>(basis.mode_count());
  r.trace_norm2.resize(nm);
  r.running_max.resize(nm);
  double run = 0.0;
  for (Eigen::Index k = 0; k < nm; ++k) {
    r.trace_norm2(k) = basis.vertex_traces.col(k).squaredNorm();
    run = std::max(run, r.trace_norm2(k));
    r.running_max(k) = run;
  }
  r.sup = run;
  r.multiplets = group_multiplets(basis);
  const std::size_t groups = r.multiplets.size();
  const std::size_t half = (groups + 1) / 2;
  double lower = 0.0, upper = 0.0;
  for (std::size_t i = 0; i < groups; ++i) {
    double& slot = i < half ? lower : upper;
    slot = std::max(slot, r.multiplets[i].trace_norm2);
  }
  r.growth_ratio = groups < 2 ? 1.0 : (lower > 0.0 ? upper / lower : INFINITY);
  return r;
}

}  // namespace qgraph
