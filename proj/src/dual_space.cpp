#include "dual_space.hpp"

#include <cmath>

namespace parabulk {

DualSolverContext::DualSolverContext(const DiscreteOperators& ops, double tolerance)
    : ops_(ops), tol_(tolerance) {
  if (!(tol_ > 0.0)) fail(ErrorCode::invalid_argument, "solver tolerance must be positive");
  inv_diag_.setZero(ops_.size());
  for (const auto& e : ops_.edges()) {
    inv_diag_[e.a] += e.coeff;
    inv_diag_[e.b] += e.coeff;
  }
  inv_diag_ = inv_diag_.cwiseInverse();
}

void DualSolverContext::require_mean_zero(const BulkSurfaceField& g, const char* who) const {
  ops_.check_shape(g);
  if (std::abs(ops_.mean(g)) > 1e-10)
    fail(ErrorCode::not_mean_zero, std::string(who) + " requires a mean-zero field");
}

BulkSurfaceField DualSolverContext::f_apply(const BulkSurfaceField& z) const {
  require_mean_zero(z, "f_apply");
  BulkSurfaceField out = z;
  ops_.apply_stiffness(z.data, out.data);
  out.data.array() /= ops_.weights().array();
  return out;
}

bool DualSolverContext::solve_cg(const Eigen::VectorXd& rhs, Eigen::VectorXd& x) const {
  const int n = static_cast<int>(rhs.size());
  const double rhs_norm = rhs.norm();
  x.setZero(n);
  if (rhs_norm == 0.0) return true;
  Eigen::VectorXd r = rhs;
  Eigen::VectorXd z = inv_diag_.cwiseProduct(r);
  Eigen::VectorXd p = z;
  Eigen::VectorXd ap(n);
  double rz = r.dot(z);
  const int max_iter = 20 * n + 200;
  for (int it = 0; it < max_iter; ++it) {
    if (r.norm() <= tol_ * rhs_norm) return true;
    ops_.apply_stiffness(p, ap);
    const double pap = p.dot(ap);
    if (!(pap > 0.0)) return false;
    const double alpha = rz / pap;
    x += alpha * p;
    r -= alpha * ap;
    z = inv_diag_.cwiseProduct(r);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  return r.norm() <= tol_ * rhs_norm;
}

void DualSolverContext::solve_bordered(const Eigen::VectorXd& rhs, Eigen::VectorXd& x) const {
  // [A, v; v^T, 0] with v = M 1 pins the weighted mean of the solution.
  const int n = ops_.size();
  if (!bordered_) {
    std::vector<Eigen::Triplet<double>> trips;
    const auto& a = ops_.stiffness();
    for (int k = 0; k < a.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(a, k); it; ++it)
        trips.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    for (int i = 0; i < n; ++i) {
      trips.emplace_back(i, n, ops_.weights()[i]);
      trips.emplace_back(n, i, ops_.weights()[i]);
    }
    Eigen::SparseMatrix<double> kkt(n + 1, n + 1);
    kkt.setFromTriplets(trips.begin(), trips.end());
    kkt.makeCompressed();
    bordered_ = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
    bordered_->compute(kkt);
    if (bordered_->info() != Eigen::Success)
      fail(ErrorCode::solver_diverged, "bordered factorization of the constrained system failed");
  }
  Eigen::VectorXd b(n + 1);
  b.head(n) = rhs;
  b[n] = 0.0;
  Eigen::VectorXd sol = bordered_->solve(b);
  if (bordered_->info() != Eigen::Success)
    fail(ErrorCode::solver_diverged, "constrained dual solve failed");
  x = sol.head(n);
}

BulkSurfaceField DualSolverContext::f_inverse(const BulkSurfaceField& g) const {
  require_mean_zero(g, "f_inverse");
  Eigen::VectorXd rhs = ops_.weights().cwiseProduct(g.data);
  // keep the right-hand side exactly consistent: remove the rounding-level
  // component along the kernel of A^T
  rhs.array() -= rhs.sum() / rhs.size();
  BulkSurfaceField w = g;
  if (!solve_cg(rhs, w.data)) solve_bordered(rhs, w.data);
  ops_.project_in_place(w);
  return w;
}

double DualSolverContext::v0_dual_norm(const BulkSurfaceField& g) const {
  require_mean_zero(g, "v0_dual_norm");
  const BulkSurfaceField w = f_inverse(g);
  const double sq = ops_.inner_h(g, w);
  return std::sqrt(std::max(sq, 0.0));
}

double DualSolverContext::v0_norm(const BulkSurfaceField& z) const {
  require_mean_zero(z, "v0_norm");
  return std::sqrt(std::max(ops_.a_form(z, z), 0.0));
}

SpectralConstants DualSolverContext::spectral() const {
  if (spectral_) return *spectral_;
  // Power iteration on g -> F^{-1} M ... realized as repeated f_inverse in
  // the H-geometry; the top eigenvalue theta gives c_emb = sqrt(theta) and
  // the sharp mean-aware constant c_p = max(1 + 1/mu1, |Omega| + |Gamma|)
  // with mu1 = 1/theta.
  BulkSurfaceField x(ops_.geometry());
  for (int i = 0; i < ops_.size(); ++i) x.data[i] = std::sin(3.7 * (i + 1) + 0.3);
  ops_.project_in_place(x);
  double theta = 0.0;
  const int max_iter = 5000;
  for (int it = 0; it < max_iter; ++it) {
    BulkSurfaceField y = f_inverse(x);
    const double num = ops_.inner_h(x, y);
    const double den = ops_.inner_h(x, x);
    const double theta_new = num / den;
    const double scale = ops_.norm_h(y);
    if (!(scale > 0.0)) fail(ErrorCode::solver_diverged, "power iteration collapsed");
    y.data /= scale;
    ops_.project_in_place(y);
    x = y;
    if (it > 2 && std::abs(theta_new - theta) <= 1e-10 * std::max(1.0, std::abs(theta_new))) {
      theta = theta_new;
      break;
    }
    theta = theta_new;
    if (it + 1 == max_iter) fail(ErrorCode::solver_diverged, "power iteration did not settle");
  }
  const double c_emb = std::sqrt(theta);
  const double c_p = std::max(1.0 + theta, ops_.total_measure());
  spectral_ = SpectralConstants{c_p, c_emb};
  return *spectral_;
}

} // namespace parabulk
