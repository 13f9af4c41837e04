#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <memory>
#include <optional>

#include "discretization.hpp"

namespace parabulk {

/// Spectral constants of the discrete complex: the sharpest constant for
/// |z|_V^2 <= c_p * (a(z,z) + mean(z)^2), and the embedding constant with
/// |g|_{V0*} <= c_emb * |g|_H on mean-zero fields.
struct SpectralConstants {
  double c_p;
  double c_emb;
};

/// Solver context for the duality mapping F (F z acts by a(z, .)) and its
/// inverse on the mean-zero subspace. The inverse is realized as the
/// constrained solve  A w = M g, mean(w) = 0, by deflated conjugate
/// gradients; a bordered direct factorization is kept as a fallback.
/// Once built, solves are read-only and may run concurrently.
class DualSolverContext {
public:
  explicit DualSolverContext(const DiscreteOperators& ops, double tolerance = 1e-12);

  const DiscreteOperators& ops() const { return ops_; }
  double tolerance() const { return tol_; }

  /// Dual representation of F z for mean-zero z: the field g with
  /// (g, ztilde)_H = a(z, ztilde), i.e. g = M^{-1} A z. Always mean-zero.
  BulkSurfaceField f_apply(const BulkSurfaceField& z) const;

  /// The unique mean-zero w with a(w, ztilde) = (g, ztilde)_H for all
  /// test fields; requires mean(g) = 0.
  BulkSurfaceField f_inverse(const BulkSurfaceField& g) const;

  /// sqrt((g, F^{-1} g)_H); the dual norm of the functional represented by g.
  double v0_dual_norm(const BulkSurfaceField& g) const;

  /// sqrt(a(z, z)) on mean-zero fields.
  double v0_norm(const BulkSurfaceField& z) const;

  /// Sharp discrete constants, computed once by power iteration on the
  /// compact map F^{-1} M and cached.
  SpectralConstants spectral() const;

private:
  void require_mean_zero(const BulkSurfaceField& g, const char* who) const;
  // CG on the consistent singular system; returns false if not converged.
  bool solve_cg(const Eigen::VectorXd& rhs, Eigen::VectorXd& x) const;
  void solve_bordered(const Eigen::VectorXd& rhs, Eigen::VectorXd& x) const;

  const DiscreteOperators& ops_;
  double tol_;
  Eigen::VectorXd inv_diag_; // Jacobi preconditioner of the stiffness
  mutable std::optional<SpectralConstants> spectral_;
  mutable std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> bordered_;
};

} // namespace parabulk
