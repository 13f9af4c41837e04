#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <vector>

#include "error.hpp"

namespace parabulk {

/// Concrete desk-scale geometries.
///   Strip:    periodic strip (0,Lx) x (0,1); the boundary is the two
///             horizontal circles y=0 and y=1, each carrying its own
///             tangential diffusion.
///   Interval: (0,1) with the two endpoint values as the boundary; the
///             boundary diffusion vanishes on points.
struct Geometry {
  enum class Kind { strip, interval };
  Kind kind = Kind::strip;
  double lx = 1.0; // strip period
  int nx = 32;     // strip nodes per row (periodic)
  int ny = 16;     // strip interior rows
  int n = 64;      // interval interior nodes

  static Geometry make_strip(double lx, int nx, int ny);
  static Geometry make_interval(int n);

  int bulk_count() const { return kind == Kind::strip ? nx * ny : n; }
  int surface_count() const { return kind == Kind::strip ? 2 * nx : 2; }
  int total_count() const { return bulk_count() + surface_count(); }
  bool operator==(const Geometry&) const = default;
};

/// A bulk/surface pair of nodal values stored flat: bulk entries first,
/// then the surface entries. The two blocks are independent degrees of
/// freedom; single-valued flux fields use the surface entries as the trace.
struct BulkSurfaceField {
  Eigen::VectorXd data;
  int n_bulk = 0;

  BulkSurfaceField() = default;
  BulkSurfaceField(int bulk, int surf) : data(Eigen::VectorXd::Zero(bulk + surf)), n_bulk(bulk) {}
  explicit BulkSurfaceField(const Geometry& g) : BulkSurfaceField(g.bulk_count(), g.surface_count()) {}

  int size() const { return static_cast<int>(data.size()); }
  int n_surface() const { return size() - n_bulk; }
  auto bulk() { return data.head(n_bulk); }
  auto bulk() const { return data.head(n_bulk); }
  auto surface() { return data.tail(size() - n_bulk); }
  auto surface() const { return data.tail(size() - n_bulk); }
};

/// Lumped mass weights, the combined stiffness (bulk gradient coupling plus
/// tangential boundary coupling), measures, and the mean/projection
/// functionals of the discrete complex. Immutable once built.
class DiscreteOperators {
public:
  struct Edge {
    int a;
    int b;
    double coeff;
  };

  static DiscreteOperators build(const Geometry& geometry);

  const Geometry& geometry() const { return geom_; }
  int n_bulk() const { return n_bulk_; }
  int n_surface() const { return n_surface_; }
  int size() const { return n_bulk_ + n_surface_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  double vol_omega() const { return vol_omega_; }
  double vol_gamma() const { return vol_gamma_; }
  double total_measure() const { return vol_omega_ + vol_gamma_; }
  const std::vector<Edge>& edges() const { return edges_; }
  /// Assembled sparse stiffness (for factorizations; the edge list is the
  /// authoritative operator for products).
  const Eigen::SparseMatrix<double>& stiffness() const { return stiffness_; }

  /// y = A x via the edge list: exact symmetry and exact annihilation of
  /// constants, independent of assembly rounding.
  void apply_stiffness(const Eigen::VectorXd& x, Eigen::VectorXd& y) const;
  Eigen::VectorXd apply_stiffness(const Eigen::VectorXd& x) const;

  /// Combined gradient form  sum_e c_e (u_a - u_b)(z_a - z_b).
  double a_form(const BulkSurfaceField& u, const BulkSurfaceField& z) const;

  /// Weighted inner product of bulk plus surface blocks.
  double inner_h(const BulkSurfaceField& u, const BulkSurfaceField& z) const;
  double norm_h(const BulkSurfaceField& u) const;

  /// Combined mean (weighted sums over both blocks) / (|Omega| + |Gamma|).
  double mean(const BulkSurfaceField& z) const;

  /// z - mean(z) * 1; idempotent.
  BulkSurfaceField project(const BulkSurfaceField& z) const;
  void project_in_place(BulkSurfaceField& z) const;

  void check_shape(const BulkSurfaceField& z) const;

  /// Node coordinates for file output: bulk (x, y) rows then surface
  /// (x, row-id) rows.
  double node_x(int flat_index) const;
  double node_y_or_row(int flat_index) const;

private:
  Geometry geom_;
  int n_bulk_ = 0;
  int n_surface_ = 0;
  Eigen::VectorXd weights_;
  double vol_omega_ = 0.0;
  double vol_gamma_ = 0.0;
  std::vector<Edge> edges_;
  Eigen::SparseMatrix<double> stiffness_;
};

} // namespace parabulk
