#include "discretization.hpp"

#include <cmath>

namespace parabulk {

Geometry Geometry::make_strip(double lx, int nx, int ny) {
  if (!(lx > 0.0)) fail(ErrorCode::validation, "strip requires lx > 0");
  if (nx < 4 || ny < 2) fail(ErrorCode::grid_too_small, "strip requires nx >= 4 and ny >= 2");
  Geometry g;
  g.kind = Kind::strip;
  g.lx = lx;
  g.nx = nx;
  g.ny = ny;
  return g;
}

Geometry Geometry::make_interval(int n) {
  if (n < 2) fail(ErrorCode::grid_too_small, "interval requires n >= 2");
  Geometry g;
  g.kind = Kind::interval;
  g.n = n;
  return g;
}

DiscreteOperators DiscreteOperators::build(const Geometry& geometry) {
  DiscreteOperators ops;
  ops.geom_ = geometry;
  ops.n_bulk_ = geometry.bulk_count();
  ops.n_surface_ = geometry.surface_count();
  const int n = ops.size();
  ops.weights_.resize(n);

  if (geometry.kind == Geometry::Kind::strip) {
    const int nx = geometry.nx;
    const int ny = geometry.ny;
    const double hx = geometry.lx / nx;
    const double hy = 1.0 / (ny + 1);
    auto bulk = [&](int iy, int ix) { return (iy - 1) * nx + ix; }; // iy in 1..ny
    const int bottom0 = nx * ny;
    const int top0 = nx * ny + nx;

    // Row measure in y: interior rows own one cell of height hy; the rows
    // next to a wall also own the adjacent half cell, so the bulk weights
    // sum exactly to |Omega| = lx.
    auto row_measure = [&](int iy) {
      double m = hy;
      if (iy == 1) m += 0.5 * hy;
      if (iy == ny) m += 0.5 * hy;
      return m;
    };

    for (int iy = 1; iy <= ny; ++iy)
      for (int ix = 0; ix < nx; ++ix) ops.weights_[bulk(iy, ix)] = row_measure(iy) * hx;
    for (int ix = 0; ix < nx; ++ix) {
      ops.weights_[bottom0 + ix] = hx;
      ops.weights_[top0 + ix] = hx;
    }
    ops.vol_omega_ = geometry.lx;
    ops.vol_gamma_ = 2.0 * geometry.lx;

    // Horizontal bulk edges; the coefficient carries the row measure so the
    // discrete symbol of x-modes is uniform across rows.
    for (int iy = 1; iy <= ny; ++iy) {
      const double c = row_measure(iy) / hx;
      for (int ix = 0; ix < nx; ++ix) ops.edges_.push_back({bulk(iy, ix), bulk(iy, (ix + 1) % nx), c});
    }
    // Vertical edges between interior rows and to both boundary rows.
    const double cv = hx / hy;
    for (int ix = 0; ix < nx; ++ix) {
      ops.edges_.push_back({bottom0 + ix, bulk(1, ix), cv});
      for (int iy = 1; iy < ny; ++iy) ops.edges_.push_back({bulk(iy, ix), bulk(iy + 1, ix), cv});
      ops.edges_.push_back({bulk(ny, ix), top0 + ix, cv});
    }
    // Tangential boundary coupling along each circle.
    const double cs = 1.0 / hx;
    for (int ix = 0; ix < nx; ++ix) {
      ops.edges_.push_back({bottom0 + ix, bottom0 + (ix + 1) % nx, cs});
      ops.edges_.push_back({top0 + ix, top0 + (ix + 1) % nx, cs});
    }
  } else {
    const int n_in = geometry.n;
    const double h = 1.0 / (n_in + 1);
    for (int i = 0; i < n_in; ++i) {
      double m = h;
      if (i == 0) m += 0.5 * h;
      if (i == n_in - 1) m += 0.5 * h;
      ops.weights_[i] = m;
    }
    ops.weights_[n_in] = 1.0;     // left endpoint
    ops.weights_[n_in + 1] = 1.0; // right endpoint
    ops.vol_omega_ = 1.0;
    ops.vol_gamma_ = 2.0;
    const double c = 1.0 / h;
    ops.edges_.push_back({n_in, 0, c});
    for (int i = 0; i + 1 < n_in; ++i) ops.edges_.push_back({i, i + 1, c});
    ops.edges_.push_back({n_in - 1, n_in + 1, c});
    // no boundary-boundary coupling: the surface diffusion vanishes on points
  }

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(4 * ops.edges_.size());
  for (const Edge& e : ops.edges_) {
    trips.emplace_back(e.a, e.a, e.coeff);
    trips.emplace_back(e.b, e.b, e.coeff);
    trips.emplace_back(e.a, e.b, -e.coeff);
    trips.emplace_back(e.b, e.a, -e.coeff);
  }
  ops.stiffness_.resize(n, n);
  ops.stiffness_.setFromTriplets(trips.begin(), trips.end());
  ops.stiffness_.makeCompressed();
  return ops;
}

void DiscreteOperators::apply_stiffness(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
  y.setZero(x.size());
  for (const Edge& e : edges_) {
    const double d = e.coeff * (x[e.a] - x[e.b]);
    y[e.a] += d;
    y[e.b] -= d;
  }
}

Eigen::VectorXd DiscreteOperators::apply_stiffness(const Eigen::VectorXd& x) const {
  Eigen::VectorXd y;
  apply_stiffness(x, y);
  return y;
}

double DiscreteOperators::a_form(const BulkSurfaceField& u, const BulkSurfaceField& z) const {
  check_shape(u);
  check_shape(z);
  double s = 0.0;
  for (const Edge& e : edges_) s += e.coeff * (u.data[e.a] - u.data[e.b]) * (z.data[e.a] - z.data[e.b]);
  return s;
}

double DiscreteOperators::inner_h(const BulkSurfaceField& u, const BulkSurfaceField& z) const {
  check_shape(u);
  check_shape(z);
  double s = 0.0;
  for (int i = 0; i < size(); ++i) s += weights_[i] * u.data[i] * z.data[i];
  return s;
}

double DiscreteOperators::norm_h(const BulkSurfaceField& u) const { return std::sqrt(inner_h(u, u)); }

double DiscreteOperators::mean(const BulkSurfaceField& z) const {
  check_shape(z);
  double s = 0.0;
  for (int i = 0; i < size(); ++i) s += weights_[i] * z.data[i];
  return s / total_measure();
}

BulkSurfaceField DiscreteOperators::project(const BulkSurfaceField& z) const {
  BulkSurfaceField out = z;
  project_in_place(out);
  return out;
}

void DiscreteOperators::project_in_place(BulkSurfaceField& z) const {
  const double m = mean(z);
  z.data.array() -= m;
}

void DiscreteOperators::check_shape(const BulkSurfaceField& z) const {
  if (z.size() != size() || z.n_bulk != n_bulk_)
    fail(ErrorCode::shape_mismatch, "field shape does not match the discrete operators");
}

double DiscreteOperators::node_x(int i) const {
  if (geom_.kind == Geometry::Kind::strip) {
    const double hx = geom_.lx / geom_.nx;
    if (i < n_bulk_) return (i % geom_.nx) * hx;
    return ((i - n_bulk_) % geom_.nx) * hx;
  }
  const double h = 1.0 / (geom_.n + 1);
  if (i < n_bulk_) return (i + 1) * h;
  return i == n_bulk_ ? 0.0 : 1.0;
}

double DiscreteOperators::node_y_or_row(int i) const {
  if (geom_.kind == Geometry::Kind::strip) {
    const double hy = 1.0 / (geom_.ny + 1);
    if (i < n_bulk_) return (i / geom_.nx + 1) * hy;
    return (i - n_bulk_) < geom_.nx ? 0.0 : 1.0;
  }
  if (i < n_bulk_) return 0.0;
  return i == n_bulk_ ? 0.0 : 1.0;
}

} // namespace parabulk
