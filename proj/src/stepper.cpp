#include "stepper.hpp"

#include <cmath>
#include <memory>

namespace parabulk {

void StepParams::validate() const {
  if (!(tau > 0.0)) fail(ErrorCode::validation, "tau must be positive");
  if (!(lambda > 0.0)) fail(ErrorCode::validation, "lambda must be positive");
  if (!(newton_tol > 0.0)) fail(ErrorCode::validation, "newton_tol must be positive");
  if (newton_max_iter < 1) fail(ErrorCode::validation, "newton_max_iter must be at least 1");
  if (!(backtrack_factor > 0.0) || !(backtrack_factor < 1.0))
    fail(ErrorCode::validation, "backtrack_factor must lie in (0, 1)");
}

Forcing Forcing::zero() {
  Forcing f;
  f.sample = [](double, BulkSurfaceField& out) { out.data.setZero(); };
  f.constant_in_time = true;
  return f;
}

BulkSurfaceField apply_graph_pair(const GraphPair& graphs, double lambda, const BulkSurfaceField& u) {
  BulkSurfaceField xi = u;
  const int nb = u.n_bulk;
  for (int i = 0; i < nb; ++i) xi.data[i] = graphs.bulk.yosida(lambda, u.data[i]);
  for (int i = nb; i < u.size(); ++i) xi.data[i] = graphs.surface.yosida(lambda, u.data[i]);
  return xi;
}

void graph_pair_slopes(const GraphPair& graphs, double lambda, const BulkSurfaceField& u,
                       Eigen::VectorXd& slopes) {
  slopes.resize(u.size());
  const int nb = u.n_bulk;
  for (int i = 0; i < nb; ++i) slopes[i] = graphs.bulk.yosida_slope(lambda, u.data[i]);
  for (int i = nb; i < u.size(); ++i) slopes[i] = graphs.surface.yosida_slope(lambda, u.data[i]);
}

double compute_phi_lambda(const DiscreteOperators& ops, const GraphPair& graphs, double lambda,
                          const BulkSurfaceField& u) {
  ops.check_shape(u);
  double s = 0.0;
  const auto& w = ops.weights();
  for (int i = 0; i < u.n_bulk; ++i) s += w[i] * graphs.bulk.envelope(lambda, u.data[i]);
  for (int i = u.n_bulk; i < u.size(); ++i) s += w[i] * graphs.surface.envelope(lambda, u.data[i]);
  return s;
}

Stepper::Stepper(const DiscreteOperators& ops, const GraphPair& graphs, const StepParams& params)
    : ops_(ops), graphs_(graphs), params_(params) {
  params_.validate();
}

double Stepper::residual_norm(const BulkSurfaceField& u, const BulkSurfaceField& u_prev,
                              const BulkSurfaceField& f, BulkSurfaceField& xi,
                              Eigen::VectorXd& r) const {
  xi = apply_graph_pair(graphs_, params_.lambda, u);
  ops_.apply_stiffness(xi.data, r);
  const auto& w = ops_.weights();
  double sq = 0.0;
  for (int i = 0; i < ops_.size(); ++i) {
    r[i] += w[i] * ((u.data[i] - u_prev.data[i]) / params_.tau - f.data[i]);
    sq += r[i] * r[i] / w[i];
  }
  return std::sqrt(sq);
}

BulkSurfaceField Stepper::step(const BulkSurfaceField& u_prev, const BulkSurfaceField& f,
                               double mean_target, BulkSurfaceField& xi_out, StepStats& stats_out) {
  ops_.check_shape(u_prev);
  ops_.check_shape(f);
  if (std::abs(ops_.mean(f)) > 1e-12)
    fail(ErrorCode::forcing_not_mean_zero, "forcing sample is not mean-zero");

  const int n = ops_.size();
  const double tau = params_.tau;
  BulkSurfaceField u = u_prev;
  BulkSurfaceField xi(u.n_bulk, n - u.n_bulk);
  Eigen::VectorXd r(n), slopes(n), dxi(n), du(n);
  BulkSurfaceField trial = u_prev;
  BulkSurfaceField xi_trial = xi;
  Eigen::VectorXd r_trial(n);

  double theta = residual_norm(u, u_prev, f, xi, r);
  int iter = 0;
  bool forced_full_step = false;
  while (theta > params_.newton_tol) {
    if (iter >= params_.newton_max_iter)
      fail(ErrorCode::newton_stalled,
           "newton did not reach the residual tolerance (residual " + std::to_string(theta) + ")");
    ++iter;

    graph_pair_slopes(graphs_, params_.lambda, u, slopes);

    // Solve (M/tau + A D) du = -r through the flux increment dxi = D du:
    // on active nodes (D>0) the system is symmetric positive definite,
    // inactive nodes decouple and are recovered explicitly.
    std::vector<int> active;
    active.reserve(n);
    std::vector<int> where(n, -1);
    for (int i = 0; i < n; ++i)
      if (slopes[i] > 0.0) {
        where[i] = static_cast<int>(active.size());
        active.push_back(i);
      }
    const int na = static_cast<int>(active.size());
    Eigen::VectorXd dxi_act = Eigen::VectorXd::Zero(na);
    if (na > 0) {
      const bool same_pattern = have_factorization_ && cached_slopes_.size() == slopes.size() &&
                                (cached_slopes_.array() == slopes.array()).all();
      if (!same_pattern) {
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(4 * ops_.edges().size() + na);
        for (int k = 0; k < na; ++k) {
          const int i = active[k];
          trips.emplace_back(k, k, ops_.weights()[i] / (tau * slopes[i]));
        }
        for (const auto& e : ops_.edges()) {
          const int ka = where[e.a];
          const int kb = where[e.b];
          if (ka >= 0) trips.emplace_back(ka, ka, e.coeff);
          if (kb >= 0) trips.emplace_back(kb, kb, e.coeff);
          if (ka >= 0 && kb >= 0) {
            trips.emplace_back(ka, kb, -e.coeff);
            trips.emplace_back(kb, ka, -e.coeff);
          }
        }
        Eigen::SparseMatrix<double> k(na, na);
        k.setFromTriplets(trips.begin(), trips.end());
        k.makeCompressed();
        ldlt_.compute(k);
        if (ldlt_.info() != Eigen::Success)
          fail(ErrorCode::solver_diverged, "newton linear system factorization failed");
        cached_slopes_ = slopes;
        have_factorization_ = true;
      }
      Eigen::VectorXd rhs(na);
      for (int k = 0; k < na; ++k) rhs[k] = -r[active[k]];
      dxi_act = ldlt_.solve(rhs);
    }
    dxi.setZero();
    for (int k = 0; k < na; ++k) dxi[active[k]] = dxi_act[k];
    Eigen::VectorXd a_dxi(n);
    ops_.apply_stiffness(dxi, a_dxi);
    for (int i = 0; i < n; ++i) {
      if (slopes[i] > 0.0)
        du[i] = dxi[i] / slopes[i];
      else
        du[i] = tau * (-r[i] - a_dxi[i]) / ops_.weights()[i];
    }

    // Backtracking on the weighted residual; the mean is pinned before each
    // residual evaluation so conservation never depends on solver rounding.
    double alpha = 1.0;
    bool accepted = false;
    for (int bt = 0; bt <= params_.backtrack_max; ++bt) {
      trial.data = u.data + alpha * du;
      trial.data.array() -= ops_.mean(trial) - mean_target;
      const double theta_trial = residual_norm(trial, u_prev, f, xi_trial, r_trial);
      if (theta_trial < theta * (1.0 - 1e-4 * alpha) || theta_trial <= params_.newton_tol) {
        u = trial;
        xi = xi_trial;
        r = r_trial;
        theta = theta_trial;
        accepted = true;
        break;
      }
      alpha *= params_.backtrack_factor;
    }
    if (!accepted) {
      // piecewise-affine residuals can require crossing a kink at full
      // length even when the merit stalls; allow that once between
      // successful decreases
      if (forced_full_step)
        fail(ErrorCode::newton_stalled, "newton line search stalled twice in a row");
      forced_full_step = true;
      trial.data = u.data + du;
      trial.data.array() -= ops_.mean(trial) - mean_target;
      theta = residual_norm(trial, u_prev, f, xi, r);
      u = trial;
    } else {
      forced_full_step = false;
    }
  }

  xi_out = xi;
  stats_out.newton_iters = iter;
  stats_out.residual = theta;
  stats_out.xi_mean = ops_.mean(xi);
  stats_out.phi_lambda = compute_phi_lambda(ops_, graphs_, params_.lambda, u);
  return u;
}

Trajectory run(const ProblemData& data, const StepParams& params, const DiscreteOperators& ops) {
  params.validate();
  ops.check_shape(data.initial);
  if (!(data.horizon > 0.0)) fail(ErrorCode::validation, "time horizon must be positive");
  for (int i = 0; i < data.initial.size(); ++i)
    if (!std::isfinite(data.initial.data[i]))
      fail(ErrorCode::validation, "initial datum has non-finite entries");

  const double t_final = data.horizon;
  const double tau = params.tau;
  int n_steps = static_cast<int>(std::llround(t_final / tau));
  bool shortened = false;
  if (n_steps < 1 || std::abs(n_steps * tau - t_final) > 1e-9 * std::max(1.0, t_final)) {
    n_steps = static_cast<int>(std::ceil(t_final / tau - 1e-12));
    shortened = true;
  }

  Trajectory traj;
  traj.tau = tau;
  traj.lambda = params.lambda;
  traj.newton_tol = params.newton_tol;
  traj.times.reserve(n_steps + 1);
  traj.fields.reserve(n_steps + 1);
  traj.fluxes.reserve(n_steps + 1);
  traj.stats.reserve(n_steps + 1);

  traj.times.push_back(0.0);
  traj.fields.push_back(data.initial);
  traj.fluxes.push_back(apply_graph_pair(data.graphs, params.lambda, data.initial));
  StepStats s0;
  s0.phi_lambda = compute_phi_lambda(ops, data.graphs, params.lambda, data.initial);
  s0.xi_mean = ops.mean(traj.fluxes.back());
  traj.stats.push_back(s0);

  const double mean_target = ops.mean(data.initial);
  BulkSurfaceField f(data.initial.n_bulk, data.initial.size() - data.initial.n_bulk);

  StepParams step_params = params;
  Stepper stepper(ops, data.graphs, step_params);
  Stepper* active_stepper = &stepper;
  std::unique_ptr<Stepper> last_stepper;

  for (int k = 1; k <= n_steps; ++k) {
    double t_next = k * tau;
    if (shortened && k == n_steps) {
      t_next = t_final;
      StepParams last = params;
      last.tau = t_final - (k - 1) * tau;
      last_stepper = std::make_unique<Stepper>(ops, data.graphs, last);
      active_stepper = last_stepper.get();
    }
    data.forcing.sample(t_next, f); // implicit endpoint sampling
    BulkSurfaceField xi(f.n_bulk, f.n_surface());
    StepStats stats;
    try {
      BulkSurfaceField u = active_stepper->step(traj.fields.back(), f, mean_target, xi, stats);
      traj.fields.push_back(std::move(u));
    } catch (const Error& e) {
      fail(e.code(), "step " + std::to_string(k) + ": " + e.what());
    }
    traj.times.push_back(t_next);
    traj.fluxes.push_back(std::move(xi));
    traj.stats.push_back(stats);
  }
  return traj;
}

std::pair<ProblemData, double> shift_mean_mode(const ProblemData& data, const DiscreteOperators& ops) {
  const double m0 = ops.mean(data.initial);
  ProblemData shifted(data.graphs.shifted(m0), data.forcing, ops.project(data.initial), data.horizon);
  shifted.mean_offset = m0;
  return {std::move(shifted), m0};
}

} // namespace parabulk
