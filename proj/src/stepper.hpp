#pragma once

#include <functional>
#include <vector>

#include "discretization.hpp"
#include "dual_space.hpp"
#include "monotone_graph.hpp"

namespace parabulk {

struct StepParams {
  double tau = 1e-2;
  double lambda = 0.05;
  double newton_tol = 1e-11; // weighted l2 norm of the nodal residual
  int newton_max_iter = 50;
  double backtrack_factor = 0.5;
  int backtrack_max = 20;

  void validate() const;
};

/// Time-indexed forcing supplier; must produce mean-zero samples. The
/// constant_in_time flag lets diagnostics reuse one dual-norm evaluation.
struct Forcing {
  std::function<void(double t, BulkSurfaceField& out)> sample;
  bool constant_in_time = false;

  static Forcing zero();
};

struct ProblemData {
  GraphPair graphs;
  Forcing forcing;
  BulkSurfaceField initial;
  double horizon = 1.0;
  double mean_offset = 0.0; // nonzero only in the mean-shift run mode

  ProblemData(GraphPair g, Forcing f, BulkSurfaceField u0, double t_final)
      : graphs(std::move(g)), forcing(std::move(f)), initial(std::move(u0)), horizon(t_final) {}
};

struct StepStats {
  int newton_iters = 0;
  double residual = 0.0;
  double xi_mean = 0.0;
  double phi_lambda = 0.0;
};

/// The computed time-discrete solution: fields at t_0..t_N plus the flux
/// field and solve statistics per step.
struct Trajectory {
  std::vector<double> times;
  std::vector<BulkSurfaceField> fields;
  std::vector<BulkSurfaceField> fluxes; // fluxes[n] pairs with fields[n]; entry 0 is the initial flux
  std::vector<StepStats> stats;         // stats[0] describes the initial state
  double tau = 0.0;
  double lambda = 0.0;
  double newton_tol = 0.0;

  int steps() const { return static_cast<int>(times.size()) - 1; }
};

/// Nodal Yosida flux of the graph pair: bulk graph at bulk nodes, surface
/// graph at boundary nodes. The surface entries are the trace of the flux
/// field, single-valued by construction.
BulkSurfaceField apply_graph_pair(const GraphPair& graphs, double lambda, const BulkSurfaceField& u);

/// Diagonal generalized derivative of the nodal Yosida map.
void graph_pair_slopes(const GraphPair& graphs, double lambda, const BulkSurfaceField& u,
                       Eigen::VectorXd& slopes);

/// Weighted sum of the Moreau envelopes over both blocks.
double compute_phi_lambda(const DiscreteOperators& ops, const GraphPair& graphs, double lambda,
                          const BulkSurfaceField& u);

class Stepper {
public:
  Stepper(const DiscreteOperators& ops, const GraphPair& graphs, const StepParams& params);

  /// One implicit step: solves  M (u - u_prev)/tau + A xi(u) = M f  for u,
  /// keeping the combined mean pinned at mean_target. Returns the new field
  /// and fills the flux and stats.
  BulkSurfaceField step(const BulkSurfaceField& u_prev, const BulkSurfaceField& f,
                        double mean_target, BulkSurfaceField& xi_out, StepStats& stats_out);

  const StepParams& params() const { return params_; }

private:
  double residual_norm(const BulkSurfaceField& u, const BulkSurfaceField& u_prev,
                       const BulkSurfaceField& f, BulkSurfaceField& xi, Eigen::VectorXd& r) const;

  const DiscreteOperators& ops_;
  const GraphPair& graphs_;
  StepParams params_;
  // Newton linear solver state; the factorization is reused while the
  // generalized derivative stays unchanged.
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
  Eigen::VectorXd cached_slopes_;
  bool have_factorization_ = false;
};

/// Runs N = horizon/tau implicit steps (the last step is shortened if the
/// horizon is not an exact multiple). Deterministic: identical inputs give
/// bit-identical trajectories.
Trajectory run(const ProblemData& data, const StepParams& params, const DiscreteOperators& ops);

/// The change of variables for a nonzero initial mean: translated graphs
/// r -> beta(r + m0), projected initial datum, and the reconstruction rule
/// u = v + m0 * 1 on output. Returns the shifted problem and m0.
std::pair<ProblemData, double> shift_mean_mode(const ProblemData& data, const DiscreteOperators& ops);

} // namespace parabulk
