#pragma once

#include <map>
#include <string>
#include <vector>

#include "error.hpp"

namespace parabulk {

/// Closed set of graph values at a point; lo == hi where single-valued.
struct GraphValue {
  double lo;
  double hi;
  bool single() const { return lo == hi; }
};

/// Far-field description: outside [-threshold, threshold] the graph is the
/// affine map slope*r + plus_intercept (right) / slope*r + minus_intercept (left).
struct FarField {
  double slope = 1.0;
  double plus_intercept = 0.0;
  double minus_intercept = 0.0;
  double threshold = 1.0;
};

/// Certificate that antiderivative(r) >= quad*r^2 - offset for all r.
struct GrowthCertificate {
  double quad = 0.0;
  double offset = 0.0;
};

/// Result of far-field validation: the affine tail is slope*r +/- offset
/// beyond +/- threshold.
struct FarFieldCertificate {
  double slope;
  double offset;
  double threshold;
};

/// A scalar maximal monotone graph, stored as finitely many affine pieces
/// separated by breakpoints that may carry vertical segments, together with
/// its convex antiderivative (normalized so antiderivative(0) == 0).
///
/// The representation is exact: resolvents, Yosida values and Moreau
/// envelopes are all evaluated in closed form, piece by piece. Smooth
/// presets are sampled onto affine pieces at construction.
class MonotoneGraph {
public:
  /// One custom-graph record: a breakpoint with the one-sided limits of the
  /// graph there and the slope of the affine piece to its right.
  struct Record {
    double breakpoint;
    double left_limit;
    double right_limit;
    double slope_after;
  };

  static MonotoneGraph linear(double slope, double threshold = 1.0);
  static MonotoneGraph heleshaw_clipped(double offset);
  static MonotoneGraph fast_diffusion_clipped(double exponent, double threshold, int pieces = 256);
  static MonotoneGraph porous_clipped(double exponent, double threshold, bool relax_negative_offset,
                                      int pieces = 256);
  static MonotoneGraph deadzone_jump(double zone_lo, double zone_hi, double slope, double offset);
  static MonotoneGraph from_records(std::vector<Record> records, FarField far);

  /// Build a preset by name with named parameters; used by the config layer.
  static MonotoneGraph make_preset(const std::string& name,
                                   const std::map<std::string, double>& params,
                                   bool relax_negative_offset = false);

  /// Multivalued evaluation beta(r).
  GraphValue eval(double r) const;

  /// Convex antiderivative with antiderivative(0) == 0.
  double antiderivative(double r) const;

  /// Resolvent (I + lambda*beta)^{-1}(r), exact on each affine piece.
  double resolvent(double lambda, double r) const;

  /// Yosida value (r - resolvent(lambda, r)) / lambda.
  double yosida(double lambda, double r) const;

  /// Generalized derivative of the Yosida map; right-hand slope at kinks.
  double yosida_slope(double lambda, double r) const;

  /// Moreau envelope of the antiderivative, via the resolvent identity.
  double envelope(double lambda, double r) const;

  /// Checks the affine-tail requirements (positive slope, antisymmetric
  /// intercepts, nonnegative offset unless relaxed) and returns the
  /// certified triple.
  FarFieldCertificate validate_far_field(bool relax_negative_offset = false) const;

  /// sup |beta| on [-threshold, threshold] (attained at the endpoints).
  double core_sup() const;

  /// The translated graph r -> beta(r + shift), with the antiderivative
  /// renormalized to vanish at 0. Used by the mean-shift run mode; the
  /// result generally has asymmetric far-field intercepts.
  MonotoneGraph shifted(double shift) const;

  const FarField& far_field() const { return far_; }
  const GrowthCertificate& growth() const { return growth_; }
  bool origin_normalized() const { return origin_normalized_; }
  int piece_count() const { return static_cast<int>(slope_.size()); }

private:
  MonotoneGraph() = default;

  static MonotoneGraph sampled_power(double exponent, double threshold, int pieces, bool relax);

  // Piece i covers [breaks_[i-1], breaks_[i]] (unbounded at the extremes).
  // On piece i:
  //   beta(r)  = value_[i] + slope_[i]*(r - anchor_[i])
  //   betahat(r) = anti_[i] + value_[i]*(r - anchor_[i]) + slope_[i]*(r - anchor_[i])^2/2
  // Anchors: piece i >= 1 is anchored at breaks_[i-1]; piece 0 at breaks_[0]
  // (or at 0 when there is no breakpoint).
  std::vector<double> breaks_;
  std::vector<double> slope_;
  std::vector<double> anchor_;
  std::vector<double> value_;
  std::vector<double> anti_;
  FarField far_{};
  GrowthCertificate growth_{};
  bool origin_normalized_ = true;

  int piece_index(double r) const;
  double piece_value(int i, double r) const;
  // Graph value limits at breakpoint k: [piece k at b_k, piece k+1 at b_k].
  double jump_lo(int k) const;
  double jump_hi(int k) const;
  void validate_monotone() const;
  void anchor_antiderivative();
  void set_growth_from_far_field();
};

/// Bulk and surface graphs for the two-nonlinearity problem mode. Both must
/// share the far-field slope and threshold; the intercepts may differ.
struct GraphPair {
  MonotoneGraph bulk;
  MonotoneGraph surface;

  GraphPair(MonotoneGraph b, MonotoneGraph s, bool relax_negative_offset = false);
  explicit GraphPair(MonotoneGraph both, bool relax_negative_offset = false);

  GraphPair shifted(double shift) const;

  /// Effective growth certificate valid for both components.
  GrowthCertificate combined_growth() const;
};

} // namespace parabulk
