#include "monotone_graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace parabulk {

namespace {

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol * (1.0 + std::abs(a) + std::abs(b)); }

} // namespace

int MonotoneGraph::piece_index(double r) const {
  // First breakpoint strictly greater than r; at r == breaks_[k] this selects
  // the right piece, which agrees with the left one wherever beta/betahat are
  // continuous.
  auto it = std::upper_bound(breaks_.begin(), breaks_.end(), r);
  return static_cast<int>(it - breaks_.begin());
}

double MonotoneGraph::piece_value(int i, double r) const {
  const double d = r - anchor_[i];
  return value_[i] + slope_[i] * d;
}

double MonotoneGraph::jump_lo(int k) const { return piece_value(k, breaks_[k]); }

double MonotoneGraph::jump_hi(int k) const { return piece_value(k + 1, breaks_[k]); }

GraphValue MonotoneGraph::eval(double r) const {
  for (size_t k = 0; k < breaks_.size(); ++k) {
    if (r == breaks_[k]) return {jump_lo(static_cast<int>(k)), jump_hi(static_cast<int>(k))};
  }
  const int i = piece_index(r);
  const double v = piece_value(i, r);
  return {v, v};
}

double MonotoneGraph::antiderivative(double r) const {
  const int i = piece_index(r);
  const double d = r - anchor_[i];
  return anti_[i] + value_[i] * d + 0.5 * slope_[i] * d * d;
}

double MonotoneGraph::resolvent(double lambda, double r) const {
  if (!(lambda > 0.0)) fail(ErrorCode::invalid_argument, "resolvent requires lambda > 0");
  // The map g(s) = s + lambda*beta(s) is strictly increasing and onto; its
  // image of breakpoint k is [b_k + lambda*jump_lo, b_k + lambda*jump_hi].
  const int nb = static_cast<int>(breaks_.size());
  int piece = nb; // rightmost unless a breakpoint image contains r
  for (int k = 0; k < nb; ++k) {
    const double ghi = breaks_[k] + lambda * jump_hi(k);
    if (r <= ghi) {
      const double glo = breaks_[k] + lambda * jump_lo(k);
      if (r >= glo) return breaks_[k];
      piece = k;
      break;
    }
  }
  const double s = slope_[piece];
  const double v = value_[piece];
  const double a = anchor_[piece];
  return (r - lambda * v + lambda * s * a) / (1.0 + lambda * s);
}

double MonotoneGraph::yosida(double lambda, double r) const {
  return (r - resolvent(lambda, r)) / lambda;
}

double MonotoneGraph::yosida_slope(double lambda, double r) const {
  if (!(lambda > 0.0)) fail(ErrorCode::invalid_argument, "yosida_slope requires lambda > 0");
  const int nb = static_cast<int>(breaks_.size());
  int piece = nb;
  for (int k = 0; k < nb; ++k) {
    const double ghi = breaks_[k] + lambda * jump_hi(k);
    if (r < ghi) { // right-hand convention: r == ghi belongs to the next piece
      const double glo = breaks_[k] + lambda * jump_lo(k);
      if (r >= glo) return 1.0 / lambda;
      piece = k;
      break;
    }
  }
  const double s = slope_[piece];
  return s / (1.0 + lambda * s);
}

double MonotoneGraph::envelope(double lambda, double r) const {
  const double j = resolvent(lambda, r);
  const double d = r - j;
  return 0.5 * d * d / lambda + antiderivative(j);
}

FarFieldCertificate MonotoneGraph::validate_far_field(bool relax_negative_offset) const {
  const double tol = 1e-12;
  if (!(far_.slope > 0.0) || !(far_.threshold > 0.0))
    fail(ErrorCode::not_affine_far_field, "far field requires positive slope and threshold");
  const double t = far_.threshold;
  if (!breaks_.empty() && (breaks_.front() < -t * (1.0 + tol) - tol || breaks_.back() > t * (1.0 + tol) + tol))
    fail(ErrorCode::not_affine_far_field, "graph has kinks beyond the far-field threshold");
  const int last = piece_count() - 1;
  if (!close(slope_[last], far_.slope, tol) || !close(slope_[0], far_.slope, tol))
    fail(ErrorCode::not_affine_far_field, "outermost slopes do not match the far-field slope");
  const double right_at_t = piece_value(last, t);
  const double left_at_t = piece_value(0, -t);
  if (!close(right_at_t, far_.slope * t + far_.plus_intercept, tol) ||
      !close(left_at_t, far_.slope * (-t) + far_.minus_intercept, tol))
    fail(ErrorCode::not_affine_far_field, "outermost pieces do not match the far-field intercepts");
  if (!close(far_.minus_intercept, -far_.plus_intercept, tol))
    fail(ErrorCode::not_affine_far_field, "far-field intercepts are not antisymmetric");
  if (far_.plus_intercept < -tol && !relax_negative_offset)
    fail(ErrorCode::negative_intercept, "far-field offset is negative (pass the relax flag to admit it)");
  return {far_.slope, far_.plus_intercept, far_.threshold};
}

double MonotoneGraph::core_sup() const {
  const double t = far_.threshold;
  const GraphValue a = eval(t);
  const GraphValue b = eval(-t);
  return std::max(std::max(std::abs(a.lo), std::abs(a.hi)), std::max(std::abs(b.lo), std::abs(b.hi)));
}

MonotoneGraph MonotoneGraph::shifted(double shift) const {
  if (shift == 0.0) return *this;
  MonotoneGraph g = *this;
  for (double& b : g.breaks_) b -= shift;
  for (double& a : g.anchor_) a -= shift;
  const double offset = antiderivative(shift);
  for (double& a : g.anti_) a -= offset;
  g.far_.plus_intercept += far_.slope * shift;
  g.far_.minus_intercept += far_.slope * shift;
  g.far_.threshold += std::abs(shift);
  // The translated antiderivative is still convex with value 0 at the
  // origin, but it need not be nonnegative and 0 need not be in beta(0).
  g.origin_normalized_ = false;
  const double c1 = growth_.quad;
  g.growth_ = {0.5 * c1, growth_.offset + offset + c1 * shift * shift};
  return g;
}

void MonotoneGraph::validate_monotone() const {
  for (double s : slope_)
    if (!(s >= 0.0)) fail(ErrorCode::validation, "graph has a negative slope");
  for (int k = 0; k < static_cast<int>(breaks_.size()); ++k) {
    if (k + 1 < static_cast<int>(breaks_.size()) && !(breaks_[k] < breaks_[k + 1]))
      fail(ErrorCode::validation, "graph breakpoints must be strictly increasing");
    if (jump_lo(k) > jump_hi(k) + 1e-12) fail(ErrorCode::validation, "graph has a downward jump");
  }
  if (origin_normalized_) {
    const GraphValue v0 = eval(0.0);
    if (v0.lo > 1e-12 || v0.hi < -1e-12) fail(ErrorCode::validation, "graph does not contain 0 at 0");
  }
}

void MonotoneGraph::anchor_antiderivative() {
  const int n = piece_count();
  anti_.assign(n, 0.0);
  const int i0 = piece_index(0.0);
  {
    const double d = 0.0 - anchor_[i0];
    anti_[i0] = -(value_[i0] * d + 0.5 * slope_[i0] * d * d);
  }
  for (int i = i0 + 1; i < n; ++i) {
    const double b = breaks_[i - 1];
    const double d = b - anchor_[i - 1];
    anti_[i] = anti_[i - 1] + value_[i - 1] * d + 0.5 * slope_[i - 1] * d * d;
    // piece i is anchored at b, so anti_[i] is its antiderivative there
  }
  for (int i = i0 - 1; i >= 0; --i) {
    const double b = breaks_[i];
    // continuity at b: piece i+1 evaluated at b
    const double d1 = b - anchor_[i + 1];
    const double at_b = anti_[i + 1] + value_[i + 1] * d1 + 0.5 * slope_[i + 1] * d1 * d1;
    const double d0 = b - anchor_[i];
    anti_[i] = at_b - (value_[i] * d0 + 0.5 * slope_[i] * d0 * d0);
  }
}

void MonotoneGraph::set_growth_from_far_field() {
  const double s = far_.slope;
  const double t = far_.threshold;
  const double p = far_.plus_intercept;
  if (p >= 0.0)
    growth_ = {0.5 * s, 0.5 * s * t * t};
  else
    growth_ = {0.25 * s, 0.5 * s * t * t + p * p / s};
}

MonotoneGraph MonotoneGraph::linear(double slope, double threshold) {
  if (!(slope > 0.0) || !(threshold > 0.0))
    fail(ErrorCode::invalid_argument, "linear preset requires positive slope and threshold");
  MonotoneGraph g;
  g.slope_ = {slope};
  g.anchor_ = {0.0};
  g.value_ = {0.0};
  g.far_ = {slope, 0.0, 0.0, threshold};
  g.growth_ = {0.5 * slope, 0.0};
  g.validate_monotone();
  g.anchor_antiderivative();
  return g;
}

MonotoneGraph MonotoneGraph::heleshaw_clipped(double offset) {
  if (!(offset >= 0.0)) fail(ErrorCode::invalid_argument, "heleshaw_clipped requires offset >= 0");
  MonotoneGraph g;
  g.breaks_ = {0.0, 1.0};
  g.slope_ = {1.0, 0.0, 1.0};
  g.anchor_ = {0.0, 0.0, 1.0};
  g.value_ = {-offset, 0.0, 1.0 + offset};
  g.far_ = {1.0, offset, -offset, 1.0};
  g.validate_monotone();
  g.anchor_antiderivative();
  g.set_growth_from_far_field();
  return g;
}

// Piecewise-affine interpolant of the odd power map sign(r)*|r|^m on
// [-threshold, threshold], with the tangent continuation outside.
MonotoneGraph MonotoneGraph::sampled_power(double exponent, double threshold, int pieces, bool relax) {
  if (!(threshold > 0.0)) fail(ErrorCode::invalid_argument, "power preset requires threshold > 0");
  if (pieces < 2 || pieces % 2 != 0)
    fail(ErrorCode::invalid_argument, "power preset requires an even piece count >= 2");
  const double m = exponent;
  const double far_slope = m * std::pow(threshold, m - 1.0);
  const double value_at_t = std::pow(threshold, m);
  const double plus = value_at_t - far_slope * threshold;
  if (plus < 0.0 && !relax)
    fail(ErrorCode::negative_intercept,
         "tangent clipping of this power map yields a negative far-field offset");

  const int half = pieces / 2;
  MonotoneGraph g;
  auto f = [&](double r) { return r >= 0.0 ? std::pow(r, m) : -std::pow(-r, m); };
  std::vector<double> nodes;
  for (int j = -half; j <= half; ++j) nodes.push_back(threshold * static_cast<double>(j) / half);
  // left far piece
  g.breaks_ = nodes;
  g.slope_.push_back(far_slope);
  g.anchor_.push_back(nodes.front());
  g.value_.push_back(f(nodes.front()));
  for (int j = 0; j + 1 <= 2 * half; ++j) {
    const double a = nodes[j], b = nodes[j + 1];
    g.slope_.push_back((f(b) - f(a)) / (b - a));
    g.anchor_.push_back(a);
    g.value_.push_back(f(a));
  }
  g.slope_.push_back(far_slope);
  g.anchor_.push_back(nodes.back());
  g.value_.push_back(f(nodes.back()));
  g.far_ = {far_slope, plus, -plus, threshold};
  g.validate_monotone();
  g.anchor_antiderivative();
  g.set_growth_from_far_field();
  return g;
}

MonotoneGraph MonotoneGraph::fast_diffusion_clipped(double exponent, double threshold, int pieces) {
  if (!(exponent > 0.0) || !(exponent < 1.0))
    fail(ErrorCode::invalid_argument, "fast_diffusion_clipped requires exponent in (0, 1)");
  return sampled_power(exponent, threshold, pieces, false);
}

MonotoneGraph MonotoneGraph::porous_clipped(double exponent, double threshold, bool relax_negative_offset,
                                            int pieces) {
  if (!(exponent > 1.0)) fail(ErrorCode::invalid_argument, "porous_clipped requires exponent > 1");
  return sampled_power(exponent, threshold, pieces, relax_negative_offset);
}

MonotoneGraph MonotoneGraph::deadzone_jump(double zone_lo, double zone_hi, double slope, double offset) {
  if (!(zone_lo < zone_hi) || !(zone_lo <= 0.0) || !(zone_hi >= 0.0))
    fail(ErrorCode::invalid_argument, "deadzone_jump requires zone_lo <= 0 <= zone_hi, zone_lo < zone_hi");
  if (!(slope > 0.0) || !(offset >= 0.0))
    fail(ErrorCode::invalid_argument, "deadzone_jump requires slope > 0 and offset >= 0");
  MonotoneGraph g;
  g.breaks_ = {zone_lo, zone_hi};
  g.slope_ = {slope, 0.0, slope};
  g.anchor_ = {zone_lo, zone_lo, zone_hi};
  g.value_ = {slope * zone_lo - offset, 0.0, slope * zone_hi + offset};
  const double t = std::max(zone_hi, -zone_lo);
  g.far_ = {slope, offset, -offset, t};
  g.validate_monotone();
  g.anchor_antiderivative();
  g.set_growth_from_far_field();
  return g;
}

MonotoneGraph MonotoneGraph::from_records(std::vector<Record> records, FarField far) {
  if (records.empty()) fail(ErrorCode::invalid_argument, "custom graph requires at least one record");
  std::sort(records.begin(), records.end(),
            [](const Record& a, const Record& b) { return a.breakpoint < b.breakpoint; });
  MonotoneGraph g;
  const int n = static_cast<int>(records.size());
  g.breaks_.reserve(n);
  for (const Record& r : records) g.breaks_.push_back(r.breakpoint);
  // leftmost piece carries the far-field slope through the first left limit
  g.slope_.push_back(far.slope);
  g.anchor_.push_back(records.front().breakpoint);
  g.value_.push_back(records.front().left_limit);
  for (int i = 0; i < n; ++i) {
    g.slope_.push_back(records[i].slope_after);
    g.anchor_.push_back(records[i].breakpoint);
    g.value_.push_back(records[i].right_limit);
    if (i + 1 < n) {
      const double reached = records[i].right_limit +
                             records[i].slope_after * (records[i + 1].breakpoint - records[i].breakpoint);
      if (!close(reached, records[i + 1].left_limit, 1e-9))
        fail(ErrorCode::validation, "custom graph records are inconsistent between breakpoints");
    }
  }
  // The slope after the last record must agree with the far field.
  if (!close(records.back().slope_after, far.slope, 1e-12))
    fail(ErrorCode::validation, "custom graph: slope after the last record must equal the far-field slope");
  g.far_ = far;
  g.validate_monotone();
  g.anchor_antiderivative();
  g.set_growth_from_far_field();
  return g;
}

MonotoneGraph MonotoneGraph::make_preset(const std::string& name,
                                         const std::map<std::string, double>& params,
                                         bool relax_negative_offset) {
  auto get = [&](const std::string& key, double fallback, bool required = false) {
    auto it = params.find(key);
    if (it == params.end()) {
      if (required) fail(ErrorCode::invalid_argument, "preset '" + name + "' requires parameter '" + key + "'");
      return fallback;
    }
    return it->second;
  };
  for (const auto& [key, unused] : params) {
    (void)unused;
    static const std::map<std::string, std::vector<std::string>> known = {
        {"linear", {"slope", "threshold"}},
        {"heleshaw_clipped", {"offset"}},
        {"fast_diffusion_clipped", {"exponent", "threshold", "pieces"}},
        {"porous_clipped", {"exponent", "threshold", "pieces"}},
        {"deadzone_jump", {"zone_lo", "zone_hi", "slope", "offset"}},
    };
    auto it = known.find(name);
    if (it == known.end()) fail(ErrorCode::invalid_argument, "unknown graph preset '" + name + "'");
    if (std::find(it->second.begin(), it->second.end(), key) == it->second.end())
      fail(ErrorCode::invalid_argument, "preset '" + name + "' does not take parameter '" + key + "'");
  }
  if (name == "linear") return linear(get("slope", 1.0), get("threshold", 1.0));
  if (name == "heleshaw_clipped") return heleshaw_clipped(get("offset", 1.0));
  if (name == "fast_diffusion_clipped")
    return fast_diffusion_clipped(get("exponent", 0.5), get("threshold", 1.0),
                                  static_cast<int>(get("pieces", 256)));
  if (name == "porous_clipped")
    return porous_clipped(get("exponent", 2.0), get("threshold", 1.0), relax_negative_offset,
                          static_cast<int>(get("pieces", 256)));
  if (name == "deadzone_jump")
    return deadzone_jump(get("zone_lo", 0.0, true), get("zone_hi", 0.0, true), get("slope", 1.0),
                         get("offset", 0.0));
  fail(ErrorCode::invalid_argument, "unknown graph preset '" + name + "'");
}

GraphPair::GraphPair(MonotoneGraph b, MonotoneGraph s, bool relax_negative_offset)
    : bulk(std::move(b)), surface(std::move(s)) {
  const FarFieldCertificate cb = bulk.validate_far_field(relax_negative_offset);
  const FarFieldCertificate cs = surface.validate_far_field(relax_negative_offset);
  if (!close(cb.slope, cs.slope, 1e-12))
    fail(ErrorCode::validation, "bulk and surface graphs must share the far-field slope");
  if (!close(cb.threshold, cs.threshold, 1e-12))
    fail(ErrorCode::validation, "bulk and surface graphs must share the far-field threshold");
}

GraphPair::GraphPair(MonotoneGraph both, bool relax_negative_offset)
    : GraphPair(both, both, relax_negative_offset) {}

GraphPair GraphPair::shifted(double shift) const {
  GraphPair p = *this;
  p.bulk = bulk.shifted(shift);
  p.surface = surface.shifted(shift);
  return p;
}

GrowthCertificate GraphPair::combined_growth() const {
  return {std::min(bulk.growth().quad, surface.growth().quad),
          std::max(bulk.growth().offset, surface.growth().offset)};
}

} // namespace parabulk
