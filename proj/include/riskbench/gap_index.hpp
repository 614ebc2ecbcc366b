#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "riskbench/aggregation.hpp"
#include "riskbench/catalog.hpp"
#include "riskbench/error.hpp"
#include "riskbench/money.hpp"

namespace riskbench {

/// Share of total weight given to controls implicated in losses.
struct GroupWeightSplit {
  double loss_group_weight = 0.75;
  bool equal_weighting = false;  // no implicated controls: every control gets 1/n

  double no_loss_group_weight() const { return 1.0 - loss_group_weight; }
};

struct WeightAllocation {
  std::vector<std::string> control_ids;
  std::vector<double> weights;
  std::vector<bool> implicated;
  GroupWeightSplit split;

  std::size_t size() const { return weights.size(); }

  double weight_of(std::string_view id) const {
    for (std::size_t i = 0; i < control_ids.size(); ++i)
      if (control_ids[i] == id) return weights[i];
    throw Error(ErrorCode::UnknownControl, "no weight for control '" + std::string(id) + "'");
  }

  /// True when every implicated weight exceeds every non-implicated weight.
  bool ordering_holds() const {
    double min_implicated = INFINITY;
    double max_other = -INFINITY;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (implicated[i])
        min_implicated = std::min(min_implicated, weights[i]);
      else
        max_other = std::max(max_other, weights[i]);
    }
    return min_implicated > max_other;
  }
};

/// Implicated controls share the loss-group weight in proportion to
/// their attributed losses; the rest share the remainder equally.
inline WeightAllocation prorate_weights(const GroupWeightSplit& split, std::span<const Cents> losses,
                                        const ControlCatalog& catalog) {
  if (losses.size() != catalog.size())
    throw Error(ErrorCode::LengthMismatch, "one loss per catalog control required");
  WeightAllocation out;
  out.split = split;
  Cents total{0};
  std::size_t others = 0;
  for (std::size_t i = 0; i < losses.size(); ++i) {
    if (losses[i] < Cents{0}) throw Error(ErrorCode::InvalidArgument, "negative control loss");
    out.control_ids.push_back(catalog[i].id);
    out.implicated.push_back(losses[i] > Cents{0});
    total += losses[i];
    if (!(losses[i] > Cents{0})) ++others;
  }
  const auto n = static_cast<double>(catalog.size());
  if (split.equal_weighting || total == Cents{0}) {
    out.split.equal_weighting = true;
    out.weights.assign(catalog.size(), 1.0 / n);
    return out;
  }
  if (!(split.loss_group_weight > 0.0 && split.loss_group_weight < 1.0))
    throw Error(ErrorCode::InvalidArgument, "loss group weight must lie in (0,1)");
  // With every control implicated there is no no-loss group to receive weight.
  const double loss_share = others == 0 ? 1.0 : split.loss_group_weight;
  const double other_weight = others == 0 ? 0.0 : split.no_loss_group_weight() / static_cast<double>(others);
  const auto total_d = static_cast<long double>(total.value);
  for (std::size_t i = 0; i < losses.size(); ++i)
    out.weights.push_back(out.implicated[i]
                              ? static_cast<double>(loss_share * static_cast<long double>(losses[i].value) / total_d)
                              : other_weight);
  return out;
}

inline constexpr double kSplitStep = 0.05;
inline constexpr double kSplitCeiling = 0.95;

/// Accepts the requested split when the implicated/non-implicated
/// ordering holds, otherwise raises the loss-group weight in 0.05 steps up to
/// 0.95. Raising is the only direction that can restore the ordering.
inline GroupWeightSplit allocate_group_split(std::span<const Cents> losses, const ControlCatalog& catalog,
                                             double requested) {
  if (!(requested > 0.0 && requested < 1.0))
    throw Error(ErrorCode::InvalidArgument, "requested loss group weight must lie in (0,1)");
  const bool any_loss = std::any_of(losses.begin(), losses.end(), [](Cents c) { return c > Cents{0}; });
  if (!any_loss) return GroupWeightSplit{requested, true};
  for (int step = 0;; ++step) {
    const double s = requested + kSplitStep * step;
    if (s > kSplitCeiling + 1e-12) break;
    const GroupWeightSplit candidate{s, false};
    if (prorate_weights(candidate, losses, catalog).ordering_holds()) return candidate;
  }
  throw Error(ErrorCode::ConstraintUnsatisfiable,
              "no loss group weight up to 0.95 gives every implicated control more weight than "
              "the non-implicated controls");
}

inline GroupWeightSplit allocate_group_split(const AggregateReport& report, double requested) {
  const auto losses = report.control_losses();
  return allocate_group_split(losses, report.catalog(), requested);
}

struct AnchorPoint {
  double deviation = 0.0;
  Cents loss;
};

/// Deviation/loss points used by the ISAO fit, excluding the (0, L_avg) grounding point.
inline std::vector<AnchorPoint> default_anchors() {
  return {{-0.30, Cents::from_dollars(450'000)}, {0.15, Cents::from_dollars(50'000)}};
}

/// Slope of the ordinary least squares line of ln(loss) on deviation. The
/// intercept is discarded: the curve is grounded at (0, L_avg) by construction.
inline double fit_gap_curve(std::span<const AnchorPoint> anchors, Cents average_loss) {
  if (!(average_loss > Cents{0})) throw Error(ErrorCode::InvalidArgument, "average loss must be positive");
  if (anchors.size() < 2) throw Error(ErrorCode::DegenerateAnchors, "need at least two anchors");
  long double mean_x = 0, mean_y = 0;
  for (const auto& a : anchors) {
    if (!(a.loss > Cents{0})) throw Error(ErrorCode::InvalidArgument, "anchor loss must be positive");
    if (!std::isfinite(a.deviation)) throw Error(ErrorCode::InvalidArgument, "anchor deviation not finite");
    mean_x += a.deviation;
    mean_y += std::log(static_cast<long double>(a.loss.value));
  }
  const auto n = static_cast<long double>(anchors.size());
  mean_x /= n;
  mean_y /= n;
  long double sxx = 0, sxy = 0;
  for (const auto& a : anchors) {
    const long double dx = a.deviation - mean_x;
    sxx += dx * dx;
    sxy += dx * (std::log(static_cast<long double>(a.loss.value)) - mean_y);
  }
  if (sxx == 0) throw Error(ErrorCode::DegenerateAnchors, "all anchors share one deviation");
  return static_cast<double>(sxy / sxx);
}

/// Adds (0, average_loss) unless an anchor already sits at zero deviation.
inline std::vector<AnchorPoint> with_grounding_point(std::vector<AnchorPoint> anchors, Cents average_loss) {
  const bool has_zero = std::any_of(anchors.begin(), anchors.end(),
                                    [](const AnchorPoint& a) { return a.deviation == 0.0; });
  if (!has_zero) anchors.push_back({0.0, average_loss});
  std::sort(anchors.begin(), anchors.end(),
            [](const AnchorPoint& a, const AnchorPoint& b) { return a.deviation < b.deviation; });
  return anchors;
}

/// Published ISAO gap constant, for reproducing the reference curves.
inline constexpr double kIsaoGapConstant = -4.796;

inline constexpr double kDefaultDeviationBound = 0.30;
inline constexpr double kDefaultRatioCap = 4.0;

struct GapIndexModel {
  double k = 0.0;                     // exponent used for forecasts
  std::optional<double> k_fitted;     // least-squares slope, when a fit ran
  std::vector<double> group_averages; // per control, fraction in [0,1]
  WeightAllocation weights;
  double deviation_min = -kDefaultDeviationBound;
  double deviation_max = kDefaultDeviationBound;
  double ratio_cap = kDefaultRatioCap;
  std::vector<AnchorPoint> anchors;
  std::string session_id;
  std::string fit_method = "ols-log-pinned";
  bool no_loss_baseline = false;

  bool within_bounds(double x) const { return x >= deviation_min && x <= deviation_max; }
};

/// Per-control own/peer ratio with the zero-average conventions applied.
inline double maturity_ratio(double own, double group_average, double ratio_cap) {
  if (group_average <= 0.0) return own <= 0.0 ? 1.0 : ratio_cap;
  return std::clamp(own / group_average, 0.0, ratio_cap);
}

/// Loss-weighted sum of own/peer maturity ratios (1 at the peer average).
inline double weighted_ratio(std::span<const double> own, const GapIndexModel& model) {
  if (own.size() != model.group_averages.size() || own.size() != model.weights.size())
    throw Error(ErrorCode::LengthMismatch, "own maturities do not match the model's controls");
  long double r = 0;
  for (std::size_t i = 0; i < own.size(); ++i)
    r += static_cast<long double>(model.weights.weights[i]) *
         maturity_ratio(own[i], model.group_averages[i], model.ratio_cap);
  return static_cast<double>(r);
}

/// Net weighted deviation x = weighted ratio - 1, accumulated as
/// sum w_n (ratio_n - 1) so the peer average yields exactly 0.
inline double net_weighted_deviation(std::span<const double> own, const GapIndexModel& model) {
  if (own.size() != model.group_averages.size() || own.size() != model.weights.size())
    throw Error(ErrorCode::LengthMismatch, "own maturities do not match the model's controls");
  long double x = 0;
  for (std::size_t i = 0; i < own.size(); ++i)
    x += static_cast<long double>(model.weights.weights[i]) *
         (maturity_ratio(own[i], model.group_averages[i], model.ratio_cap) - 1.0);
  return static_cast<double>(x);
}

/// G = e^{k x}.
inline double gap_multiplier(double x, double k) { return std::exp(k * x); }
inline double gap_multiplier(double x, const GapIndexModel& model) { return gap_multiplier(x, model.k); }

struct FitOptions {
  double requested_split = 0.75;
  std::vector<AnchorPoint> anchors = default_anchors();
  std::optional<double> k_override;  // e.g. kIsaoGapConstant
  double deviation_bound = kDefaultDeviationBound;
  double ratio_cap = kDefaultRatioCap;
};

/// Split, weights and fit over an aggregate report. Without incidents the model is the
/// equal-weight, G = 1 baseline and no fit is attempted.
inline GapIndexModel build_model(const AggregateReport& report, const FitOptions& opts) {
  const auto catalog = report.catalog();
  const auto losses = report.control_losses();
  GapIndexModel model;
  model.group_averages = report.group_averages();
  model.deviation_min = -opts.deviation_bound;
  model.deviation_max = opts.deviation_bound;
  model.ratio_cap = opts.ratio_cap;
  model.session_id = report.session_id;
  const auto split = allocate_group_split(losses, catalog, opts.requested_split);
  model.weights = prorate_weights(split, losses, catalog);
  if (report.incident_count == 0 || report.total_loss == Cents{0}) {
    model.no_loss_baseline = true;
    model.k = 0.0;
    model.fit_method = "none: no-loss baseline, G = 1";
    return model;
  }
  const Cents avg{div_round_half_even(report.total_loss.value,
                                      static_cast<std::int64_t>(report.incident_count))};
  model.anchors = with_grounding_point(opts.anchors, avg);
  model.k_fitted = fit_gap_curve(model.anchors, avg);
  if (opts.k_override) {
    model.k = *opts.k_override;
    model.fit_method = "override";
  } else {
    model.k = *model.k_fitted;
  }
  return model;
}

}  // namespace riskbench
