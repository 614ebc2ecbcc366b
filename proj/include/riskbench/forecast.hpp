#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "riskbench/aggregation.hpp"
#include "riskbench/error.hpp"
#include "riskbench/gap_index.hpp"
#include "riskbench/money.hpp"

namespace riskbench {

inline constexpr double kDefaultWindowYears = 2.5;
inline constexpr std::uint64_t kLowDataIncidentCount = 3;

inline constexpr const char* kNoIncidentCaveat =
    "insufficient incident data: no incidents reported, risk is zero by construction";
inline constexpr const char* kLowDataCaveat =
    "low data: fewer than 3 incidents underpin the peer baseline";

struct PeerBaseline {
  double incident_rate = 0.0;  // P, incidents per firm-year
  Cents average_loss;          // L, per incident
  Cents annual_risk;           // R_peers = P * L
  double window_years = kDefaultWindowYears;
  std::uint64_t firm_count = 0;
  std::uint64_t incident_count = 0;
  std::vector<std::string> caveats;

  bool low_data() const { return incident_count < kLowDataIncidentCount; }
};

inline double incident_rate(std::uint64_t incidents, std::uint64_t firms, double window_years) {
  if (firms == 0) throw Error(ErrorCode::InvalidArgument, "firm count must be >= 1");
  if (!(window_years > 0.0)) throw Error(ErrorCode::InvalidArgument, "window must be positive");
  return static_cast<double>(incidents) / (static_cast<double>(firms) * window_years);
}

inline double incident_rate(const AggregateReport& report, double window_years) {
  return incident_rate(report.incident_count, report.participant_count, window_years);
}

/// Mean loss per incident, rounded half-even to the cent.
inline Cents average_loss(Cents total, std::uint64_t incidents) {
  if (incidents == 0) throw Error(ErrorCode::NoIncidents, "no incidents to average over");
  return Cents{div_round_half_even(total.value, static_cast<std::int64_t>(incidents))};
}

inline Cents average_loss(const AggregateReport& report) {
  return average_loss(report.total_loss, report.incident_count);
}

inline Cents peer_annual_risk(double rate, Cents loss) {
  if (rate < 0.0 || loss < Cents{0}) throw Error(ErrorCode::InvalidArgument, "negative P or L");
  return round_cents(static_cast<long double>(rate) * static_cast<long double>(loss.value));
}

inline PeerBaseline make_baseline(const AggregateReport& report, double window_years) {
  PeerBaseline b;
  b.window_years = window_years;
  b.firm_count = report.participant_count;
  b.incident_count = report.incident_count;
  b.incident_rate = incident_rate(report, window_years);
  if (report.incident_count == 0) {
    b.caveats.emplace_back(kNoIncidentCaveat);
    return b;
  }
  b.average_loss = average_loss(report);
  b.annual_risk = peer_annual_risk(b.incident_rate, b.average_loss);
  if (b.low_data()) b.caveats.emplace_back(kLowDataCaveat);
  return b;
}

struct FirmForecast {
  double deviation = 0.0;
  double weighted_ratio = 1.0;
  double gap = 1.0;  // G_own
  Cents annual_risk;
  Cents incident_size;
  double annual_risk_cents_exact = 0.0;    // before the terminal rounding
  double incident_size_cents_exact = 0.0;
  double risk_ratio_vs_peers = 1.0;        // AnnualRisk_own / AnnualRisk_peers
  double incident_ratio_vs_peers = 1.0;    // IncidentSize_own / L
  bool within_bounds = true;
  std::vector<std::string> caveats;
};

/// Forecast at a given deviation: annual = P L G, incident = L G.
inline FirmForecast forecast_at_deviation(double x, const GapIndexModel& model,
                                          const PeerBaseline& baseline) {
  FirmForecast f;
  f.deviation = x;
  f.weighted_ratio = 1.0 + x;
  f.gap = gap_multiplier(x, model);
  const long double l = baseline.average_loss.value;
  const long double annual = static_cast<long double>(baseline.incident_rate) * l * f.gap;
  const long double incident = l * f.gap;
  f.annual_risk_cents_exact = static_cast<double>(annual);
  f.incident_size_cents_exact = static_cast<double>(incident);
  f.annual_risk = round_cents(annual);
  f.incident_size = round_cents(incident);
  f.risk_ratio_vs_peers = f.gap;
  f.incident_ratio_vs_peers = f.gap;
  f.within_bounds = model.within_bounds(x);
  f.caveats = baseline.caveats;
  if (!f.within_bounds) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "deviation %.4f lies outside the modelled range [%.2f, %.2f]; extrapolated", x,
                  model.deviation_min, model.deviation_max);
    f.caveats.emplace_back(buf);
  }
  return f;
}

inline FirmForecast firm_forecast(std::span<const double> own, const GapIndexModel& model,
                                  const PeerBaseline& baseline) {
  const double x = net_weighted_deviation(own, model);
  auto f = forecast_at_deviation(x, model, baseline);
  f.weighted_ratio = weighted_ratio(own, model);
  return f;
}

struct ComparisonRow {
  std::string control_id;
  std::string name;
  double own = 0.0;
  double peer_average = 0.0;
  std::array<std::uint64_t, kMaturityLevelCount> distribution{};
  double delta = 0.0;  // own - peer_average
  double weight = 0.0;
};

struct PostureComparison {
  std::vector<ComparisonRow> rows;
  double weighted_ratio = 1.0;
  double deviation = 0.0;
  std::string summary;
};

/// "25% lower than the sector's peer average" style wording for a deviation.
inline std::string describe_deviation(double x) {
  const double pct = std::round(std::abs(x) * 1000.0) / 10.0;
  if (pct == 0.0) return "equal to the sector's peer average";
  char buf[96];
  if (pct == std::round(pct))
    std::snprintf(buf, sizeof buf, "%.0f%% %s than the sector's peer average", pct, x < 0 ? "lower" : "higher");
  else
    std::snprintf(buf, sizeof buf, "%.1f%% %s than the sector's peer average", pct, x < 0 ? "lower" : "higher");
  return buf;
}

inline PostureComparison posture_comparison(std::span<const double> own, const AggregateReport& report,
                                            const GapIndexModel& model) {
  if (own.size() != report.controls.size())
    throw Error(ErrorCode::LengthMismatch, "own maturities do not match the report's controls");
  PostureComparison out;
  for (std::size_t i = 0; i < own.size(); ++i) {
    const auto& c = report.controls[i];
    out.rows.push_back({c.id, c.name, own[i], c.avg_maturity, c.flag_counts, own[i] - c.avg_maturity,
                        model.weights.weights.at(i)});
  }
  out.weighted_ratio = weighted_ratio(own, model);
  out.deviation = net_weighted_deviation(own, model);
  out.summary = "security posture is " + describe_deviation(out.deviation) +
                " after weighting each control by observed losses";
  return out;
}

struct RiskCurveRow {
  double deviation = 0.0;
  Cents annual_risk;
  Cents incident_size;
};

inline std::vector<RiskCurveRow> risk_curve_table(const GapIndexModel& model, const PeerBaseline& baseline,
                                                  std::span<const double> grid) {
  std::vector<RiskCurveRow> rows;
  rows.reserve(grid.size());
  for (double x : grid) {
    if (!std::isfinite(x)) throw Error(ErrorCode::InvalidArgument, "non-finite grid point");
    const auto f = forecast_at_deviation(x, model, baseline);
    rows.push_back({x, f.annual_risk, f.incident_size});
  }
  return rows;
}

/// Evenly spaced grid from lo to hi inclusive.
inline std::vector<double> linear_grid(double lo, double hi, std::size_t points) {
  std::vector<double> grid;
  if (points == 0) return grid;
  if (points == 1) return {lo};
  for (std::size_t i = 0; i < points; ++i)
    grid.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1));
  return grid;
}

}  // namespace riskbench
