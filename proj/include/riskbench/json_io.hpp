#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "riskbench/aggregation.hpp"
#include "riskbench/catalog.hpp"
#include "riskbench/forecast.hpp"
#include "riskbench/gap_index.hpp"
#include "riskbench/monte_carlo.hpp"
#include "riskbench/submission.hpp"

namespace riskbench {

using json = nlohmann::json;

inline constexpr int kFormatVersion = 1;

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidSchema, "'" + path + "' is not valid JSON: " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  out << text;
}

namespace detail {

inline const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw Error(ErrorCode::InvalidSchema, std::string("missing field '") + key + "'");
  return j.at(key);
}

template <typename T>
T get_as(const json& j, const char* key) {
  try {
    return field(j, key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidSchema, std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace detail

/// Accepts "1234.56", 1234 or 1234.56 as a dollar amount.
inline Cents usd_from_json(const json& j) {
  if (j.is_string()) return parse_usd(j.get<std::string>());
  if (j.is_number_integer()) return Cents::from_dollars(j.get<std::int64_t>());
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidSchema, "non-finite USD amount");
    return round_cents(static_cast<long double>(v) * 100.0L);
  }
  throw Error(ErrorCode::InvalidSchema, "USD amount must be a string or number");
}

inline std::string checksum_hex(std::uint32_t crc) {
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08x", crc);
  return buf;
}

// --- submissions ------------------------------------------------------------

inline ParticipantSubmission submission_from_json(const json& j) {
  ParticipantSubmission sub;
  sub.participant_id = detail::get_as<std::string>(j, "participant_id");
  const auto& mats = detail::field(j, "maturities");
  if (!mats.is_object()) throw Error(ErrorCode::InvalidSchema, "maturities must be an object");
  for (const auto& [id, value] : mats.items()) {
    const auto level = value.is_string() ? parse_level(value.get<std::string>()) : std::nullopt;
    if (!level)
      throw Error(ErrorCode::InvalidSchema, "control '" + id + "' has an invalid maturity level");
    sub.maturities.emplace(id, *level);
  }
  if (j.contains("incidents")) {
    for (const auto& inc : j.at("incidents")) {
      IncidentRecord rec;
      rec.loss = usd_from_json(detail::field(inc, "loss_usd"));
      rec.implicated = detail::get_as<std::vector<std::string>>(inc, "implicated");
      if (inc.contains("period")) rec.period = inc.at("period").get<std::string>();
      sub.incidents.push_back(std::move(rec));
    }
  }
  const auto hex = detail::get_as<std::string>(j, "checksum");
  try {
    std::size_t used = 0;
    const unsigned long v = std::stoul(hex, &used, 16);
    if (used != hex.size() || hex.size() > 8) throw std::invalid_argument(hex);
    sub.checksum = static_cast<std::uint32_t>(v);
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidSchema, "checksum must be up to 8 hex digits");
  }
  return sub;
}

inline json submission_to_json(const ParticipantSubmission& sub) {
  json mats = json::object();
  for (const auto& [id, level] : sub.maturities) mats[id] = std::string(to_string(level));
  json incidents = json::array();
  for (const auto& inc : sub.incidents)
    incidents.push_back({{"loss_usd", format_usd(inc.loss)}, {"implicated", inc.implicated}, {"period", inc.period}});
  return {{"participant_id", sub.participant_id},
          {"maturities", mats},
          {"incidents", incidents},
          {"checksum", checksum_hex(sub.checksum)}};
}

/// Own posture for private forecasting: level names or fractions in [0,1],
/// returned in catalog order.
inline std::vector<double> own_posture_from_json(const json& j, const ControlCatalog& catalog) {
  const json& mats = j.contains("maturities") ? j.at("maturities") : j;
  if (!mats.is_object()) throw Error(ErrorCode::InvalidSchema, "maturities must be an object");
  for (const auto& [id, value] : mats.items())
    if (!catalog.index_of(id)) throw Error(ErrorCode::UnknownControl, "unknown control '" + id + "'");
  std::vector<double> out;
  for (const auto& control : catalog.controls()) {
    if (!mats.contains(control.id))
      throw Error(ErrorCode::MissingControl, "missing maturity rating for control '" + control.id + "'");
    const auto& v = mats.at(control.id);
    if (v.is_string()) {
      const auto level = parse_level(v.get<std::string>());
      if (!level) throw Error(ErrorCode::InvalidSchema, "control '" + control.id + "' has an invalid maturity level");
      out.push_back(fraction(*level));
    } else if (v.is_number()) {
      const double f = v.get<double>();
      if (!(f >= 0.0 && f <= 1.0))
        throw Error(ErrorCode::InvalidSchema, "control '" + control.id + "' maturity must lie in [0,1]");
      out.push_back(f);
    } else {
      throw Error(ErrorCode::InvalidSchema, "control '" + control.id + "' maturity must be a level name or number");
    }
  }
  return out;
}

// --- catalog and bands ------------------------------------------------------

inline ControlCatalog catalog_from_json(const json& j) {
  std::vector<Control> controls;
  for (const auto& c : detail::field(j, "controls"))
    controls.push_back({detail::get_as<std::string>(c, "id"), c.value("name", std::string{})});
  return ControlCatalog(std::move(controls));
}

inline json catalog_to_json(const ControlCatalog& catalog) {
  json controls = json::array();
  for (const auto& c : catalog.controls()) controls.push_back({{"id", c.id}, {"name", c.name}});
  return {{"version", kFormatVersion}, {"controls", controls}};
}

inline LossBandSchema bands_from_json(const json& edges) {
  std::vector<Cents> lower;
  for (const auto& e : edges) lower.push_back(usd_from_json(e));
  return LossBandSchema(std::move(lower));
}

// --- aggregate report -------------------------------------------------------

inline json report_to_json(const AggregateReport& r) {
  json controls = json::array();
  for (const auto& c : r.controls)
    controls.push_back({{"id", c.id},
                        {"name", c.name},
                        {"maturity_points", c.maturity_points},
                        {"avg_maturity", c.avg_maturity},
                        {"flag_counts", c.flag_counts},
                        {"failure_count", c.failure_count},
                        {"loss_usd", format_usd(c.loss)}});
  json bands = json::array();
  for (std::size_t b = 0; b < r.band_counts.size(); ++b)
    bands.push_back({{"lower_usd", format_usd(r.band_lower_edges[b])}, {"count", r.band_counts[b]}});
  return {{"version", kFormatVersion},
          {"session_id", r.session_id},
          {"participant_count", r.participant_count},
          {"overall_avg_maturity", r.overall_avg_maturity},
          {"incident_count", r.incident_count},
          {"total_loss_usd", format_usd(r.total_loss)},
          {"band_mode", r.band_mode == BandFlagMode::PerFirm ? "per_firm" : "per_incident"},
          {"bands", bands},
          {"controls", controls},
          {"caveats", r.caveats}};
}

inline AggregateReport report_from_json(const json& j) {
  try {
    AggregateReport r;
    r.session_id = j.value("session_id", std::string{});
    r.participant_count = detail::get_as<std::uint64_t>(j, "participant_count");
    r.overall_avg_maturity = detail::get_as<double>(j, "overall_avg_maturity");
    r.incident_count = detail::get_as<std::uint64_t>(j, "incident_count");
    r.total_loss = usd_from_json(detail::field(j, "total_loss_usd"));
    r.band_mode = j.value("band_mode", std::string("per_firm")) == "per_incident" ? BandFlagMode::PerIncident
                                                                                   : BandFlagMode::PerFirm;
    for (const auto& b : detail::field(j, "bands")) {
      r.band_lower_edges.push_back(usd_from_json(detail::field(b, "lower_usd")));
      r.band_counts.push_back(detail::get_as<std::uint64_t>(b, "count"));
    }
    for (const auto& c : detail::field(j, "controls")) {
      ControlAggregate a;
      a.id = detail::get_as<std::string>(c, "id");
      a.name = c.value("name", std::string{});
      a.maturity_points = detail::get_as<std::uint64_t>(c, "maturity_points");
      a.avg_maturity = detail::get_as<double>(c, "avg_maturity");
      a.flag_counts = detail::get_as<std::array<std::uint64_t, kMaturityLevelCount>>(c, "flag_counts");
      a.failure_count = detail::get_as<std::uint64_t>(c, "failure_count");
      a.loss = usd_from_json(detail::field(c, "loss_usd"));
      r.controls.push_back(std::move(a));
    }
    if (j.contains("caveats")) r.caveats = j.at("caveats").get<std::vector<std::string>>();
    if (r.participant_count == 0 || r.controls.empty())
      throw Error(ErrorCode::InvalidSchema, "report has no participants or controls");
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidSchema, std::string("malformed report: ") + e.what());
  }
}

// --- model and baseline -----------------------------------------------------

inline json model_to_json(const GapIndexModel& m) {
  json controls = json::array();
  for (std::size_t i = 0; i < m.weights.size(); ++i)
    controls.push_back({{"id", m.weights.control_ids[i]},
                        {"weight", m.weights.weights[i]},
                        {"implicated", static_cast<bool>(m.weights.implicated[i])},
                        {"group_average", m.group_averages[i]}});
  json anchors = json::array();
  for (const auto& a : m.anchors) anchors.push_back({{"deviation", a.deviation}, {"loss_usd", format_usd(a.loss)}});
  return {{"version", kFormatVersion},
          {"k", m.k},
          {"k_fitted", m.k_fitted ? json(*m.k_fitted) : json(nullptr)},
          {"fit_method", m.fit_method},
          {"session_id", m.session_id},
          {"no_loss_baseline", m.no_loss_baseline},
          {"split", {{"loss_group_weight", m.weights.split.loss_group_weight},
                     {"equal_weighting", m.weights.split.equal_weighting}}},
          {"deviation_bounds", {m.deviation_min, m.deviation_max}},
          {"ratio_cap", m.ratio_cap},
          {"controls", controls},
          {"anchors", anchors}};
}

inline GapIndexModel model_from_json(const json& j) {
  try {
    GapIndexModel m;
    m.k = detail::get_as<double>(j, "k");
    if (!std::isfinite(m.k)) throw Error(ErrorCode::InvalidSchema, "model exponent k is not finite");
    if (j.contains("k_fitted") && !j.at("k_fitted").is_null()) m.k_fitted = j.at("k_fitted").get<double>();
    m.fit_method = j.value("fit_method", std::string{});
    m.session_id = j.value("session_id", std::string{});
    m.no_loss_baseline = j.value("no_loss_baseline", false);
    const auto& split = detail::field(j, "split");
    m.weights.split.loss_group_weight = detail::get_as<double>(split, "loss_group_weight");
    m.weights.split.equal_weighting = detail::get_as<bool>(split, "equal_weighting");
    const auto bounds = detail::get_as<std::vector<double>>(j, "deviation_bounds");
    if (bounds.size() != 2 || !(bounds[0] < bounds[1]))
      throw Error(ErrorCode::InvalidSchema, "deviation_bounds must be [min, max]");
    m.deviation_min = bounds[0];
    m.deviation_max = bounds[1];
    m.ratio_cap = detail::get_as<double>(j, "ratio_cap");
    for (const auto& c : detail::field(j, "controls")) {
      m.weights.control_ids.push_back(detail::get_as<std::string>(c, "id"));
      m.weights.weights.push_back(detail::get_as<double>(c, "weight"));
      m.weights.implicated.push_back(detail::get_as<bool>(c, "implicated"));
      m.group_averages.push_back(detail::get_as<double>(c, "group_average"));
    }
    if (m.weights.size() == 0) throw Error(ErrorCode::InvalidSchema, "model has no controls");
    if (j.contains("anchors"))
      for (const auto& a : j.at("anchors"))
        m.anchors.push_back({detail::get_as<double>(a, "deviation"), usd_from_json(detail::field(a, "loss_usd"))});
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidSchema, std::string("malformed model: ") + e.what());
  }
}

/// Catalog implied by a model file (ids only; names are optional).
inline ControlCatalog model_catalog(const GapIndexModel& m) {
  std::vector<Control> controls;
  for (const auto& id : m.weights.control_ids) controls.push_back({id, {}});
  return ControlCatalog(std::move(controls));
}

inline json baseline_to_json(const PeerBaseline& b) {
  return {{"version", kFormatVersion},
          {"P", b.incident_rate},
          {"L_usd", format_usd(b.average_loss)},
          {"R_peers_usd", format_usd(b.annual_risk)},
          {"window_years", b.window_years},
          {"firm_count", b.firm_count},
          {"incident_count", b.incident_count},
          {"low_data", b.low_data()},
          {"caveats", b.caveats}};
}

inline PeerBaseline baseline_from_json(const json& j) {
  try {
    PeerBaseline b;
    b.incident_rate = detail::get_as<double>(j, "P");
    b.average_loss = usd_from_json(detail::field(j, "L_usd"));
    b.annual_risk = usd_from_json(detail::field(j, "R_peers_usd"));
    b.window_years = detail::get_as<double>(j, "window_years");
    b.firm_count = detail::get_as<std::uint64_t>(j, "firm_count");
    b.incident_count = detail::get_as<std::uint64_t>(j, "incident_count");
    if (j.contains("caveats")) b.caveats = j.at("caveats").get<std::vector<std::string>>();
    if (b.incident_rate < 0 || b.average_loss < Cents{0})
      throw Error(ErrorCode::InvalidSchema, "baseline P and L must be non-negative");
    return b;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidSchema, std::string("malformed baseline: ") + e.what());
  }
}

// --- forecast ---------------------------------------------------------------

inline json forecast_to_json(const FirmForecast& f, const PeerBaseline& b) {
  return {{"deviation", f.deviation},
          {"weighted_ratio", f.weighted_ratio},
          {"G", f.gap},
          {"annual_risk_usd", format_usd(f.annual_risk)},
          {"incident_size_usd", format_usd(f.incident_size)},
          {"annual_risk_peers_usd", format_usd(b.annual_risk)},
          {"incident_size_peers_usd", format_usd(b.average_loss)},
          {"P", b.incident_rate},
          {"risk_ratio_vs_peers", f.risk_ratio_vs_peers},
          {"incident_ratio_vs_peers", f.incident_ratio_vs_peers},
          {"within_bounds", f.within_bounds},
          {"low_data", b.low_data()},
          {"caveats", f.caveats}};
}

inline json comparison_to_json(const PostureComparison& c) {
  json rows = json::array();
  for (const auto& r : c.rows)
    rows.push_back({{"id", r.control_id},
                    {"name", r.name},
                    {"own", r.own},
                    {"peer_average", r.peer_average},
                    {"distribution", r.distribution},
                    {"delta", r.delta},
                    {"weight", r.weight}});
  return {{"controls", rows},
          {"weighted_ratio", c.weighted_ratio},
          {"deviation", c.deviation},
          {"summary", c.summary}};
}

// --- CSV and text renderings ------------------------------------------------

inline std::string format_double(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline std::string risk_curve_csv(const std::vector<RiskCurveRow>& rows) {
  std::string out = "deviation,annual_risk_usd,incident_size_usd\n";
  for (const auto& r : rows)
    out += format_double(r.deviation, 4) + "," + format_usd(r.annual_risk) + "," + format_usd(r.incident_size) + "\n";
  return out;
}

inline std::string histogram_csv(const std::vector<HistogramBin>& bins, Cents width) {
  std::string out = "bin_lower_usd,bin_upper_usd,count\n";
  for (const auto& b : bins)
    out += format_usd(b.lower) + "," + format_usd(b.lower + width) + "," + std::to_string(b.count) + "\n";
  return out;
}

inline std::string lec_csv(const std::vector<ExceedanceRow>& rows) {
  std::string out = "threshold_usd,exceedance_prob\n";
  for (const auto& r : rows) out += format_usd(r.threshold) + "," + format_double(r.probability, 6) + "\n";
  return out;
}

inline std::string samples_csv(const SimulationResult& result) {
  std::string out = "draw,loss_usd\n";
  for (std::size_t i = 0; i < result.samples.size(); ++i)
    out += std::to_string(i) + "," + format_usd(result.samples[i]) + "\n";
  return out;
}

inline std::string pct(double fraction, int digits = 1) { return format_double(fraction * 100.0, digits) + "%"; }

/// Weight listing: control, attributed loss, equal weight, prorated weight.
inline std::string weights_table_text(const AggregateReport& report, const GapIndexModel& model) {
  std::ostringstream os;
  char line[200];
  std::snprintf(line, sizeof line, "%-40s %16s %8s %10s\n", "Control", "Observed losses", "Equal", "Prorated");
  os << line;
  std::vector<std::size_t> order(report.controls.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return report.controls[a].loss > report.controls[b].loss;
  });
  const double equal = 1.0 / static_cast<double>(report.controls.size());
  for (std::size_t i : order) {
    const auto& c = report.controls[i];
    const std::string label = c.id + ". " + c.name;
    std::snprintf(line, sizeof line, "%-40s %16s %8s %10s\n", label.c_str(), ("$" + format_usd(c.loss)).c_str(),
                  pct(equal).c_str(), pct(model.weights.weights[i]).c_str());
    os << line;
  }
  return os.str();
}

inline std::string forecast_text(const FirmForecast& f, const PeerBaseline& b, const PostureComparison& c) {
  std::ostringstream os;
  char line[200];
  auto row = [&](const char* label, const std::string& own, const std::string& peers) {
    std::snprintf(line, sizeof line, "%-28s %18s %18s\n", label, own.c_str(), peers.c_str());
    os << line;
  };
  row("", "own", "peers");
  row("AnnualRisk (USD/yr)", format_usd(f.annual_risk), format_usd(b.annual_risk));
  row("ForecastedIncidentSize", format_usd(f.incident_size), format_usd(b.average_loss));
  row("G (gap index)", format_double(f.gap, 4), "1.0000");
  row("NetWeightedDeviation", format_double(f.deviation, 4), "0.0000");
  row("P (incidents/firm-yr)", format_double(b.incident_rate, 4), format_double(b.incident_rate, 4));
  os << "\n" << c.summary << "\n\n";
  std::snprintf(line, sizeof line, "%-6s %-34s %7s %7s %8s %7s  %s\n", "id", "control", "own", "peer", "delta",
                "weight", "dist(N/P/L/F)");
  os << line;
  for (const auto& r : c.rows) {
    const std::string dist = std::to_string(r.distribution[0]) + "/" + std::to_string(r.distribution[1]) + "/" +
                             std::to_string(r.distribution[2]) + "/" + std::to_string(r.distribution[3]);
    std::snprintf(line, sizeof line, "%-6s %-34s %7s %7s %8s %7s  %s\n", r.control_id.c_str(),
                  r.name.substr(0, 34).c_str(), pct(r.own).c_str(), pct(r.peer_average).c_str(),
                  pct(r.delta).c_str(), pct(r.weight).c_str(), dist.c_str());
    os << line;
  }
  for (const auto& cav : f.caveats) os << "note: " << cav << "\n";
  return os.str();
}

inline std::string comparison_csv(const PostureComparison& c) {
  std::string out = "control_id,own,peer_average,delta,weight,not,partial,largely,fully\n";
  for (const auto& r : c.rows)
    out += r.control_id + "," + format_double(r.own) + "," + format_double(r.peer_average) + "," +
           format_double(r.delta) + "," + format_double(r.weight) + "," + std::to_string(r.distribution[0]) + "," +
           std::to_string(r.distribution[1]) + "," + std::to_string(r.distribution[2]) + "," +
           std::to_string(r.distribution[3]) + "\n";
  return out;
}

}  // namespace riskbench
