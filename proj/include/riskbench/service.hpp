#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "riskbench/aggregation.hpp"
#include "riskbench/error.hpp"
#include "riskbench/forecast.hpp"
#include "riskbench/gap_index.hpp"
#include "riskbench/json_io.hpp"
#include "riskbench/monte_carlo.hpp"

namespace riskbench {

struct ServiceResponse {
  int status = 200;
  json body;
};

/// Read-only /v1 API over immutable sector state. Request bodies are only
/// read, never stored or logged.
class Service {
 public:
  Service(AggregateReport report, GapIndexModel model, PeerBaseline baseline, SimulationResult simulation)
      : report_(std::move(report)),
        model_(std::move(model)),
        baseline_(std::move(baseline)),
        catalog_(report_.catalog()),
        seed_(simulation.seed),
        curve_(simulation.samples) {
    if (model_.weights.control_ids.size() != catalog_.size())
      throw Error(ErrorCode::InvalidSchema, "model and report describe different catalogs");
    for (std::size_t i = 0; i < catalog_.size(); ++i)
      if (model_.weights.control_ids[i] != catalog_[i].id)
        throw Error(ErrorCode::InvalidSchema, "model and report control order differs");
  }

  const GapIndexModel& model() const { return model_; }
  const PeerBaseline& baseline() const { return baseline_; }
  const ControlCatalog& catalog() const { return catalog_; }

  ServiceResponse get_baseline() const { return {200, baseline_to_json(baseline_)}; }

  ServiceResponse get_model() const {
    json m = model_to_json(model_);
    for (std::size_t i = 0; i < catalog_.size(); ++i) m["controls"][i]["name"] = catalog_[i].name;
    return {200, m};
  }

  /// `thresholds` is a comma-separated list of USD amounts; empty means the default ladder.
  ServiceResponse get_lec(const std::string& thresholds) const {
    std::vector<Cents> values;
    if (thresholds.empty()) {
      values = default_lec_thresholds();
    } else {
      std::stringstream ss(thresholds);
      std::string item;
      while (std::getline(ss, item, ',')) {
        try {
          values.push_back(parse_usd(item));
        } catch (const Error&) {
          return bad_request("invalid threshold '" + item + "'");
        }
      }
    }
    json rows = json::array();
    for (const auto& r : lec_query(curve_, values))
      rows.push_back({{"threshold_usd", format_usd(r.threshold)}, {"exceedance_prob", r.probability}});
    return {200, {{"n", curve_.size()}, {"seed", seed_}, {"rows", rows}}};
  }

  ServiceResponse post_forecast(const std::string& body) const {
    try {
      const auto own = own_posture_from_json(parse_body(body), catalog_);
      return {200, forecast_payload(own)};
    } catch (const Error& e) {
      return bad_request(e);
    }
  }

  /// Body: {"maturities": {...}, "changes": [{"control": id, "level": name|fraction} or
  /// {"control": id, "step": +-levels}]}. Each change is evaluated as its own variant.
  ServiceResponse post_whatif(const std::string& body) const {
    try {
      const json req = parse_body(body);
      const auto base = own_posture_from_json(req, catalog_);
      const auto base_forecast = firm_forecast(base, model_, baseline_);
      json variants = json::array();
      if (req.contains("changes")) {
        if (!req.at("changes").is_array()) throw Error(ErrorCode::InvalidSchema, "changes must be an array");
        for (const auto& change : req.at("changes")) {
          const auto id = detail::get_as<std::string>(change, "control");
          const std::size_t idx = catalog_.require_index(id);
          auto variant = base;
          variant[idx] = apply_change(base[idx], change);
          const auto f = firm_forecast(variant, model_, baseline_);
          variants.push_back({{"control", id},
                              {"from", base[idx]},
                              {"to", variant[idx]},
                              {"weight", model_.weights.weights[idx]},
                              {"forecast", forecast_to_json(f, baseline_)},
                              {"annual_risk_delta_usd", format_usd(f.annual_risk - base_forecast.annual_risk)}});
        }
      }
      return {200, {{"base", forecast_to_json(base_forecast, baseline_)}, {"variants", variants}}};
    } catch (const Error& e) {
      return bad_request(e);
    }
  }

  /// Method/path dispatch shared by the HTTP binding and tests.
  ServiceResponse handle(const std::string& method, const std::string& path, const std::string& query_thresholds,
                         const std::string& body) const {
    if (method == "GET" && path == "/v1/baseline") return get_baseline();
    if (method == "GET" && path == "/v1/model") return get_model();
    if (method == "GET" && path == "/v1/lec") return get_lec(query_thresholds);
    if (method == "POST" && path == "/v1/forecast") return post_forecast(body);
    if (method == "POST" && path == "/v1/whatif") return post_whatif(body);
    return {404, {{"error", "NotFound"}, {"detail", "unknown route"}}};
  }

  json forecast_payload(const std::vector<double>& own) const {
    const auto f = firm_forecast(own, model_, baseline_);
    json out = forecast_to_json(f, baseline_);
    out["comparison"] = comparison_to_json(posture_comparison(own, report_, model_));
    return out;
  }

 private:
  static json parse_body(const std::string& body) {
    try {
      json j = json::parse(body);
      if (!j.is_object()) throw Error(ErrorCode::InvalidSchema, "request body must be a JSON object");
      return j;
    } catch (const json::parse_error&) {
      throw Error(ErrorCode::InvalidSchema, "request body is not valid JSON");
    }
  }

  static double apply_change(double current, const json& change) {
    if (change.contains("level")) {
      const auto& v = change.at("level");
      if (v.is_string()) {
        const auto level = parse_level(v.get<std::string>());
        if (!level) throw Error(ErrorCode::InvalidSchema, "invalid maturity level in change");
        return fraction(*level);
      }
      if (v.is_number()) {
        const double f = v.get<double>();
        if (!(f >= 0.0 && f <= 1.0)) throw Error(ErrorCode::InvalidSchema, "change level must lie in [0,1]");
        return f;
      }
      throw Error(ErrorCode::InvalidSchema, "change level must be a name or number");
    }
    if (change.contains("step")) {
      if (!change.at("step").is_number_integer()) throw Error(ErrorCode::InvalidSchema, "step must be an integer");
      const double stepped = current + static_cast<double>(change.at("step").get<int>()) / kMaturityScale;
      return std::clamp(stepped, 0.0, 1.0);
    }
    throw Error(ErrorCode::InvalidSchema, "change needs 'level' or 'step'");
  }

  static ServiceResponse bad_request(const Error& e) {
    return {400, {{"error", std::string(to_string(e.code()))}, {"detail", e.what()}}};
  }
  static ServiceResponse bad_request(const std::string& detail) {
    return {400, {{"error", "InvalidSchema"}, {"detail", detail}}};
  }

  AggregateReport report_;
  GapIndexModel model_;
  PeerBaseline baseline_;
  ControlCatalog catalog_;
  std::uint64_t seed_;
  LossExceedanceCurve curve_;
};

}  // namespace riskbench
