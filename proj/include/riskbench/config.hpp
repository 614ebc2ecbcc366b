#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "riskbench/aggregation.hpp"
#include "riskbench/catalog.hpp"
#include "riskbench/forecast.hpp"
#include "riskbench/gap_index.hpp"
#include "riskbench/json_io.hpp"
#include "riskbench/monte_carlo.hpp"

namespace riskbench {

/// Every sector parameter in one versioned document. Missing fields take the
/// ISAO defaults.
struct SectorConfig {
  ControlCatalog catalog = ControlCatalog::default_catalog();
  LossBandSchema bands = LossBandSchema::default_schema();
  BandFlagMode band_mode = BandFlagMode::PerFirm;
  Cents reporting_threshold = kDefaultReportingThreshold;
  double window_years = kDefaultWindowYears;
  FitOptions fit;
  MixtureSpec mixture = MixtureSpec::isao_default();
  std::size_t draws = kDefaultDraws;
  std::size_t workers = 1;
  Cents bin_width = kDefaultBinWidth;
  std::uint64_t seed = 20230630;
  std::optional<std::uint64_t> share_seed;  // absent: system entropy
  std::size_t aggregators = 3;
  std::size_t min_participants = 3;
  double curve_min = -0.35;
  double curve_max = 0.35;
  std::size_t curve_points = 15;

  AggregationOptions aggregation_options() const {
    return {aggregators, min_participants, band_mode, reporting_threshold};
  }
};

inline SectorConfig config_from_json(const json& j, const std::filesystem::path& base_dir = {}) {
  SectorConfig cfg;
  try {
    if (j.contains("version") && j.at("version").get<int>() != kFormatVersion)
      throw Error(ErrorCode::InvalidSchema, "unsupported config version");
    if (j.contains("catalog")) {
      const auto& c = j.at("catalog");
      if (c.is_string()) {
        std::filesystem::path p = c.get<std::string>();
        if (p.is_relative()) p = base_dir / p;
        if (!std::filesystem::exists(p))
          throw Error(ErrorCode::Io, "catalog file '" + p.string() + "' does not exist");
        cfg.catalog = catalog_from_json(read_json_file(p.string()));
      } else {
        cfg.catalog = catalog_from_json(c);
      }
    }
    if (j.contains("bands_usd")) cfg.bands = bands_from_json(j.at("bands_usd"));
    if (j.contains("band_mode")) {
      const auto mode = j.at("band_mode").get<std::string>();
      if (mode == "per_firm") cfg.band_mode = BandFlagMode::PerFirm;
      else if (mode == "per_incident") cfg.band_mode = BandFlagMode::PerIncident;
      else throw Error(ErrorCode::InvalidSchema, "band_mode must be per_firm or per_incident");
    }
    if (j.contains("reporting_threshold_usd")) cfg.reporting_threshold = usd_from_json(j.at("reporting_threshold_usd"));
    cfg.window_years = j.value("window_years", cfg.window_years);
    cfg.fit.requested_split = j.value("loss_group_weight", cfg.fit.requested_split);
    if (j.contains("anchors")) {
      cfg.fit.anchors.clear();
      for (const auto& a : j.at("anchors"))
        cfg.fit.anchors.push_back({detail::get_as<double>(a, "deviation"), usd_from_json(detail::field(a, "loss_usd"))});
    }
    if (j.contains("gap_constant") && !j.at("gap_constant").is_null())
      cfg.fit.k_override = j.at("gap_constant").get<double>();
    cfg.fit.deviation_bound = j.value("deviation_bound", cfg.fit.deviation_bound);
    cfg.fit.ratio_cap = j.value("ratio_cap", cfg.fit.ratio_cap);
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("share_seed") && !j.at("share_seed").is_null())
      cfg.share_seed = j.at("share_seed").get<std::uint64_t>();
    cfg.aggregators = j.value("aggregators", cfg.aggregators);
    cfg.min_participants = j.value("min_participants", cfg.min_participants);
    if (j.contains("simulation")) {
      const auto& s = j.at("simulation");
      if (s.contains("components")) {
        cfg.mixture.components.clear();
        for (const auto& c : s.at("components"))
          cfg.mixture.components.push_back({usd_from_json(detail::field(c, "mean_usd")),
                                            usd_from_json(detail::field(c, "sd_usd")),
                                            detail::get_as<double>(c, "prob")});
      }
      cfg.draws = s.value("n", cfg.draws);
      cfg.workers = s.value("workers", cfg.workers);
      if (s.contains("seed")) cfg.seed = s.at("seed").get<std::uint64_t>();
      if (s.contains("bin_width_usd")) cfg.bin_width = usd_from_json(s.at("bin_width_usd"));
    }
    if (j.contains("curve")) {
      const auto& c = j.at("curve");
      cfg.curve_min = c.value("min", cfg.curve_min);
      cfg.curve_max = c.value("max", cfg.curve_max);
      cfg.curve_points = c.value("points", cfg.curve_points);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidSchema, std::string("malformed config: ") + e.what());
  }

  if (!(cfg.window_years > 0.0)) throw Error(ErrorCode::InvalidSchema, "window_years must be positive");
  if (!(cfg.fit.requested_split > 0.0 && cfg.fit.requested_split < 1.0))
    throw Error(ErrorCode::InvalidSchema, "loss_group_weight must lie in (0,1)");
  if (!(cfg.fit.deviation_bound > 0.0)) throw Error(ErrorCode::InvalidSchema, "deviation_bound must be positive");
  if (!(cfg.fit.ratio_cap >= 1.0)) throw Error(ErrorCode::InvalidSchema, "ratio_cap must be >= 1");
  if (cfg.aggregators < 2 || cfg.aggregators > 255)
    throw Error(ErrorCode::InvalidSchema, "aggregators must lie in [2,255]");
  if (cfg.min_participants < 1) throw Error(ErrorCode::InvalidSchema, "min_participants must be >= 1");
  if (cfg.draws < 1) throw Error(ErrorCode::InvalidSchema, "simulation n must be >= 1");
  if (!(cfg.bin_width > Cents{0})) throw Error(ErrorCode::InvalidSchema, "bin width must be positive");
  if (cfg.curve_points < 1 || !(cfg.curve_min < cfg.curve_max))
    throw Error(ErrorCode::InvalidSchema, "curve range is empty");
  cfg.mixture.check();
  return cfg;
}

inline SectorConfig load_config(const std::string& path) {
  return config_from_json(read_json_file(path), std::filesystem::path(path).parent_path());
}

}  // namespace riskbench
