#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace riskbench;

namespace {

const ControlCatalog& catalog() { return ControlCatalog::default_catalog(); }

}  // namespace

TEST(UsdJson, AcceptedForms) {
  EXPECT_EQ(usd_from_json(json("310000.00")), Cents{31'000'000});
  EXPECT_EQ(usd_from_json(json(1234)), Cents{123'400});
  EXPECT_EQ(usd_from_json(json(12.34)), Cents{1'234});
  EXPECT_THROW(usd_from_json(json(true)), Error);
  EXPECT_THROW(usd_from_json(json("12.345")), Error);
  EXPECT_EQ(checksum_hex(0xABu), "000000ab");
}

TEST(SubmissionJson, RoundTripPreservesChecksum) {
  for (const auto& sub : testing_support::load_isao_submissions()) {
    const auto back = submission_from_json(submission_to_json(sub));
    EXPECT_EQ(back.participant_id, sub.participant_id);
    EXPECT_EQ(back.maturities, sub.maturities);
    EXPECT_EQ(back.checksum, sub.checksum);
    EXPECT_EQ(canonical_bytes(back), canonical_bytes(sub));
    EXPECT_TRUE(validate_submission(back, catalog()).ok());
  }
}

TEST(SubmissionJson, RejectsMalformedDocuments) {
  auto j = submission_to_json(testing_support::uniform_submission("x", MaturityLevel::FullyImplemented));
  auto bad_level = j;
  bad_level["maturities"]["1a"] = "mostly";
  EXPECT_THROW(submission_from_json(bad_level), Error);
  auto bad_checksum = j;
  bad_checksum["checksum"] = "xyz";
  EXPECT_THROW(submission_from_json(bad_checksum), Error);
  auto too_long = j;
  too_long["checksum"] = "123456789";
  EXPECT_THROW(submission_from_json(too_long), Error);
  auto missing = j;
  missing.erase("participant_id");
  try {
    submission_from_json(missing);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidSchema);
  }
}

TEST(OwnPosture, NamesAndFractions) {
  json mats = json::object();
  for (const auto& c : catalog().controls()) mats[c.id] = "largely_implemented";
  mats["1a"] = 0.5;
  const auto own = own_posture_from_json({{"maturities", mats}}, catalog());
  ASSERT_EQ(own.size(), 22u);
  EXPECT_DOUBLE_EQ(own[0], 0.5);
  EXPECT_DOUBLE_EQ(own[1], 2.0 / 3.0);
  // Bare object without the wrapper.
  EXPECT_EQ(own_posture_from_json(mats, catalog()), own);
}

TEST(OwnPosture, ErrorsNameTheControl) {
  json mats = json::object();
  for (const auto& c : catalog().controls()) mats[c.id] = 1.0;
  mats.erase("7c");
  try {
    own_posture_from_json(mats, catalog());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingControl);
    EXPECT_NE(std::string(e.what()).find("7c"), std::string::npos);
  }
  mats["7c"] = 1.5;
  EXPECT_THROW(own_posture_from_json(mats, catalog()), Error);
  mats["7c"] = 1.0;
  mats["11z"] = 1.0;
  try {
    own_posture_from_json(mats, catalog());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownControl);
  }
}

TEST(OwnPosture, FixtureFiles) {
  const auto r = testing_support::isao_report();
  const auto peer = own_posture_from_json(read_json_file(testing_support::data_dir() + "/own/peer_average.json"), catalog());
  const auto below = own_posture_from_json(read_json_file(testing_support::data_dir() + "/own/below_30pct.json"), catalog());
  for (std::size_t i = 0; i < 22; ++i) {
    EXPECT_NEAR(peer[i], r.controls[i].avg_maturity, 1e-12);
    EXPECT_NEAR(below[i], 0.7 * r.controls[i].avg_maturity, 1e-12);
  }
}

TEST(CatalogJson, RoundTrip) {
  const auto back = catalog_from_json(catalog_to_json(catalog()));
  ASSERT_EQ(back.size(), catalog().size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].id, catalog()[i].id);
    EXPECT_EQ(back[i].name, catalog()[i].name);
  }
}

TEST(ReportJson, RoundTripIsByteStable) {
  const auto r = testing_support::isao_report();
  const auto text = report_to_json(r).dump(2);
  const auto back = report_from_json(json::parse(text));
  EXPECT_EQ(report_to_json(back).dump(2), text);
  EXPECT_EQ(back.total_loss, r.total_loss);
  EXPECT_EQ(back.group_averages(), r.group_averages());
}

TEST(ReportJson, RejectsMalformed) {
  auto j = report_to_json(testing_support::isao_report());
  j.erase("controls");
  EXPECT_THROW(report_from_json(j), Error);
  EXPECT_THROW(report_from_json(json::object()), Error);
}

TEST(ModelJson, RoundTripReproducesForecasts) {
  const auto r = testing_support::isao_report();
  const auto m = build_model(r, {});
  const auto back = model_from_json(json::parse(model_to_json(m).dump()));
  EXPECT_EQ(model_to_json(back).dump(), model_to_json(m).dump());
  const auto b = make_baseline(r, 2.5);
  auto own = r.group_averages();
  for (std::size_t i = 0; i < own.size(); i += 2) own[i] *= 0.8;
  EXPECT_EQ(firm_forecast(own, back, b).annual_risk, firm_forecast(own, m, b).annual_risk);
  EXPECT_EQ(model_catalog(back).size(), 22u);
}

TEST(ModelJson, RejectsMalformed) {
  auto j = model_to_json(build_model(testing_support::isao_report(), {}));
  auto bad_bounds = j;
  bad_bounds["deviation_bounds"] = {0.3, -0.3};
  EXPECT_THROW(model_from_json(bad_bounds), Error);
  auto no_k = j;
  no_k.erase("k");
  EXPECT_THROW(model_from_json(no_k), Error);
}

TEST(BaselineJson, FieldsAndRoundTrip) {
  const auto b = make_baseline(testing_support::isao_report(), 2.5);
  const auto j = baseline_to_json(b);
  EXPECT_EQ(j.at("P").get<double>(), 0.064);
  EXPECT_EQ(j.at("L_usd"), "145000.00");
  EXPECT_EQ(j.at("R_peers_usd"), "9280.00");
  const auto back = baseline_from_json(j);
  EXPECT_EQ(back.annual_risk, b.annual_risk);
  EXPECT_EQ(back.average_loss, b.average_loss);
  auto neg = j;
  neg["P"] = -1.0;
  EXPECT_THROW(baseline_from_json(neg), Error);
}

TEST(Renderers, CsvHeadersAndRows) {
  const auto r = testing_support::isao_report();
  FitOptions opts;
  opts.k_override = kIsaoGapConstant;
  const auto m = build_model(r, opts);
  const auto b = make_baseline(r, 2.5);
  const std::vector<double> grid = {-0.35, 0.0, 0.35};
  const auto csv = risk_curve_csv(risk_curve_table(m, b, grid));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "deviation,annual_risk_usd,incident_size_usd");
  EXPECT_NE(csv.find("\n0.0000,9280.00,145000.00\n"), std::string::npos);

  const auto lec = lec_csv({{Cents::from_dollars(500'000), 0.1084}});
  EXPECT_EQ(lec, "threshold_usd,exceedance_prob\n500000.00,0.108400\n");

  const auto hist = histogram_csv({{Cents{0}, 3}}, kDefaultBinWidth);
  EXPECT_EQ(hist, "bin_lower_usd,bin_upper_usd,count\n0.00,25000.00,3\n");
}

TEST(Renderers, WeightTableListsLargestFirst) {
  const auto r = testing_support::isao_report();
  const auto text = weights_table_text(r, build_model(r, {}));
  const auto first_row = text.substr(text.find('\n') + 1, text.find('\n', text.find('\n') + 1) - text.find('\n') - 1);
  EXPECT_EQ(first_row.rfind("5a.", 0), 0u) << first_row;
  EXPECT_NE(first_row.find("42.0%"), std::string::npos);
  EXPECT_NE(text.find("1.5%"), std::string::npos);
  EXPECT_NE(text.find("4.5%"), std::string::npos);
}

TEST(Config, DefaultsWhenEmpty) {
  const auto cfg = config_from_json(json::object());
  EXPECT_EQ(cfg.catalog.size(), 22u);
  EXPECT_EQ(cfg.window_years, 2.5);
  EXPECT_FALSE(cfg.fit.k_override.has_value());
  EXPECT_EQ(cfg.draws, kDefaultDraws);
}

TEST(Config, ShippedIsaoConfig) {
  const auto cfg = load_config(testing_support::data_dir() + "/config/isao.json");
  ASSERT_TRUE(cfg.fit.k_override.has_value());
  EXPECT_EQ(*cfg.fit.k_override, kIsaoGapConstant);
  EXPECT_EQ(cfg.mixture.components.size(), 2u);
  EXPECT_EQ(cfg.mixture.components[1].std_dev, Cents::from_dollars(300'000));
  EXPECT_EQ(cfg.workers, 4u);
  EXPECT_EQ(cfg.fit.anchors.size(), 2u);
}

TEST(Config, RejectsBadValues) {
  EXPECT_THROW(config_from_json({{"loss_group_weight", 1.2}}), Error);
  EXPECT_THROW(config_from_json({{"window_years", 0}}), Error);
  EXPECT_THROW(config_from_json({{"aggregators", 1}}), Error);
  EXPECT_THROW(config_from_json({{"band_mode", "sometimes"}}), Error);
  EXPECT_THROW(config_from_json({{"version", 9}}), Error);
  EXPECT_THROW(config_from_json({{"catalog", "does/not/exist.json"}}), Error);
  EXPECT_THROW(config_from_json({{"simulation", {{"components", {{{"mean_usd", 1}, {"sd_usd", 1}, {"prob", 0.4}}}}}}}),
               Error);
  EXPECT_THROW(config_from_json({{"window_years", "long"}}), Error);
}

TEST(Config, PerIncidentBandMode) {
  const auto cfg = config_from_json({{"band_mode", "per_incident"}, {"share_seed", 5}});
  EXPECT_EQ(cfg.band_mode, BandFlagMode::PerIncident);
  EXPECT_EQ(cfg.share_seed, 5u);
}
