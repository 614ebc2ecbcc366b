#include <gtest/gtest.h>

#include <thread>

#include "riskbench/http_server.hpp"
#include "test_support.hpp"

using namespace riskbench;

namespace {

Service make_service() {
  auto report = testing_support::isao_report();
  FitOptions opts;
  opts.k_override = kIsaoGapConstant;
  auto model = build_model(report, opts);
  auto baseline = make_baseline(report, 2.5);
  return Service(std::move(report), std::move(model), std::move(baseline),
                 sample_losses(MixtureSpec::isao_default(), kDefaultDraws, 20230630));
}

std::string peer_average_body() { return testing_support::slurp(testing_support::data_dir() + "/own/peer_average.json"); }

}  // namespace

TEST(Service, Baseline) {
  const auto s = make_service();
  const auto r = s.handle("GET", "/v1/baseline", "", "");
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.body.at("R_peers_usd"), "9280.00");
  EXPECT_EQ(r.body.at("L_usd"), "145000.00");
}

TEST(Service, ModelCarriesNamesAndWeights) {
  const auto r = make_service().get_model();
  ASSERT_EQ(r.body.at("controls").size(), 22u);
  EXPECT_EQ(r.body.at("controls")[0].at("id"), "1a");
  EXPECT_FALSE(r.body.at("controls")[0].at("name").get<std::string>().empty());
  EXPECT_EQ(r.body.at("k").get<double>(), kIsaoGapConstant);
}

TEST(Service, LecDefaultAndCustomThresholds) {
  const auto s = make_service();
  const auto all = s.get_lec("");
  EXPECT_EQ(all.body.at("rows").size(), default_lec_thresholds().size());
  EXPECT_EQ(all.body.at("n"), kDefaultDraws);
  const auto custom = s.get_lec("1000000,500000");
  ASSERT_EQ(custom.body.at("rows").size(), 2u);
  EXPECT_EQ(custom.body.at("rows")[0].at("threshold_usd"), "500000.00");
  EXPECT_NEAR(custom.body.at("rows")[0].at("exceedance_prob").get<double>(), 0.1084, 0.015);
  EXPECT_EQ(s.get_lec("abc").status, 400);
}

TEST(Service, ForecastAtPeerAverage) {
  const auto r = make_service().post_forecast(peer_average_body());
  ASSERT_EQ(r.status, 200) << r.body.dump();
  EXPECT_EQ(r.body.at("annual_risk_usd"), "9280.00");
  EXPECT_EQ(r.body.at("incident_size_usd"), "145000.00");
  EXPECT_NEAR(r.body.at("G").get<double>(), 1.0, 1e-12);
  EXPECT_EQ(r.body.at("comparison").at("controls").size(), 22u);
}

TEST(Service, ForecastBelowAverage) {
  const auto body = testing_support::slurp(testing_support::data_dir() + "/own/below_30pct.json");
  const auto r = make_service().post_forecast(body);
  ASSERT_EQ(r.status, 200);
  EXPECT_NEAR(r.body.at("deviation").get<double>(), -0.30, 1e-12);
  EXPECT_NEAR(r.body.at("G").get<double>(), std::exp(4.796 * 0.30), 1e-9);
}

TEST(Service, LecAtOneMillion) {
  const auto r = make_service().get_lec("1000000");
  EXPECT_NEAR(r.body.at("rows")[0].at("exceedance_prob").get<double>(), 0.008, 0.004);
}

TEST(Service, ForecastEqualsLibrary) {
  const auto s = make_service();
  const auto body = testing_support::slurp(testing_support::data_dir() + "/own/example_firm.json");
  const auto r = s.post_forecast(body);
  ASSERT_EQ(r.status, 200);
  const auto own = own_posture_from_json(json::parse(body), s.catalog());
  const auto f = firm_forecast(own, s.model(), s.baseline());
  EXPECT_EQ(r.body.at("annual_risk_usd"), format_usd(f.annual_risk));
  EXPECT_EQ(r.body.at("incident_size_usd"), format_usd(f.incident_size));
  EXPECT_EQ(r.body.at("G").get<double>(), f.gap);
  EXPECT_EQ(r.body.at("deviation").get<double>(), f.deviation);
}

TEST(Service, BadRequests) {
  const auto s = make_service();
  EXPECT_EQ(s.post_forecast("not json").status, 400);
  EXPECT_EQ(s.post_forecast("[1,2]").status, 400);
  const auto missing = s.post_forecast(R"({"maturities":{"1a":1.0}})");
  EXPECT_EQ(missing.status, 400);
  EXPECT_EQ(missing.body.at("error"), "MissingControl");
  EXPECT_EQ(s.handle("GET", "/v1/nothing", "", "").status, 404);
  EXPECT_EQ(s.handle("DELETE", "/v1/model", "", "").status, 404);
}

TEST(Service, WhatIfTopWeightedImprovementLowersRisk) {
  const auto s = make_service();
  auto req = json::parse(peer_average_body());
  req["changes"] = {{{"control", "5a"}, {"step", 1}}, {{"control", "7c"}, {"step", 1}}, {{"control", "7c"}, {"level", "not_implemented"}}};
  const auto r = s.post_whatif(req.dump());
  ASSERT_EQ(r.status, 200) << r.body.dump();
  const auto base = parse_usd(r.body.at("base").at("annual_risk_usd").get<std::string>());
  const auto top = parse_usd(r.body.at("variants")[0].at("forecast").at("annual_risk_usd").get<std::string>());
  const auto small = parse_usd(r.body.at("variants")[1].at("forecast").at("annual_risk_usd").get<std::string>());
  const auto worse = parse_usd(r.body.at("variants")[2].at("forecast").at("annual_risk_usd").get<std::string>());
  EXPECT_LT(top, base);
  EXPECT_LT(top, small);
  EXPECT_LE(small, base);
  EXPECT_GT(worse, base);
}

TEST(Service, WhatIfRejectsBadChanges) {
  const auto s = make_service();
  auto req = json::parse(peer_average_body());
  req["changes"] = {{{"control", "zz"}, {"step", 1}}};
  EXPECT_EQ(s.post_whatif(req.dump()).status, 400);
  req["changes"] = {{{"control", "5a"}}};
  EXPECT_EQ(s.post_whatif(req.dump()).status, 400);
  req["changes"] = {{{"control", "5a"}, {"level", 3}}};
  EXPECT_EQ(s.post_whatif(req.dump()).status, 400);
  req["changes"] = "all";
  EXPECT_EQ(s.post_whatif(req.dump()).status, 400);
}

TEST(Service, RejectsMismatchedModel) {
  auto report = testing_support::isao_report();
  auto model = build_model(report, {});
  model.weights.control_ids.pop_back();
  EXPECT_THROW(Service(report, model, make_baseline(report, 2.5),
                       sample_losses(MixtureSpec::isao_default(), 10, 1)),
               Error);
}

TEST(Http, RoutesOverLoopback) {
  const auto service = make_service();
  httplib::Server server;
  bind_routes(server, service);
  const int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread worker([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  httplib::Client client("127.0.0.1", port);
  auto baseline = client.Get("/v1/baseline");
  ASSERT_TRUE(baseline);
  EXPECT_EQ(baseline->status, 200);
  EXPECT_EQ(json::parse(baseline->body).at("R_peers_usd"), "9280.00");

  auto lec = client.Get("/v1/lec?thresholds=10000,500000");
  ASSERT_TRUE(lec);
  EXPECT_EQ(json::parse(lec->body).at("rows").size(), 2u);

  auto model = client.Get("/v1/model");
  ASSERT_TRUE(model);
  EXPECT_EQ(model->status, 200);

  auto forecast = client.Post("/v1/forecast", peer_average_body(), "application/json");
  ASSERT_TRUE(forecast);
  EXPECT_EQ(forecast->status, 200);
  EXPECT_EQ(json::parse(forecast->body).at("annual_risk_usd"), "9280.00");

  auto whatif = client.Post("/v1/whatif", peer_average_body(), "application/json");
  ASSERT_TRUE(whatif);
  EXPECT_EQ(whatif->status, 200);

  auto bad = client.Post("/v1/forecast", "{", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);

  auto missing = client.Get("/v1/unknown");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);
  EXPECT_EQ(json::parse(missing->body).at("error"), "NotFound");

  server.stop();
  worker.join();
}
