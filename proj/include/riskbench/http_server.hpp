#pragma once

#include <string>

#include <httplib.h>

#include "riskbench/service.hpp"

namespace riskbench {

/// Wires the /v1 routes onto an httplib server. No request logger is
/// installed: posture bodies must not reach any log.
inline void bind_routes(httplib::Server& server, const Service& service) {
  auto reply = [](httplib::Response& res, const ServiceResponse& out) {
    res.status = out.status;
    res.set_content(out.body.dump(), "application/json; charset=utf-8");
  };
  server.Get("/v1/baseline", [&service, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, service.get_baseline());
  });
  server.Get("/v1/model", [&service, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, service.get_model());
  });
  server.Get("/v1/lec", [&service, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.get_lec(req.has_param("thresholds") ? req.get_param_value("thresholds") : std::string{}));
  });
  server.Post("/v1/forecast", [&service, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.post_forecast(req.body));
  });
  server.Post("/v1/whatif", [&service, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.post_whatif(req.body));
  });
  server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.status == 404) {
      res.set_content(R"({"error":"NotFound","detail":"unknown route"})", "application/json; charset=utf-8");
    }
  });
}

}  // namespace riskbench
