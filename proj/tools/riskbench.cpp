// riskbench: sector cyber-risk benchmarking from privately aggregated peer data.
//
//   riskbench aggregate  FILES|DIRS...      -> report.json
//   riskbench fit        --report R          -> model.json, baseline.json
//   riskbench forecast   --report R --model M --baseline B --own O
//   riskbench benchmark  --report R --model M --own O
//   riskbench simulate                       -> histogram.csv, lec.csv
//   riskbench serve      --report R --model M --baseline B [--port P]
//
// Exit codes: 0 ok, 1 internal error, 2 invalid input.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "riskbench/config.hpp"
#include "riskbench/http_server.hpp"
#include "riskbench/riskbench.hpp"

namespace fs = std::filesystem;
using namespace riskbench;

namespace {

constexpr int kExitInternal = 1;
constexpr int kExitInvalid = 2;

struct GlobalOptions {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::string format = "text";
  bool out_given = false;
};

SectorConfig load_sector_config(const GlobalOptions& g) {
  SectorConfig cfg = g.config_path.empty() ? SectorConfig{} : load_config(g.config_path);
  if (g.seed) cfg.seed = *g.seed;
  return cfg;
}

std::string out_path(const GlobalOptions& g, const std::string& name) {
  fs::create_directories(g.out_dir);
  return (fs::path(g.out_dir) / name).string();
}

void print_error(ErrorCode code, const std::string& detail, const std::string& file = {}) {
  json err = {{"error", std::string(to_string(code))}, {"detail", detail}};
  if (!file.empty()) err["file"] = file;
  std::cerr << err.dump() << "\n";
}

std::vector<std::string> expand_inputs(const std::vector<std::string>& inputs) {
  std::vector<std::string> files;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<std::string> found;
      for (const auto& entry : fs::directory_iterator(in))
        if (entry.is_regular_file() && entry.path().extension() == ".json") found.push_back(entry.path().string());
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else if (fs::exists(in)) {
      files.push_back(in);
    } else {
      throw Error(ErrorCode::Io, "input '" + in + "' does not exist");
    }
  }
  return files;
}

// Submission contents never reach stdout, stderr or the report: only codes,
// file names and aggregate figures are printed.
int cmd_aggregate(const GlobalOptions& g, const std::vector<std::string>& inputs) {
  const auto cfg = load_sector_config(g);
  const auto files = expand_inputs(inputs);
  std::vector<ParticipantSubmission> subs;
  for (const auto& file : files) {
    try {
      auto sub = submission_from_json(read_json_file(file));
      const auto v = validate_submission(sub, cfg.catalog, cfg.reporting_threshold);
      if (!v.ok()) {
        print_error(v.violations.front().code, v.violations.front().detail, file);
        std::cerr << "rejected " << file << "; session aborted\n";
        return kExitInvalid;
      }
      subs.push_back(std::move(sub));
    } catch (const Error& e) {
      print_error(e.code(), e.what(), file);
      std::cerr << "rejected " << file << "; session aborted\n";
      return kExitInvalid;
    }
  }

  AggregateReport report;
  if (cfg.share_seed) {
    std::mt19937_64 rng(*cfg.share_seed);
    report = aggregate_submissions(std::span<const ParticipantSubmission>(subs), cfg.catalog, cfg.bands,
                                   cfg.aggregation_options(), rng);
  } else {
    SystemEntropy rng;
    report = aggregate_submissions(std::span<const ParticipantSubmission>(subs), cfg.catalog, cfg.bands,
                                   cfg.aggregation_options(), rng);
  }
  for (const auto& c : report.caveats) std::cerr << "warning: " << c << "\n";
  const auto path = out_path(g, "report.json");
  write_text_file(path, report_to_json(report).dump(2) + "\n");
  std::cout << "aggregated " << report.participant_count << " submissions over " << cfg.aggregators
            << " aggregators (session " << report.session_id << ")\n"
            << "incidents: " << report.incident_count << ", total loss: $" << format_usd(report.total_loss)
            << ", average maturity: " << pct(report.overall_avg_maturity) << "\n"
            << "report: " << path << "\n";
  return 0;
}

int cmd_fit(const GlobalOptions& g, const std::string& report_path) {
  const auto cfg = load_sector_config(g);
  const auto report = report_from_json(read_json_file(report_path));
  const auto model = build_model(report, cfg.fit);
  const auto baseline = make_baseline(report, cfg.window_years);
  const auto model_path = out_path(g, "model.json");
  const auto baseline_path = out_path(g, "baseline.json");
  write_text_file(model_path, model_to_json(model).dump(2) + "\n");
  write_text_file(baseline_path, baseline_to_json(baseline).dump(2) + "\n");

  if (g.format == "json") {
    std::cout << json{{"model", model_to_json(model)}, {"baseline", baseline_to_json(baseline)}}.dump(2) << "\n";
    return 0;
  }
  std::cout << weights_table_text(report, model) << "\n";
  std::cout << "loss group weight: " << pct(model.weights.split.loss_group_weight)
            << (model.weights.split.equal_weighting ? " (equal weighting: no implicated controls)" : "") << "\n";
  if (model.no_loss_baseline) {
    std::cout << "no-loss baseline: fit skipped, G = 1\n";
  } else {
    std::cout << "fitted k: " << format_double(*model.k_fitted, 4) << "  (model k: " << format_double(model.k, 4)
              << ", " << model.fit_method << ")\n";
  }
  std::cout << "P = " << format_double(baseline.incident_rate, 4) << ", L = $" << format_usd(baseline.average_loss)
            << ", R_peers = $" << format_usd(baseline.annual_risk) << "\n";
  for (const auto& c : baseline.caveats) std::cout << "note: " << c << "\n";
  std::cout << "model: " << model_path << "\nbaseline: " << baseline_path << "\n";
  return 0;
}

struct ForecastInputs {
  AggregateReport report;
  GapIndexModel model;
  PeerBaseline baseline;
  std::vector<double> own;
};

ForecastInputs load_forecast_inputs(const std::string& report_path, const std::string& model_path,
                                    const std::string& baseline_path, const std::string& own_path) {
  ForecastInputs in;
  in.report = report_from_json(read_json_file(report_path));
  in.model = model_from_json(read_json_file(model_path));
  if (!baseline_path.empty()) in.baseline = baseline_from_json(read_json_file(baseline_path));
  in.own = own_posture_from_json(read_json_file(own_path), in.report.catalog());
  if (in.model.weights.size() != in.own.size())
    throw Error(ErrorCode::InvalidSchema, "model and report describe different catalogs");
  return in;
}

int cmd_forecast(const GlobalOptions& g, const std::string& report_path, const std::string& model_path,
                 const std::string& baseline_path, const std::string& own_path) {
  const auto cfg = load_sector_config(g);
  const auto in = load_forecast_inputs(report_path, model_path, baseline_path, own_path);
  const auto f = firm_forecast(in.own, in.model, in.baseline);
  const auto cmp = posture_comparison(in.own, in.report, in.model);
  json doc = forecast_to_json(f, in.baseline);
  doc["comparison"] = comparison_to_json(cmp);
  const auto grid = linear_grid(cfg.curve_min, cfg.curve_max, cfg.curve_points);
  const auto curve = risk_curve_table(in.model, in.baseline, grid);
  if (g.out_given) {
    write_text_file(out_path(g, "forecast.json"), doc.dump(2) + "\n");
    write_text_file(out_path(g, "risk_curve.csv"), risk_curve_csv(curve));
  }
  if (g.format == "json")
    std::cout << doc.dump(2) << "\n";
  else if (g.format == "csv")
    std::cout << risk_curve_csv(curve);
  else
    std::cout << forecast_text(f, in.baseline, cmp);
  return 0;
}

int cmd_benchmark(const GlobalOptions& g, const std::string& report_path, const std::string& model_path,
                  const std::string& own_path) {
  const auto in = load_forecast_inputs(report_path, model_path, {}, own_path);
  const auto cmp = posture_comparison(in.own, in.report, in.model);
  if (g.out_given) write_text_file(out_path(g, "comparison.csv"), comparison_csv(cmp));
  if (g.format == "json")
    std::cout << comparison_to_json(cmp).dump(2) << "\n";
  else if (g.format == "csv")
    std::cout << comparison_csv(cmp);
  else
    std::cout << cmp.summary << "\n" << comparison_csv(cmp);
  return 0;
}

int cmd_simulate(const GlobalOptions& g, bool write_samples) {
  const auto cfg = load_sector_config(g);
  const auto sim = sample_losses(cfg.mixture, cfg.draws, cfg.seed, cfg.workers);
  const auto bins = histogram(sim, cfg.bin_width);
  const auto curve = lec_from_samples(sim);
  const auto rows = lec_query(curve, default_lec_thresholds());
  write_text_file(out_path(g, "histogram.csv"), histogram_csv(bins, cfg.bin_width));
  write_text_file(out_path(g, "lec.csv"), lec_csv(rows));
  if (write_samples) write_text_file(out_path(g, "samples.csv"), samples_csv(sim));
  const std::vector<Cents> headline = {Cents::from_dollars(10'000), Cents::from_dollars(500'000),
                                       Cents::from_dollars(1'000'000)};
  if (g.format == "json") {
    json out = json::array();
    for (const auto& r : lec_query(curve, headline))
      out.push_back({{"threshold_usd", format_usd(r.threshold)}, {"exceedance_prob", r.probability}});
    std::cout << json{{"n", sim.samples.size()}, {"seed", sim.seed}, {"headline", out}}.dump(2) << "\n";
  } else {
    std::cout << "simulated " << sim.samples.size() << " losses (seed " << sim.seed << ")\n";
    for (const auto& r : lec_query(curve, headline))
      std::cout << "P(loss > $" << format_usd(r.threshold) << ") = " << format_double(r.probability, 4) << "\n";
    std::cout << "histogram: " << out_path(g, "histogram.csv") << "\nlec: " << out_path(g, "lec.csv") << "\n";
  }
  return 0;
}

int cmd_serve(const GlobalOptions& g, const std::string& report_path, const std::string& model_path,
              const std::string& baseline_path, const std::string& bind, int port, const std::string& static_dir) {
  const auto cfg = load_sector_config(g);
  auto report = report_from_json(read_json_file(report_path));
  auto model = model_from_json(read_json_file(model_path));
  auto baseline = baseline_from_json(read_json_file(baseline_path));
  const Service service(std::move(report), std::move(model), std::move(baseline),
                        sample_losses(cfg.mixture, cfg.draws, cfg.seed, cfg.workers));
  httplib::Server server;
  bind_routes(server, service);
  if (!static_dir.empty() && !server.set_mount_point("/", static_dir))
    throw Error(ErrorCode::Io, "static directory '" + static_dir + "' does not exist");
  std::cout << "serving /v1 on http://" << bind << ":" << port << std::endl;
  if (!server.listen(bind, port)) throw Error(ErrorCode::Io, "cannot listen on " + bind + ":" + std::to_string(port));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sector cyber-risk benchmarking over privately aggregated peer data"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--config", g.config_path, "Sector config JSON")->check(CLI::ExistingFile);
  app.add_option("--out", g.out_dir, "Output directory");
  app.add_option("--seed", g.seed, "Simulation seed (overrides config)");
  app.add_option("--format", g.format, "Console output format")->check(CLI::IsMember({"json", "text", "csv"}));

  std::vector<std::string> inputs;
  auto* aggregate = app.add_subcommand("aggregate", "Aggregate submission files into a peer report");
  aggregate->add_option("inputs", inputs, "Submission files or directories")->required();

  std::string report_path, model_path, baseline_path, own_path, static_dir;
  std::string bind = "127.0.0.1";
  int port = 8080;
  bool write_samples = false;

  auto* fit = app.add_subcommand("fit", "Fit control weights and the gap index model");
  fit->add_option("--report", report_path, "Aggregate report JSON")->required()->check(CLI::ExistingFile);

  auto* forecast = app.add_subcommand("forecast", "Private risk forecast for one firm");
  forecast->add_option("--report", report_path)->required()->check(CLI::ExistingFile);
  forecast->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  forecast->add_option("--baseline", baseline_path)->required()->check(CLI::ExistingFile);
  forecast->add_option("--own", own_path, "Own posture JSON")->required()->check(CLI::ExistingFile);

  auto* benchmark = app.add_subcommand("benchmark", "Posture comparison against the peer group");
  benchmark->add_option("--report", report_path)->required()->check(CLI::ExistingFile);
  benchmark->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  benchmark->add_option("--own", own_path)->required()->check(CLI::ExistingFile);

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo loss simulation and exceedance curve");
  simulate->add_flag("--samples", write_samples, "Also write samples.csv");

  auto* serve = app.add_subcommand("serve", "Local read-only HTTP API");
  serve->add_option("--report", report_path)->required()->check(CLI::ExistingFile);
  serve->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  serve->add_option("--baseline", baseline_path)->required()->check(CLI::ExistingFile);
  serve->add_option("--bind", bind, "Bind address");
  serve->add_option("--port", port, "Port");
  serve->add_option("--static", static_dir, "Serve a static dashboard bundle from this directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitInvalid;
  }
  g.out_given = app.get_option("--out")->count() > 0;

  try {
    if (*aggregate) return cmd_aggregate(g, inputs);
    if (*fit) return cmd_fit(g, report_path);
    if (*forecast) return cmd_forecast(g, report_path, model_path, baseline_path, own_path);
    if (*benchmark) return cmd_benchmark(g, report_path, model_path, own_path);
    if (*simulate) return cmd_simulate(g, write_samples);
    if (*serve) return cmd_serve(g, report_path, model_path, baseline_path, bind, port, static_dir);
  } catch (const Error& e) {
    print_error(e.code(), e.what());
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "Internal"}, {"detail", e.what()}}.dump() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
