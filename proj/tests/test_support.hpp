#pragma once

// Shared fixtures and independent oracles for the test suites. Nothing here
// calls into the code path it is used to check.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "riskbench/riskbench.hpp"

namespace testing_support {

namespace fs = std::filesystem;

inline std::string data_dir() { return RISKBENCH_DATA_DIR; }
inline std::string cli_path() { return RISKBENCH_CLI; }
inline std::string isao_dir() { return data_dir() + "/isao"; }

inline std::vector<riskbench::ParticipantSubmission> load_isao_submissions() {
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(isao_dir()))
    if (e.path().extension() == ".json") files.push_back(e.path().string());
  std::sort(files.begin(), files.end());
  std::vector<riskbench::ParticipantSubmission> subs;
  for (const auto& f : files) subs.push_back(riskbench::submission_from_json(riskbench::read_json_file(f)));
  return subs;
}

inline riskbench::AggregateReport isao_report(std::uint64_t share_seed = 7) {
  const auto subs = load_isao_submissions();
  std::mt19937_64 rng(share_seed);
  return riskbench::aggregate_submissions(std::span<const riskbench::ParticipantSubmission>(subs),
                                          riskbench::ControlCatalog::default_catalog(),
                                          riskbench::LossBandSchema::default_schema(), {}, rng);
}

/// Submission with every control at `level`, checksum filled in.
inline riskbench::ParticipantSubmission uniform_submission(const std::string& id, riskbench::MaturityLevel level,
                                                           std::vector<riskbench::IncidentRecord> incidents = {}) {
  riskbench::ParticipantSubmission sub;
  sub.participant_id = id;
  for (const auto& c : riskbench::ControlCatalog::default_catalog().controls()) sub.maturities[c.id] = level;
  sub.incidents = std::move(incidents);
  sub.checksum = riskbench::submission_checksum(sub);
  return sub;
}

// --- oracles ----------------------------------------------------------------

/// Bit-at-a-time reflected CRC-32 (polynomial 0xEDB88320).
inline std::uint32_t crc32_bitwise(const std::string& bytes) {
  std::uint32_t crc = 0xFFFFFFFFu;
  for (unsigned char b : bytes) {
    crc ^= b;
    for (int i = 0; i < 8; ++i) crc = (crc >> 1) ^ (0xEDB88320u & (0u - (crc & 1u)));
  }
  return crc ^ 0xFFFFFFFFu;
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

/// Survival of a zero-censored two-sided normal mixture, P(max(0, X) > l).
inline double mixture_survival(const riskbench::MixtureSpec& spec, double l_cents) {
  double s = 0.0;
  for (const auto& c : spec.components) {
    const double mu = static_cast<double>(c.mean.value);
    const double sd = static_cast<double>(c.std_dev.value);
    if (l_cents < 0) {
      s += c.probability;
      continue;
    }
    s += c.probability * (1.0 - normal_cdf((l_cents - mu) / sd));
  }
  return s;
}

/// E[max(0, X)] for X ~ N(mu, sd): mu Phi(mu/sd) + sd phi(mu/sd).
inline double censored_normal_mean(double mu, double sd) {
  const double z = mu / sd;
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
  return mu * normal_cdf(z) + sd * pdf;
}

/// Coarse-to-fine 2-D grid search of (intercept, slope) minimising squared
/// log residuals. Returns the slope.
inline double grid_search_log_slope(const std::vector<std::pair<double, double>>& points) {
  auto sse = [&](double a, double b) {
    double s = 0.0;
    for (const auto& [x, loss] : points) {
      const double r = std::log(loss) - (a + b * x);
      s += r * r;
    }
    return s;
  };
  double a_center = 0.0, b_center = 0.0;
  for (const auto& [x, loss] : points) a_center += std::log(loss) / static_cast<double>(points.size());
  double a_half = 50.0, b_half = 50.0;
  const int steps = 40;
  for (int round = 0; round < 60; ++round) {
    double best = INFINITY, best_a = a_center, best_b = b_center;
    for (int i = -steps; i <= steps; ++i) {
      const double a = a_center + a_half * i / steps;
      for (int k = -steps; k <= steps; ++k) {
        const double b = b_center + b_half * k / steps;
        const double s = sse(a, b);
        if (s < best) {
          best = s;
          best_a = a;
          best_b = b;
        }
      }
    }
    a_center = best_a;
    b_center = best_b;
    a_half *= 0.25;
    b_half *= 0.25;
  }
  return b_center;
}

// --- process helpers --------------------------------------------------------

struct CommandResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline CommandResult run_cli(const std::string& args, const fs::path& scratch) {
  fs::create_directories(scratch);
  const auto out = (scratch / "stdout.txt").string();
  const auto err = (scratch / "stderr.txt").string();
  const std::string cmd = "'" + cli_path() + "' " + args + " >'" + out + "' 2>'" + err + "'";
  const int status = std::system(cmd.c_str());
  CommandResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

inline fs::path scratch_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("riskbench_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace testing_support
