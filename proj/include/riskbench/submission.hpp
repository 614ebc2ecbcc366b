#pragma once

#include <zlib.h>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "riskbench/catalog.hpp"
#include "riskbench/error.hpp"
#include "riskbench/money.hpp"

namespace riskbench {

inline constexpr std::size_t kMaxImplicatedControls = 5;
inline constexpr Cents kDefaultReportingThreshold = Cents::from_dollars(5'000);
inline constexpr const char* kDefaultPeriod = "2021-01/2023-06";

struct IncidentRecord {
  Cents loss;
  std::vector<std::string> implicated;
  std::string period = kDefaultPeriod;
};

struct ParticipantSubmission {
  std::string participant_id;
  std::map<std::string, MaturityLevel> maturities;
  std::vector<IncidentRecord> incidents;
  std::uint32_t checksum = 0;
};

struct Violation {
  ErrorCode code;
  std::string detail;
};

struct ValidationResult {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }

  [[noreturn]] void raise_first() const {
    throw Error(violations.front().code, violations.front().detail);
  }
};

/// CRC-32 (IEEE 802.3, reflected, init/xorout 0xFFFFFFFF).
inline std::uint32_t compute_checksum(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks for very large inputs.
  std::size_t offset = 0;
  while (offset < bytes.size()) {
    const std::size_t chunk = std::min<std::size_t>(bytes.size() - offset, 1u << 30);
    crc = crc32(crc, bytes.data() + offset, static_cast<uInt>(chunk));
    offset += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

inline std::uint32_t compute_checksum(std::string_view bytes) {
  return compute_checksum(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
}

/// Canonical checksum input: UTF-8 JSON, keys sorted, no whitespace, losses in
/// integer cents, implicated controls sorted, checksum field excluded.
inline std::string canonical_bytes(const ParticipantSubmission& sub) {
  nlohmann::json maturities = nlohmann::json::object();
  for (const auto& [id, level] : sub.maturities) maturities[id] = std::string(to_string(level));
  nlohmann::json incidents = nlohmann::json::array();
  for (const auto& inc : sub.incidents) {
    auto implicated = inc.implicated;
    std::sort(implicated.begin(), implicated.end());
    incidents.push_back({{"implicated", implicated},
                         {"loss_cents", inc.loss.value},
                         {"period", inc.period}});
  }
  nlohmann::json doc = {{"incidents", incidents},
                        {"maturities", maturities},
                        {"participant_id", sub.participant_id}};
  return doc.dump();
}

inline std::uint32_t submission_checksum(const ParticipantSubmission& sub) {
  return compute_checksum(canonical_bytes(sub));
}

inline ValidationResult validate_submission(const ParticipantSubmission& sub,
                                            const ControlCatalog& catalog,
                                            Cents reporting_threshold = kDefaultReportingThreshold) {
  ValidationResult result;
  auto add = [&](ErrorCode code, std::string detail) {
    result.violations.push_back({code, std::move(detail)});
  };

  for (const auto& control : catalog.controls())
    if (!sub.maturities.contains(control.id))
      add(ErrorCode::MissingControl, "missing maturity rating for control '" + control.id + "'");
  for (const auto& [id, level] : sub.maturities)
    if (!catalog.index_of(id)) add(ErrorCode::UnknownControl, "unknown control '" + id + "'");

  for (std::size_t i = 0; i < sub.incidents.size(); ++i) {
    const auto& inc = sub.incidents[i];
    const std::string where = "incident " + std::to_string(i);
    const std::set<std::string> unique(inc.implicated.begin(), inc.implicated.end());
    if (inc.implicated.empty())
      add(ErrorCode::EmptyImplicatedControls, where + " implicates no controls");
    if (unique.size() != inc.implicated.size())
      add(ErrorCode::InvalidSchema, where + " lists a control more than once");
    if (unique.size() > kMaxImplicatedControls)
      add(ErrorCode::TooManyImplicatedControls,
          where + " implicates " + std::to_string(unique.size()) + " controls (max " +
              std::to_string(kMaxImplicatedControls) + ")");
    for (const auto& id : unique)
      if (!catalog.index_of(id))
        add(ErrorCode::UnknownControl, where + " implicates unknown control '" + id + "'");
    if (!(inc.loss > reporting_threshold))
      add(ErrorCode::LossBelowThreshold, where + " loss does not exceed the reporting threshold " +
                                             format_usd(reporting_threshold));
  }

  if (submission_checksum(sub) != sub.checksum)
    add(ErrorCode::ChecksumMismatch, "checksum does not match canonical serialization");
  return result;
}

/// Even split of an incident's loss; the remainder cents go to the
/// lexicographically-first control id so the total is preserved exactly.
inline std::map<std::string, Cents> split_incident_loss(const IncidentRecord& inc) {
  const std::set<std::string> ids(inc.implicated.begin(), inc.implicated.end());
  if (ids.empty()) throw Error(ErrorCode::EmptyImplicatedControls, "incident implicates no controls");
  if (inc.loss < Cents{0}) throw Error(ErrorCode::InvalidArgument, "negative incident loss");
  const auto count = static_cast<std::int64_t>(ids.size());
  const std::int64_t share = inc.loss.value / count;
  const std::int64_t remainder = inc.loss.value % count;
  std::map<std::string, Cents> out;
  for (const auto& id : ids) out.emplace(id, Cents{share});
  out.begin()->second += Cents{remainder};
  return out;
}

enum class BandFlagMode {
  PerFirm,      // one flag for the band holding the firm's total loss
  PerIncident,  // one count per incident in its band
};

/// Slot offsets of the fixed submission vector for a given catalog and band schema.
struct VectorLayout {
  std::size_t controls = 0;
  std::size_t bands = 0;

  VectorLayout(std::size_t control_count, std::size_t band_count)
      : controls(control_count), bands(band_count) {}
  VectorLayout(const ControlCatalog& catalog, const LossBandSchema& schema)
      : VectorLayout(catalog.size(), schema.size()) {}

  std::size_t maturity() const { return 0; }
  std::size_t flags() const { return controls; }
  std::size_t incident_count() const { return flags() + controls * kMaturityLevelCount; }
  std::size_t failure_counts() const { return incident_count() + 1; }
  std::size_t total_loss() const { return failure_counts() + controls; }
  std::size_t control_losses() const { return total_loss() + 1; }
  std::size_t band_flags() const { return control_losses() + controls; }
  std::size_t length() const { return band_flags() + bands; }
};

/// Encodes a validated submission into the integer vector that enters aggregation.
inline std::vector<std::uint64_t> encode_submission_vector(
    const ParticipantSubmission& sub, const ControlCatalog& catalog, const LossBandSchema& schema,
    BandFlagMode mode = BandFlagMode::PerFirm,
    Cents reporting_threshold = kDefaultReportingThreshold) {
  if (auto v = validate_submission(sub, catalog, reporting_threshold); !v.ok()) v.raise_first();

  const VectorLayout layout(catalog, schema);
  std::vector<std::uint64_t> out(layout.length(), 0);
  for (std::size_t c = 0; c < catalog.size(); ++c) {
    const MaturityLevel level = sub.maturities.at(catalog[c].id);
    out[layout.maturity() + c] = numerator(level);
    out[layout.flags() + c * kMaturityLevelCount + numerator(level)] = 1;
  }

  out[layout.incident_count()] = sub.incidents.size();
  Cents total{0};
  for (const auto& inc : sub.incidents) {
    total += inc.loss;
    for (const auto& [id, cents] : split_incident_loss(inc)) {
      const std::size_t c = catalog.require_index(id);
      out[layout.failure_counts() + c] += 1;
      out[layout.control_losses() + c] += static_cast<std::uint64_t>(cents.value);
    }
    if (mode == BandFlagMode::PerIncident)
      out[layout.band_flags() + assign_loss_band(inc.loss, schema)] += 1;
  }
  out[layout.total_loss()] = static_cast<std::uint64_t>(total.value);
  if (mode == BandFlagMode::PerFirm && !sub.incidents.empty())
    out[layout.band_flags() + assign_loss_band(total, schema)] = 1;
  return out;
}

}  // namespace riskbench
