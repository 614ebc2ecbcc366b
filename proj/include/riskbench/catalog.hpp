#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "riskbench/error.hpp"
#include "riskbench/money.hpp"

namespace riskbench {

struct Control {
  std::string id;
  std::string name;
};

/// Ordered list of security controls. Position in the list is the slot
/// index used by the submission vector layout.
class ControlCatalog {
 public:
  explicit ControlCatalog(std::vector<Control> controls) : controls_(std::move(controls)) {
    if (controls_.empty()) throw Error(ErrorCode::InvalidSchema, "catalog has no controls");
    std::unordered_set<std::string> seen;
    for (const auto& c : controls_) {
      if (c.id.empty()) throw Error(ErrorCode::InvalidSchema, "catalog control with empty id");
      if (!seen.insert(c.id).second)
        throw Error(ErrorCode::InvalidSchema, "duplicate control id '" + c.id + "'");
    }
  }

  /// The 22-control ransomware-readiness catalog used by the ISAO study.
  static const ControlCatalog& default_catalog() {
    static const ControlCatalog catalog({
        {"1a", "Deploy MFA"},
        {"2a", "Deploy EDR"},
        {"2b", "Hunt malicious activity"},
        {"3a", "Encrypt in transit"},
        {"3b", "Encrypt at rest"},
        {"4a", "Remove sharing barriers"},
        {"4b", "Threat intelligence"},
        {"5a", "Eval employee skills"},
        {"5b", "Deliver regular training"},
        {"6a", "Regular backups"},
        {"6b", "Test backups"},
        {"6c", "Protect backups"},
        {"6d", "Store backups offline"},
        {"7a", "Timely updates & patching"},
        {"7b", "Centralized patch system"},
        {"7c", "Risk-based patching"},
        {"8a", "Codify incident response plan"},
        {"8b", "Test incident response plan"},
        {"8c", "Maintain incident response plan"},
        {"9a", "External pen testing"},
        {"9b", "Red team exercises"},
        {"10a", "Network segmentation"},
    });
    return catalog;
  }

  std::size_t size() const { return controls_.size(); }
  const std::vector<Control>& controls() const { return controls_; }
  const Control& operator[](std::size_t i) const { return controls_[i]; }

  std::optional<std::size_t> index_of(std::string_view id) const {
    for (std::size_t i = 0; i < controls_.size(); ++i)
      if (controls_[i].id == id) return i;
    return std::nullopt;
  }

  std::size_t require_index(std::string_view id) const {
    if (auto i = index_of(id)) return *i;
    throw Error(ErrorCode::UnknownControl, "unknown control '" + std::string(id) + "'");
  }

 private:
  std::vector<Control> controls_;
};

/// Four-step implementation scale; numeric value is numerator / 3.
enum class MaturityLevel : std::uint8_t {
  NotImplemented = 0,
  PartiallyImplemented = 1,
  LargelyImplemented = 2,
  FullyImplemented = 3,
};

inline constexpr std::size_t kMaturityLevelCount = 4;
inline constexpr std::uint64_t kMaturityScale = 3;

constexpr std::uint64_t numerator(MaturityLevel level) { return static_cast<std::uint64_t>(level); }
constexpr double fraction(MaturityLevel level) {
  return static_cast<double>(numerator(level)) / static_cast<double>(kMaturityScale);
}

constexpr std::array<std::string_view, kMaturityLevelCount> kLevelNames = {
    "not_implemented", "partially_implemented", "largely_implemented", "fully_implemented"};

constexpr std::string_view to_string(MaturityLevel level) { return kLevelNames[numerator(level)]; }

inline std::optional<MaturityLevel> parse_level(std::string_view name) {
  for (std::size_t i = 0; i < kLevelNames.size(); ++i)
    if (kLevelNames[i] == name) return static_cast<MaturityLevel>(i);
  return std::nullopt;
}

/// Half-open USD intervals [lower_i, lower_{i+1}); the last band is open-ended.
class LossBandSchema {
 public:
  explicit LossBandSchema(std::vector<Cents> lower_edges) : lower_(std::move(lower_edges)) {
    if (lower_.empty()) throw Error(ErrorCode::InvalidSchema, "band schema has no bands");
    if (lower_.front() < Cents{0}) throw Error(ErrorCode::InvalidSchema, "negative band edge");
    for (std::size_t i = 1; i < lower_.size(); ++i)
      if (!(lower_[i - 1] < lower_[i]))
        throw Error(ErrorCode::InvalidSchema, "band edges must be strictly ascending");
  }

  /// [1k,5k), [5k,50k), [50k,500k), [500k,5m), [5m,inf)
  static const LossBandSchema& default_schema() {
    static const LossBandSchema schema({Cents::from_dollars(1'000), Cents::from_dollars(5'000),
                                        Cents::from_dollars(50'000), Cents::from_dollars(500'000),
                                        Cents::from_dollars(5'000'000)});
    return schema;
  }

  std::size_t size() const { return lower_.size(); }
  const std::vector<Cents>& lower_edges() const { return lower_; }

  std::string label(std::size_t band) const {
    if (band + 1 < lower_.size())
      return "[" + format_usd(lower_[band]) + "," + format_usd(lower_[band + 1]) + ")";
    return "[" + format_usd(lower_[band]) + ",inf)";
  }

 private:
  std::vector<Cents> lower_;
};

/// Index of the band containing `total`. Throws BelowAllBands under the first edge.
inline std::size_t assign_loss_band(Cents total, const LossBandSchema& schema) {
  const auto& edges = schema.lower_edges();
  if (total < edges.front())
    throw Error(ErrorCode::BelowAllBands,
                "amount " + format_usd(total) + " is below the lowest loss band");
  auto it = std::upper_bound(edges.begin(), edges.end(), total);
  return static_cast<std::size_t>(it - edges.begin()) - 1;
}

}  // namespace riskbench
