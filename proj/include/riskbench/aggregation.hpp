#pragma once

#include <algorithm>
#include <array>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <mutex>
#include <random>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "riskbench/catalog.hpp"
#include "riskbench/error.hpp"
#include "riskbench/money.hpp"
#include "riskbench/submission.hpp"

namespace riskbench {

// ---------------------------------------------------------------------------
// Additive secret sharing over the ring Z / 2^64. Unsigned wraparound is the
// ring arithmetic, so no explicit reduction appears below.
// ---------------------------------------------------------------------------

/// Generator producing full-range 64-bit words.
template <typename G>
concept WordGenerator = std::uniform_random_bit_generator<G> &&
                        std::same_as<typename G::result_type, std::uint64_t> &&
                        (G::min() == 0) && (G::max() == std::numeric_limits<std::uint64_t>::max());

/// System entropy source for production share masking.
class SystemEntropy {
 public:
  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() {
    static_assert(sizeof(std::random_device::result_type) == 4);
    return (static_cast<result_type>(device_()) << 32) | device_();
  }

 private:
  std::random_device device_;
};

struct EncodingParams {
  std::size_t vector_length = 0;
  std::size_t aggregators = 2;
  std::size_t max_participants = std::size_t{1} << 20;

  void check() const {
    if (aggregators < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 aggregators");
    if (aggregators > 255) throw Error(ErrorCode::InvalidArgument, "at most 255 aggregators");
    if (vector_length == 0) throw Error(ErrorCode::InvalidArgument, "empty vector length");
    if (max_participants == 0) throw Error(ErrorCode::InvalidArgument, "max_participants is 0");
  }

  /// Largest plaintext entry that cannot wrap when summed over max_participants.
  std::uint64_t entry_limit() const {
    return std::numeric_limits<std::uint64_t>::max() / max_participants;
  }

  void check_headroom(std::span<const std::uint64_t> plaintext) const {
    for (std::uint64_t v : plaintext)
      if (v >= entry_limit())
        throw Error(ErrorCode::InvalidArgument, "plaintext entry exceeds ring headroom");
  }
};

/// FNV-1a 64; identifies a participant on the wire without carrying its id.
constexpr std::uint64_t participant_hash(std::string_view participant_id) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : participant_id) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

struct ShareVector {
  std::uint64_t participant = 0;  // participant_hash()
  std::uint8_t aggregator_index = 0;
  std::vector<std::uint64_t> entries;
};

/// Splits `plaintext` into `t` additive shares. Shares 0..t-2 are uniform ring
/// elements; the last share is the residual.
template <WordGenerator G>
std::vector<ShareVector> share_vector(std::span<const std::uint64_t> plaintext, std::size_t t,
                                      G& rng, std::uint64_t participant = 0) {
  if (t < 2 || t > 255) throw Error(ErrorCode::InvalidArgument, "share count must be in [2,255]");
  std::vector<ShareVector> shares(t);
  for (std::size_t a = 0; a < t; ++a) {
    shares[a].participant = participant;
    shares[a].aggregator_index = static_cast<std::uint8_t>(a);
    shares[a].entries.resize(plaintext.size());
  }
  for (std::size_t i = 0; i < plaintext.size(); ++i) {
    std::uint64_t residual = plaintext[i];
    for (std::size_t a = 0; a + 1 < t; ++a) {
      const std::uint64_t r = rng();
      shares[a].entries[i] = r;
      residual -= r;
    }
    shares[t - 1].entries[i] = residual;
  }
  return shares;
}

/// Entrywise ring sum of share vectors.
inline std::vector<std::uint64_t> reconstruct(std::span<const ShareVector> shares) {
  if (shares.empty()) return {};
  std::vector<std::uint64_t> out(shares.front().entries.size(), 0);
  for (const auto& s : shares) {
    if (s.entries.size() != out.size())
      throw Error(ErrorCode::LengthMismatch, "share vectors differ in length");
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += s.entries[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Wire format
//   session_id        16 bytes
//   participant hash   8 bytes, big-endian
//   aggregator_index   1 byte
//   vector_length      u32 big-endian
//   entries            vector_length x u64 little-endian
// ---------------------------------------------------------------------------

using SessionId = std::array<std::uint8_t, 16>;

inline constexpr std::size_t kShareHeaderBytes = 16 + 8 + 1 + 4;

struct ShareMessage {
  SessionId session_id{};
  ShareVector share;
};

inline std::vector<std::uint8_t> encode_share_message(const ShareMessage& msg) {
  const auto& entries = msg.share.entries;
  if (entries.size() > std::numeric_limits<std::uint32_t>::max())
    throw Error(ErrorCode::InvalidArgument, "share vector too long for wire format");
  std::vector<std::uint8_t> out;
  out.reserve(kShareHeaderBytes + 8 * entries.size());
  out.insert(out.end(), msg.session_id.begin(), msg.session_id.end());
  for (int b = 7; b >= 0; --b) out.push_back(static_cast<std::uint8_t>(msg.share.participant >> (8 * b)));
  out.push_back(msg.share.aggregator_index);
  const auto len = static_cast<std::uint32_t>(entries.size());
  for (int b = 3; b >= 0; --b) out.push_back(static_cast<std::uint8_t>(len >> (8 * b)));
  for (std::uint64_t v : entries)
    for (int b = 0; b < 8; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
  return out;
}

inline ShareMessage decode_share_message(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kShareHeaderBytes)
    throw Error(ErrorCode::InvalidSchema, "share message shorter than header");
  ShareMessage msg;
  std::copy_n(bytes.begin(), 16, msg.session_id.begin());
  std::size_t pos = 16;
  for (int b = 0; b < 8; ++b) msg.share.participant = (msg.share.participant << 8) | bytes[pos++];
  msg.share.aggregator_index = bytes[pos++];
  std::uint32_t len = 0;
  for (int b = 0; b < 4; ++b) len = (len << 8) | bytes[pos++];
  if (bytes.size() != kShareHeaderBytes + 8 * static_cast<std::size_t>(len))
    throw Error(ErrorCode::LengthMismatch, "share message length does not match vector_length");
  msg.share.entries.resize(len);
  for (auto& v : msg.share.entries) {
    v = 0;
    for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(bytes[pos++]) << (8 * b);
  }
  return msg;
}

inline std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xF]);
  }
  return out;
}

/// Deterministic session id from the sorted enrolled participant ids.
inline SessionId derive_session_id(std::vector<std::string> participant_ids) {
  std::sort(participant_ids.begin(), participant_ids.end());
  std::string joined;
  for (const auto& id : participant_ids) {
    joined += id;
    joined.push_back('\0');
  }
  SessionId out{};
  const std::uint64_t a = participant_hash(joined);
  const std::uint64_t b = participant_hash("riskbench-session:" + joined);
  for (int i = 0; i < 8; ++i) {
    out[i] = static_cast<std::uint8_t>(a >> (56 - 8 * i));
    out[8 + i] = static_cast<std::uint8_t>(b >> (56 - 8 * i));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Session
// ---------------------------------------------------------------------------

enum class SessionState { Open, Sealed, Decoded };

/// Simulated aggregator nodes. Each aggregator index keeps only a running ring
/// sum; individual share vectors are never retained.
class AggregationSession {
 public:
  AggregationSession(SessionId id, EncodingParams params)
      : id_(id), params_(params), nodes_(params.aggregators) {
    params_.check();
    for (auto& node : nodes_) node.sum.assign(params_.vector_length, 0);
  }

  AggregationSession(const AggregationSession&) = delete;
  AggregationSession& operator=(const AggregationSession&) = delete;

  const SessionId& id() const { return id_; }
  const EncodingParams& params() const { return params_; }

  SessionState state() const {
    std::shared_lock lock(state_mutex_);
    return state_;
  }

  std::size_t participant_count() const {
    std::shared_lock lock(state_mutex_);
    return enrolled_.size();
  }

  void enroll(std::string_view participant_id) {
    std::unique_lock lock(state_mutex_);
    if (state_ != SessionState::Open) throw Error(ErrorCode::SessionSealed, "session is sealed");
    if (enrolled_.size() >= params_.max_participants)
      throw Error(ErrorCode::InvalidArgument, "session is full");
    if (!enrolled_.insert(participant_hash(participant_id)).second)
      throw Error(ErrorCode::DuplicateContribution, "participant already enrolled");
  }

  /// Adds one share into its aggregator's running sum. Safe to call concurrently.
  void contribute(const ShareVector& share) {
    std::shared_lock lock(state_mutex_);
    if (state_ != SessionState::Open) throw Error(ErrorCode::SessionSealed, "session is sealed");
    if (!enrolled_.contains(share.participant))
      throw Error(ErrorCode::InvalidArgument, "share from a participant that is not enrolled");
    if (share.aggregator_index >= nodes_.size())
      throw Error(ErrorCode::InvalidArgument, "aggregator index out of range");
    if (share.entries.size() != params_.vector_length)
      throw Error(ErrorCode::LengthMismatch,
                  "share vector length " + std::to_string(share.entries.size()) +
                      " does not match session length " + std::to_string(params_.vector_length));
    Node& node = nodes_[share.aggregator_index];
    std::lock_guard node_lock(node.mutex);
    if (!node.contributors.insert(share.participant).second)
      throw Error(ErrorCode::DuplicateContribution,
                  "participant already contributed to aggregator " +
                      std::to_string(share.aggregator_index));
    for (std::size_t i = 0; i < node.sum.size(); ++i) node.sum[i] += share.entries[i];
  }

  void contribute(const ShareMessage& msg) {
    if (msg.session_id != id_) throw Error(ErrorCode::InvalidArgument, "share for another session");
    contribute(msg.share);
  }

  void contribute(std::span<const std::uint8_t> wire) { contribute(decode_share_message(wire)); }

  void seal() {
    std::unique_lock lock(state_mutex_);
    if (state_ != SessionState::Open) throw Error(ErrorCode::SessionState, "session already sealed");
    state_ = SessionState::Sealed;
  }

  /// Combines the aggregator sums. Allowed once, from the Sealed state.
  std::vector<std::uint64_t> decode() {
    std::unique_lock lock(state_mutex_);
    if (state_ != SessionState::Sealed)
      throw Error(ErrorCode::SessionState, "decode requires a sealed, undecoded session");
    for (std::size_t a = 0; a < nodes_.size(); ++a)
      if (nodes_[a].contributors != enrolled_)
        throw Error(ErrorCode::IncompleteSession,
                    "aggregator " + std::to_string(a) + " is missing contributions");
    std::vector<std::uint64_t> out(params_.vector_length, 0);
    for (const auto& node : nodes_)
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += node.sum[i];
    state_ = SessionState::Decoded;
    return out;
  }

 private:
  struct Node {
    std::mutex mutex;
    std::vector<std::uint64_t> sum;
    std::unordered_set<std::uint64_t> contributors;
  };

  SessionId id_;
  EncodingParams params_;
  mutable std::shared_mutex state_mutex_;
  SessionState state_ = SessionState::Open;
  std::unordered_set<std::uint64_t> enrolled_;
  std::vector<Node> nodes_;
};

// ---------------------------------------------------------------------------
// Post-processing
// ---------------------------------------------------------------------------

struct ControlAggregate {
  std::string id;
  std::string name;
  std::uint64_t maturity_points = 0;  // sum of 0-3 numerators
  double avg_maturity = 0.0;          // fraction in [0,1]
  std::array<std::uint64_t, kMaturityLevelCount> flag_counts{};
  std::uint64_t failure_count = 0;
  Cents loss;
};

struct AggregateReport {
  std::string session_id;
  std::uint64_t participant_count = 0;
  std::vector<ControlAggregate> controls;
  double overall_avg_maturity = 0.0;
  std::uint64_t incident_count = 0;
  Cents total_loss;
  std::vector<Cents> band_lower_edges;
  std::vector<std::uint64_t> band_counts;
  BandFlagMode band_mode = BandFlagMode::PerFirm;
  std::vector<std::string> caveats;

  std::vector<double> group_averages() const {
    std::vector<double> out;
    out.reserve(controls.size());
    for (const auto& c : controls) out.push_back(c.avg_maturity);
    return out;
  }

  std::vector<Cents> control_losses() const {
    std::vector<Cents> out;
    out.reserve(controls.size());
    for (const auto& c : controls) out.push_back(c.loss);
    return out;
  }

  ControlCatalog catalog() const {
    std::vector<Control> list;
    for (const auto& c : controls) list.push_back({c.id, c.name});
    return ControlCatalog(std::move(list));
  }
};

inline constexpr const char* kSingleParticipantCaveat =
    "single participant: the aggregate equals that participant's submission (no privacy)";

/// Turns decoded sums into averages and distributions, checking the
/// structural invariants of a well-formed aggregate.
inline AggregateReport post_process(std::span<const std::uint64_t> sums, std::uint64_t participants,
                                    const ControlCatalog& catalog, const LossBandSchema& schema,
                                    BandFlagMode mode = BandFlagMode::PerFirm) {
  if (participants == 0) throw Error(ErrorCode::InvalidArgument, "participant count must be >= 1");
  const VectorLayout layout(catalog, schema);
  if (sums.size() != layout.length())
    throw Error(ErrorCode::LengthMismatch, "aggregate vector length does not match layout");

  auto to_cents = [](std::uint64_t v) {
    if (v > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
      throw Error(ErrorCode::InvalidSchema, "aggregate loss overflows");
    return Cents{static_cast<std::int64_t>(v)};
  };

  AggregateReport r;
  r.participant_count = participants;
  r.incident_count = sums[layout.incident_count()];
  r.total_loss = to_cents(sums[layout.total_loss()]);
  r.band_lower_edges = schema.lower_edges();
  r.band_mode = mode;
  const double n = static_cast<double>(participants);
  std::uint64_t points = 0;
  Cents attributed{0};
  for (std::size_t c = 0; c < catalog.size(); ++c) {
    ControlAggregate agg;
    agg.id = catalog[c].id;
    agg.name = catalog[c].name;
    agg.maturity_points = sums[layout.maturity() + c];
    agg.avg_maturity = static_cast<double>(agg.maturity_points) / (kMaturityScale * n);
    std::uint64_t flag_total = 0;
    std::uint64_t flag_points = 0;
    for (std::size_t l = 0; l < kMaturityLevelCount; ++l) {
      agg.flag_counts[l] = sums[layout.flags() + c * kMaturityLevelCount + l];
      flag_total += agg.flag_counts[l];
      flag_points += agg.flag_counts[l] * l;
    }
    if (flag_total != participants)
      throw Error(ErrorCode::InvalidSchema, "maturity flags for '" + agg.id +
                                                "' do not sum to the participant count");
    if (flag_points != agg.maturity_points)
      throw Error(ErrorCode::InvalidSchema, "maturity flags for '" + agg.id +
                                                "' disagree with the maturity sum");
    agg.failure_count = sums[layout.failure_counts() + c];
    agg.loss = to_cents(sums[layout.control_losses() + c]);
    points += agg.maturity_points;
    attributed += agg.loss;
    r.controls.push_back(std::move(agg));
  }
  if (attributed != r.total_loss)
    throw Error(ErrorCode::InvalidSchema, "per-control losses do not sum to the total loss");
  r.overall_avg_maturity =
      static_cast<double>(points) / (kMaturityScale * static_cast<double>(catalog.size()) * n);
  for (std::size_t b = 0; b < schema.size(); ++b) r.band_counts.push_back(sums[layout.band_flags() + b]);
  if (mode == BandFlagMode::PerFirm) {
    std::uint64_t flagged = 0;
    for (auto v : r.band_counts) flagged += v;
    if (flagged > participants)
      throw Error(ErrorCode::InvalidSchema, "more firm band flags than participants");
  }
  if (participants == 1) r.caveats.emplace_back(kSingleParticipantCaveat);
  return r;
}

struct AggregationOptions {
  std::size_t aggregators = 3;
  std::size_t min_participants = 3;
  BandFlagMode band_mode = BandFlagMode::PerFirm;
  Cents reporting_threshold = kDefaultReportingThreshold;
};

/// End-to-end share -> wire -> aggregate -> decode -> post-process over a set
/// of submissions. Submissions must already be validated by the caller or
/// encode will raise the first violation.
template <WordGenerator G>
AggregateReport aggregate_submissions(std::span<const ParticipantSubmission> subs,
                                      const ControlCatalog& catalog, const LossBandSchema& schema,
                                      const AggregationOptions& opts, G& rng) {
  if (subs.size() < opts.min_participants)
    throw Error(ErrorCode::NotEnoughParticipants,
                std::to_string(subs.size()) + " submissions, minimum for release is " +
                    std::to_string(opts.min_participants));
  const VectorLayout layout(catalog, schema);
  EncodingParams params{layout.length(), opts.aggregators};
  std::vector<std::string> ids;
  for (const auto& s : subs) ids.push_back(s.participant_id);
  AggregationSession session(derive_session_id(ids), params);
  for (const auto& s : subs) session.enroll(s.participant_id);
  for (const auto& s : subs) {
    const auto plain = encode_submission_vector(s, catalog, schema, opts.band_mode,
                                                opts.reporting_threshold);
    params.check_headroom(plain);
    for (const auto& share : share_vector(std::span<const std::uint64_t>(plain), opts.aggregators,
                                          rng, participant_hash(s.participant_id)))
      session.contribute(std::span<const std::uint8_t>(
          encode_share_message({session.id(), share})));
  }
  session.seal();
  const auto sums = session.decode();
  auto report = post_process(sums, subs.size(), catalog, schema, opts.band_mode);
  report.session_id = to_hex(session.id());
  return report;
}

}  // namespace riskbench
