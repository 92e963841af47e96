#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "senm/core.hpp"
#include "senm/model.hpp"
#include "senm/registry.hpp"

namespace senm {

/// One line of `timelines.jsonl`, plus the optional side-table joins.
struct RawRecord {
  std::string id;
  std::string author_id;
  Timestamp created_at{};
  std::string text;
  RecordKind kind = RecordKind::original;
  std::vector<std::string> target_ids;
  std::optional<Sentiment> sentiment;
  std::optional<int> topic_id;
};

/// Compact per-record storage inside a Timeline. Text itself is not kept;
/// only what extraction and the account classifier need.
struct TimelineRecord {
  Timestamp created_at{};
  std::uint64_t text_hash = 0;
  RecordIndex id;
  std::uint32_t target_offset = 0;
  std::uint32_t target_count = 0;
  std::int32_t topic = kNoTopic;
  RecordKind kind = RecordKind::original;
  bool has_text = false;
  bool has_url = false;
  std::optional<Sentiment> sentiment;

  static constexpr std::int32_t kNoTopic = INT32_MIN;

  std::optional<int> topic_id() const noexcept {
    return topic == kNoTopic ? std::nullopt : std::optional<int>(topic);
  }
};

/// A user's full posting history, ascending by time.
struct Timeline {
  AccountId ego;
  std::vector<TimelineRecord> records;
  std::vector<AccountId> targets;
  Timestamp span_start{};
  Timestamp span_end{};

  std::span<const AccountId> targets_of(const TimelineRecord& r) const {
    return std::span<const AccountId>(targets).subspan(r.target_offset, r.target_count);
  }
  double span_days() const noexcept { return days_between(span_start, span_end); }
  double span_years() const noexcept { return span_days() / kDaysPerYear; }
};

struct Interaction {
  AccountId ego;
  AccountId alter;
  Timestamp timestamp{};
  std::optional<Sentiment> sentiment;
  RecordIndex source_record;

  friend bool operator==(const Interaction&, const Interaction&) = default;
};

/// Where a record ended up after grouping: timelines[timeline].records[position].
struct RecordLocation {
  std::uint32_t timeline = 0;
  std::uint32_t position = 0;
};

/// Parsed timelines with interned names. Account ids are numbered in name
/// order, so ordering by AccountId is ordering by account name.
struct Dataset {
  AccountRegistry accounts;
  RecordRegistry records;
  std::vector<Timeline> timelines;
  std::vector<RecordLocation> record_locations;

  const Timeline* find_timeline(AccountId ego) const;
  const TimelineRecord& record(RecordIndex r) const {
    const auto& loc = record_locations[r.value];
    return timelines[loc.timeline].records[loc.position];
  }
  TimelineRecord& record(RecordIndex r) {
    const auto& loc = record_locations[r.value];
    return timelines[loc.timeline].records[loc.position];
  }
  AccountId author_of(RecordIndex r) const { return timelines[record_locations[r.value].timeline].ego; }
};

/// Non-owning view of a record, used by the parser to avoid copies.
struct RecordView {
  std::string_view id;
  std::string_view author_id;
  Timestamp created_at{};
  std::string_view text;
  RecordKind kind = RecordKind::original;
  std::span<const std::string_view> target_ids;
  std::optional<Sentiment> sentiment;
  std::optional<int> topic_id;
};

/// Checks the per-record invariants; returns the violated rule if any.
std::optional<std::string_view> validate_record(const RecordView& r) noexcept;

/// Groups records into timelines. Duplicate ids and invalid records are rejected.
class DatasetBuilder {
 public:
  enum class AddResult { ok, duplicate_id, invalid };

  DatasetBuilder();
  AddResult add(const RecordView& r);
  AddResult add(const RawRecord& r);
  std::size_t size() const noexcept { return pending_records_; }
  void reserve(std::size_t records);

  Dataset finish() &&;

 private:
  struct Pending {
    std::vector<TimelineRecord> records;
    std::vector<AccountId> targets;
  };

  Dataset data_;
  std::vector<Pending> by_author_;
  std::vector<AccountId> scratch_targets_;
  std::size_t pending_records_ = 0;
};

enum class InputFormat { jsonl };

struct ParseOptions {
  InputFormat format = InputFormat::jsonl;
  unsigned jobs = 1;
  /// Inputs with more malformed lines than this fraction are rejected.
  double max_malformed_fraction = 0.10;
  std::size_t block_bytes = std::size_t{32} << 20;
};

struct MalformedLine {
  std::size_t line = 0;
  std::string reason;
};

struct ParseReport {
  std::size_t lines = 0;
  std::size_t records = 0;
  std::size_t malformed = 0;
  std::size_t duplicate_ids = 0;
  /// First few malformed lines, for diagnostics.
  std::vector<MalformedLine> examples;
};

/// Reads a timelines file. Malformed lines are counted, not fatal, unless they
/// exceed `max_malformed_fraction`. Throws Error{io} / Error{corrupt_input}.
Dataset parse_timelines(const std::filesystem::path& path, const ParseOptions& options = {},
                        ParseReport* report = nullptr);

/// Same as parse_timelines but over in-memory text; used by tests and tools.
Dataset parse_timelines_text(std::string text, const ParseOptions& options = {}, ParseReport* report = nullptr);

/// Serialises one record in `timelines.jsonl` form (no trailing newline).
std::string to_jsonl(const RawRecord& r);

struct JoinReport {
  std::size_t rows = 0;
  std::size_t applied = 0;
  std::size_t unknown_records = 0;
  std::size_t malformed = 0;
};

/// `record_id,label` with label in {positive,neutral,negative}; optional header row.
JoinReport join_sentiments(Dataset& data, const std::filesystem::path& csv, double max_malformed_fraction = 0.10);
/// `record_id,topic_id`; absent rows mean no topic.
JoinReport join_topics(Dataset& data, const std::filesystem::path& csv, double max_malformed_fraction = 0.10);

struct ExtractionStats {
  std::size_t records = 0;
  std::size_t interactions = 0;
  std::size_t non_communications = 0;
  std::size_t downgraded_quotes = 0;
  std::size_t self_targets = 0;

  void merge(const ExtractionStats& o) noexcept {
    records += o.records;
    interactions += o.interactions;
    non_communications += o.non_communications;
    downgraded_quotes += o.downgraded_quotes;
    self_targets += o.self_targets;
  }
};

/// One Interaction per (record, distinct target) for replies, mentions and
/// quote retweets with text. Plain retweets, originals and self-targets yield nothing.
std::vector<Interaction> extract_interactions(const Timeline& t, ExtractionStats* stats = nullptr);

/// Groups interactions by (ego, alter). Total: every interaction lands in exactly one entry.
RelationshipIndex build_relationship_index(std::span<const Interaction> interactions);

}  // namespace senm
