#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "senm/circles.hpp"
#include "senm/filters.hpp"
#include "senm/ingest.hpp"
#include "senm/keyvalue.hpp"
#include "senm/metrics.hpp"
#include "senm/signs.hpp"
#include "senm/topics.hpp"

namespace senm {

enum class Stage : std::uint8_t { ingest, filter, circles, sign, stats, topics };
std::string_view to_string(Stage s) noexcept;

/// Every knob of a run. Defaults are the published thresholds.
struct PipelineConfig {
  std::string dataset_type = "synthetic";
  std::string dataset_region = "--";
  double max_malformed_fraction = 0.10;
  bool skip_nonhuman_filter = false;
  IrregularPolicy irregular;
  InactivePolicy inactive;
  CircleOptions circles;
  GoldenRatioPolicy signing;
  CircleAggregation aggregation = CircleAggregation::ratio_of_sums;
  std::size_t topic_pool = 200;
  std::size_t topic_keep = 20;
  /// Keyword -> category map; without one every topic is generic.
  std::optional<std::filesystem::path> topic_categories;
  std::vector<int> tables{1, 2, 3, 4, 6};

  /// Keys understood by from_keyvalues, for diagnostics and documentation.
  static const std::vector<std::string_view>& keys();
  /// Unknown keys and bad values throw Error{config}. Relative paths resolve against `base`.
  static PipelineConfig from_keyvalues(const KeyValues& kv, const std::filesystem::path& base = {});
  /// Canonical snapshot; from_keyvalues(snapshot()) round-trips.
  KeyValues snapshot() const;
};

/// Scheduling and file locations; none of it changes any output byte.
struct RunOptions {
  std::filesystem::path in_dir;
  std::filesystem::path out_dir;
  unsigned jobs = 1;
  /// Wall-clock per stage goes here when set; it is kept out of out_dir so
  /// that reruns produce identical trees.
  std::optional<std::filesystem::path> timings;
};

/// A failure inside one stage; the CLI prints the stage name.
class StageError : public Error {
 public:
  StageError(Stage stage, const Error& cause)
      : Error(cause.code(), cause.what(), cause.details()), stage_(stage) {}
  Stage stage() const noexcept { return stage_; }

 private:
  Stage stage_;
};

struct StageRecord {
  Stage stage;
  double seconds = 0.0;
  std::map<std::string, std::size_t> counters;
};

struct PipelineResult {
  std::string manifest_id;
  FilterReport filters;
  ExtractionStats extraction;
  std::optional<DatasetStats> stats;
  std::vector<TopicNegativity> topics;
  std::vector<std::string> warnings;
  std::vector<StageRecord> stages;
  /// (file name, sha256) of everything written, manifest last.
  std::vector<std::pair<std::string, std::string>> outputs;
};

/// Input files looked up in RunOptions::in_dir. Only timelines.jsonl is required.
inline constexpr std::string_view kTimelinesFile = "timelines.jsonl";
inline constexpr std::string_view kSentimentsFile = "sentiments.csv";
inline constexpr std::string_view kTopicsFile = "topics.csv";
inline constexpr std::string_view kTopicAssignmentsFile = "topic_assignments.jsonl";
inline constexpr std::string_view kAccountLabelsFile = "account_labels.csv";
inline constexpr std::string_view kManifestFile = "run_manifest.json";

/// Runs every stage up to and including `until`, writing each stage's
/// artifacts and the run manifest into out_dir. The topics stage is skipped
/// without topic input unless `require_topics` is set. Throws StageError.
PipelineResult run_pipeline(const PipelineConfig& config, const RunOptions& run, Stage until = Stage::topics,
                            bool require_topics = false);

/// Recomputes stats from a directory holding ego_networks.jsonl and
/// signed_networks.jsonl (as written by the sign stage).
PipelineResult run_stats_from_networks(const PipelineConfig& config, const RunOptions& run);

/// Cross-dataset tables from several dataset_stats.json files.
std::vector<std::pair<std::string, std::string>> write_report(const std::vector<std::filesystem::path>& stats_files,
                                                              const std::filesystem::path& out_dir,
                                                              const std::vector<int>& tables);

/// Loads the config snapshot of a manifest and checks that the input digests
/// it records match the files in `in_dir`. Throws Error{config} on a mismatch.
KeyValues config_from_manifest(const std::filesystem::path& manifest, const std::filesystem::path& in_dir);

}  // namespace senm
