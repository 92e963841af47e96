#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "senm/ingest.hpp"
#include "senm/signs.hpp"

namespace senm {

enum class TopicCategory : std::uint8_t { politics, covid, religion, football, generic };

std::string_view to_string(TopicCategory c) noexcept;
std::optional<TopicCategory> parse_topic_category(std::string_view s) noexcept;

struct TopicAssignment {
  int topic_id = 0;
  std::string keyword;
  /// Sorted, unique.
  std::vector<RecordIndex> records;
  /// Authors of `records`; sorted, unique.
  std::vector<AccountId> users;
};

struct TopicLoadReport {
  std::size_t topics = 0;
  std::size_t unknown_records = 0;
  std::size_t malformed = 0;
};

/// Reads `topic_assignments.jsonl` ({topic_id, keyword, record_ids}). Users are
/// derived from the dataset so they always match the records' authors. Topic
/// order in the file is kept: it is the upstream ranking.
std::vector<TopicAssignment> load_topic_assignments(const std::filesystem::path& path, const Dataset& data,
                                                    TopicLoadReport* report = nullptr);

/// Builds assignments from per-record topic ids joined from `topics.csv`,
/// ordered by topic id. Keywords come from `keywords` when present.
std::vector<TopicAssignment> assignments_from_records(const Dataset& data,
                                                      const std::map<int, std::string>& keywords = {});

/// Keeps the first `pool` topics, then the `keep` with most distinct users
/// (ties to the lower topic id), most engaged first.
std::vector<TopicAssignment> select_top_topics(std::span<const TopicAssignment> assignments, std::size_t pool = 200,
                                               std::size_t keep = 20, std::vector<std::string>* warnings = nullptr);

struct TopicUserNegativity {
  std::optional<double> pct;
  std::size_t resolved_users = 0;
  std::size_t missing_users = 0;
};

/// Mean negativity_pct over engaged users that have a signed network.
TopicUserNegativity topic_user_negativity(const TopicAssignment& t,
                                          const std::map<AccountId, const SignedEgoNetwork*>& signed_by_ego);

/// 100 * negative records / records. Throws Error{missing_label} listing unlabeled record ids.
double topic_tweet_negativity(const TopicAssignment& t, const Dataset& data);

/// Keyword -> category, optionally per section (dataset region). Lookups try
/// the section first, then the unsectioned entries.
class CategoryMap {
 public:
  static CategoryMap load(const std::filesystem::path& path);
  static CategoryMap parse(std::string_view text, std::string_view origin = "<memory>");

  void set(std::string section, std::string keyword, TopicCategory c);
  std::optional<TopicCategory> lookup(std::string_view section, std::string_view keyword) const;
  std::vector<std::string> sections() const;
  /// Keywords listed under `section`, in file order.
  std::vector<std::pair<std::string, TopicCategory>> entries(std::string_view section) const;

 private:
  std::map<std::string, std::map<std::string, TopicCategory, std::less<>>, std::less<>> map_;
  std::map<std::string, std::vector<std::string>, std::less<>> order_;
};

struct TopicNegativity {
  int topic_id = 0;
  std::string keyword;
  TopicCategory category = TopicCategory::generic;
  std::optional<double> user_negativity_pct;
  double tweet_negativity_pct = 0.0;
  std::size_t users = 0;
  std::size_t records = 0;
};

struct CategoryMean {
  TopicCategory category = TopicCategory::generic;
  std::size_t topics = 0;
  /// Over topics with a defined user negativity; nullopt when none.
  std::optional<double> user_mean;
  double tweet_mean = 0.0;
};

/// Unweighted per-category means, in category enum order; empty categories are omitted.
std::vector<CategoryMean> category_means(std::span<const TopicNegativity> topics);

}  // namespace senm
