#pragma once

#include <array>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "senm/topics.hpp"

namespace senm::reference {

/// Published values carry two decimals; recomputed differences may sit exactly
/// on the tolerance, so comparisons allow this much floating-point slack.
inline constexpr double kBoundarySlack = 1e-9;

struct DatasetKey {
  std::string type;
  std::string region;
  friend auto operator<=>(const DatasetKey&, const DatasetKey&) = default;
};

/// A row of a region x column grid; empty cells are nullopt.
struct GridRow {
  std::string region;
  std::map<std::string, std::optional<double>> cells;
  std::optional<double> range;
};

struct Grid {
  std::vector<std::string> columns;
  std::vector<GridRow> rows;
  const GridRow* find(std::string_view region) const;
};

struct CircleNegativityRow {
  std::array<double, 5> count{};
  std::array<double, 5> pct{};
  double range_c1_c4 = 0.0;
};

struct TopicRow {
  std::string country;
  int rank = 0;
  std::string keyword;
  TopicCategory category = TopicCategory::generic;
  double negativity = 0.0;
};

struct CategoryMeanRow {
  std::string country;
  std::string metric;  // user | tweet
  TopicCategory category = TopicCategory::generic;
  double mean = 0.0;
};

struct Tables {
  std::map<DatasetKey, std::array<double, 5>> circle_sizes;
  std::map<DatasetKey, CircleNegativityRow> circle_negativity;
  Grid by_user_type;
  Grid by_topic;
  std::vector<TopicRow> topic_user;
  std::vector<TopicRow> topic_tweet;
  std::vector<CategoryMeanRow> category_means;
};

/// Loads the transcribed tables from `dir` (data/reference in the source tree).
Tables load(const std::filesystem::path& dir);

struct Check {
  std::string name;
  double expected = 0.0;
  double actual = 0.0;
  double tolerance = 0.0;
  bool pass() const noexcept { return std::abs(actual - expected) <= tolerance + kBoundarySlack; }
};

/// Column ranges of the user-type grid: the range_* rows against recomputed
/// max - min over the named regions (Brazil/Italy/Netherlands, or all).
std::vector<Check> user_type_column_ranges(const Tables& t);
/// Row ranges of the topic grid over every column except `excluded`, plus its column ranges.
std::vector<Check> topic_row_ranges(const Tables& t, const std::string& excluded = "generic");
/// Row ranges of the user-type grid over all columns (the published values are known to disagree).
std::vector<Check> user_type_row_ranges(const Tables& t);
/// Range column of the circle-negativity table against max - min of C1..C4.
std::vector<Check> circle_negativity_ranges(const Tables& t);
/// Circle-negativity pct against 100 * count / circle size, circles 1-4.
std::vector<Check> circle_negativity_vs_sizes(const Tables& t, double tolerance_pp = 0.5);
/// Published category means against means of the per-topic values, categorised by `map`.
std::vector<Check> category_means_from_topics(const Tables& t, const CategoryMap& map);

}  // namespace senm::reference
