#pragma once

#include <cstddef>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "senm/filters.hpp"
#include "senm/metrics.hpp"
#include "senm/signs.hpp"
#include "senm/topics.hpp"

namespace senm {

/// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

enum class FileKind { jsonl, csv, markdown, svg, json };

/// Writes the files of one run into a directory. Every file names the
/// manifest that produced it: a first line for line formats, a comment for
/// markdown and SVG; JSON documents carry a "manifest" member themselves.
class OutputWriter {
 public:
  OutputWriter(std::filesystem::path dir, std::string manifest_id);

  void write(const std::string& name, FileKind kind, std::string_view body);

  const std::string& manifest_id() const noexcept { return manifest_id_; }
  const std::filesystem::path& dir() const noexcept { return dir_; }
  /// (file name, sha256) in write order.
  const std::vector<std::pair<std::string, std::string>>& digests() const noexcept { return digests_; }

 private:
  std::filesystem::path dir_;
  std::string manifest_id_;
  std::vector<std::pair<std::string, std::string>> digests_;
};

/// `{ego_id, n_circles, circle_sizes[], clusters:[{mode, alter_ids[]}], interactions}`.
std::string ego_network_json(const EgoNetwork& en, const AccountRegistry& names, std::size_t interactions);
/// `{ego_id, negativity_pct, signs:{alter_id: "+"|"-"}}`; unsigned alters are listed apart.
std::string signed_network_json(const SignedEgoNetwork& s, const AccountRegistry& names);
std::string filter_report_json(const FilterReport& r, std::string_view manifest_id);

/// Networks read back from ego_networks.jsonl and signed_networks.jsonl.
struct LoadedNetworks {
  AccountRegistry accounts;
  std::vector<SignedEgoNetwork> networks;
  std::vector<std::size_t> interactions;
};

/// Rebuilds signed networks from a directory written by `senm sign`.
/// Throws Error{corrupt_input} when the two files disagree.
LoadedNetworks load_signed_networks(const std::filesystem::path& dir);

std::string dataset_stats_json(const DatasetStats& s, std::string_view manifest_id);
DatasetStats parse_dataset_stats(std::string_view json);

/// Stats tables, numbered as the reference tables: 1 sizes, 2 structure,
/// 3 circle sizes, 4 user negativity, 6 circle negativity.
inline constexpr int kStatsTables[] = {1, 2, 3, 4, 6};

/// One CSV per table. Rows are datasets, except table 6 (one row per circle).
std::string stats_table_csv(std::span<const DatasetStats> stats, int table);
/// Long form: `table,dataset,row,column,value`.
std::string stats_long_csv(std::span<const DatasetStats> stats, const std::set<int>& tables);
std::string stats_markdown(std::span<const DatasetStats> stats, const std::set<int>& tables);
/// Region x type grid of user negativity with per-row and per-column ranges.
std::string negativity_grid_csv(std::span<const DatasetStats> stats);
/// Bar chart of per-circle negativity share; empty when there is no five-circle ego.
std::string circle_negativity_svg(const DatasetStats& s);

std::string topics_user_csv(std::span<const TopicNegativity> topics);
std::string topics_tweet_csv(std::span<const TopicNegativity> topics);
std::string categories_csv(std::span<const CategoryMean> means);

}  // namespace senm
