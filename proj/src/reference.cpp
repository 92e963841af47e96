#include "senm/reference.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "senm/csv.hpp"
#include "senm/metrics.hpp"

namespace senm::reference {

namespace {

constexpr double kTwoDecimals = 0.01;

using Rows = std::vector<std::map<std::string, std::string>>;

Rows read_csv(const std::filesystem::path& path, std::vector<std::string>* header_out = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, fmt::format("cannot open {}", path.string()));
  std::string line;
  std::vector<std::string> header;
  std::vector<std::string> fields;
  Rows rows;
  while (std::getline(in, line)) {
    if (csv::trim(line).empty() || line.front() == '#') continue;
    if (!csv::split(line, fields)) throw Error(ErrorCode::corrupt_input, fmt::format("{}: bad CSV line", path.string()));
    if (header.empty()) {
      header = fields;
      continue;
    }
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::corrupt_input, fmt::format("{}: expected {} fields", path.string(), header.size()));
    }
    auto& row = rows.emplace_back();
    for (std::size_t i = 0; i < header.size(); ++i) row[header[i]] = fields[i];
  }
  if (header_out) *header_out = header;
  return rows;
}

double number(const std::string& s) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) {
    throw Error(ErrorCode::corrupt_input, fmt::format("not a number: '{}'", s));
  }
  return v;
}

std::optional<double> maybe(const std::string& s) { return s.empty() ? std::nullopt : std::optional(number(s)); }

Grid read_grid(const std::filesystem::path& path) {
  std::vector<std::string> header;
  Grid g;
  for (auto& r : read_csv(path, &header)) {
    GridRow row;
    row.region = r.at("region");
    for (const auto& h : header) {
      if (h == "region" || h == "range") continue;
      row.cells[h] = maybe(r.at(h));
    }
    row.range = maybe(r.at("range"));
    g.rows.push_back(std::move(row));
  }
  for (const auto& h : header) {
    if (h != "region" && h != "range") g.columns.push_back(h);
  }
  return g;
}

std::vector<TopicRow> read_topics(const std::filesystem::path& path) {
  std::vector<TopicRow> out;
  for (auto& r : read_csv(path)) {
    TopicRow t;
    t.country = r.at("country");
    t.rank = static_cast<int>(number(r.at("rank")));
    t.keyword = r.at("keyword");
    const auto c = parse_topic_category(r.at("category"));
    if (!c) throw Error(ErrorCode::corrupt_input, fmt::format("{}: bad category", path.string()));
    t.category = *c;
    t.negativity = number(r.at("negativity"));
    out.push_back(std::move(t));
  }
  return out;
}

bool is_range_row(const GridRow& r) { return r.region.starts_with("range_"); }

/// max - min of a grid column over data rows selected by `regions` (all when empty).
std::optional<double> column_range(const Grid& g, const std::string& column, const std::vector<std::string>& regions) {
  std::vector<LabeledValue> v;
  for (const auto& r : g.rows) {
    if (is_range_row(r)) continue;
    if (!regions.empty() && std::find(regions.begin(), regions.end(), r.region) == regions.end()) continue;
    if (auto c = r.cells.at(column)) v.push_back({r.region, *c});
  }
  if (v.size() < 2) return std::nullopt;
  return negativity_range(v);
}

std::vector<Check> grid_column_ranges(const Grid& g, std::string_view prefix, const std::vector<std::string>& subset,
                                      std::string_view subset_row) {
  std::vector<Check> out;
  for (const auto& row : g.rows) {
    if (!is_range_row(row)) continue;
    const bool all = row.region == "range_all";
    if (!all && row.region != subset_row) continue;
    for (const auto& col : g.columns) {
      const auto expected = row.cells.at(col);
      const auto actual = column_range(g, col, all ? std::vector<std::string>{} : subset);
      if (!expected || !actual) continue;
      out.push_back({fmt::format("{} {} {}", prefix, row.region, col), *expected, *actual, kTwoDecimals});
    }
  }
  return out;
}

}  // namespace

const GridRow* Grid::find(std::string_view region) const {
  for (const auto& r : rows) {
    if (r.region == region) return &r;
  }
  return nullptr;
}

Tables load(const std::filesystem::path& dir) {
  Tables t;
  for (auto& r : read_csv(dir / "circle_sizes.csv")) {
    std::array<double, 5> c{};
    for (int k = 0; k < 5; ++k) c[k] = number(r.at(fmt::format("c{}", k + 1)));
    t.circle_sizes[{r.at("type"), r.at("region")}] = c;
  }
  for (auto& r : read_csv(dir / "circle_negativity.csv")) {
    CircleNegativityRow row;
    for (int k = 0; k < 5; ++k) {
      row.count[k] = number(r.at(fmt::format("c{}_count", k + 1)));
      row.pct[k] = number(r.at(fmt::format("c{}_pct", k + 1)));
    }
    row.range_c1_c4 = number(r.at("range_c1_c4"));
    t.circle_negativity[{r.at("type"), r.at("region")}] = row;
  }
  t.by_user_type = read_grid(dir / "negativity_by_user_type.csv");
  t.by_topic = read_grid(dir / "negativity_by_topic.csv");
  t.topic_user = read_topics(dir / "topic_user_negativity.csv");
  t.topic_tweet = read_topics(dir / "topic_tweet_negativity.csv");
  for (auto& r : read_csv(dir / "category_means.csv")) {
    CategoryMeanRow m;
    m.country = r.at("country");
    m.metric = r.at("metric");
    const auto c = parse_topic_category(r.at("category"));
    if (!c) throw Error(ErrorCode::corrupt_input, "category_means.csv: bad category");
    m.category = *c;
    m.mean = number(r.at("mean"));
    t.category_means.push_back(std::move(m));
  }
  return t;
}

std::vector<Check> user_type_column_ranges(const Tables& t) {
  return grid_column_ranges(t.by_user_type, "user-type column", {"Brazil", "Italy", "Netherlands"}, "range_bin");
}

std::vector<Check> topic_row_ranges(const Tables& t, const std::string& excluded) {
  std::vector<Check> out;
  for (const auto& row : t.by_topic.rows) {
    if (is_range_row(row) || !row.range) continue;
    std::vector<LabeledValue> v;
    for (const auto& [col, value] : row.cells) {
      if (col != excluded && value) v.push_back({col, *value});
    }
    out.push_back({fmt::format("topic row {} (without {})", row.region, excluded), *row.range, negativity_range(v),
                   kTwoDecimals});
  }
  auto cols = grid_column_ranges(t.by_topic, "topic column", {"Italy", "Brazil", "Netherlands"}, "range_ibn");
  out.insert(out.end(), cols.begin(), cols.end());
  return out;
}

std::vector<Check> user_type_row_ranges(const Tables& t) {
  std::vector<Check> out;
  for (const auto& row : t.by_user_type.rows) {
    if (is_range_row(row) || !row.range) continue;
    std::vector<LabeledValue> v;
    for (const auto& [col, value] : row.cells) {
      if (value) v.push_back({col, *value});
    }
    out.push_back({fmt::format("user-type row {}", row.region), *row.range, negativity_range(v), kTwoDecimals});
  }
  return out;
}

std::vector<Check> circle_negativity_ranges(const Tables& t) {
  std::vector<Check> out;
  for (const auto& [key, row] : t.circle_negativity) {
    const auto [lo, hi] = std::minmax_element(row.pct.begin(), row.pct.begin() + 4);
    out.push_back({fmt::format("circle range {}/{}", key.type, key.region), row.range_c1_c4, *hi - *lo, kTwoDecimals});
  }
  return out;
}

std::vector<Check> circle_negativity_vs_sizes(const Tables& t, double tolerance_pp) {
  std::vector<Check> out;
  for (const auto& [key, row] : t.circle_negativity) {
    auto sizes = t.circle_sizes.find(key);
    if (sizes == t.circle_sizes.end()) {
      throw Error(ErrorCode::corrupt_input, fmt::format("no circle sizes for {}/{}", key.type, key.region));
    }
    for (int k = 0; k < 4; ++k) {
      out.push_back({fmt::format("circle pct {}/{} C{}", key.type, key.region, k + 1), row.pct[k],
                     100.0 * row.count[k] / sizes->second[k], tolerance_pp});
    }
  }
  return out;
}

std::vector<Check> category_means_from_topics(const Tables& t, const CategoryMap& map) {
  std::vector<Check> out;
  for (const auto& m : t.category_means) {
    const auto& topics = m.metric == "user" ? t.topic_user : t.topic_tweet;
    std::vector<TopicNegativity> rows;
    for (const auto& row : topics) {
      if (row.country != m.country) continue;
      const auto c = map.lookup(row.country, row.keyword);
      if (!c) {
        throw Error(ErrorCode::config, fmt::format("no category for '{}' in {}", row.keyword, row.country),
                    {row.keyword});
      }
      TopicNegativity tn;
      tn.keyword = row.keyword;
      tn.category = *c;
      tn.user_negativity_pct = row.negativity;
      tn.tweet_negativity_pct = row.negativity;
      rows.push_back(std::move(tn));
    }
    std::optional<double> actual;
    for (const auto& cm : category_means(rows)) {
      if (cm.category == m.category) actual = cm.tweet_mean;
    }
    out.push_back({fmt::format("category {} {} {}", m.country, m.metric, to_string(m.category)), m.mean,
                   actual.value_or(NAN), kTwoDecimals});
  }
  return out;
}

}  // namespace senm::reference
