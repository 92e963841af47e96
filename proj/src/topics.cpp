#include "senm/topics.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "senm/csv.hpp"
#include "senm/metrics.hpp"

namespace senm {

std::string_view to_string(TopicCategory c) noexcept {
  switch (c) {
    case TopicCategory::politics: return "politics";
    case TopicCategory::covid: return "covid";
    case TopicCategory::religion: return "religion";
    case TopicCategory::football: return "football";
    case TopicCategory::generic: return "generic";
  }
  return "?";
}

std::optional<TopicCategory> parse_topic_category(std::string_view s) noexcept {
  for (auto c : {TopicCategory::politics, TopicCategory::covid, TopicCategory::religion, TopicCategory::football,
                 TopicCategory::generic}) {
    if (s == to_string(c)) return c;
  }
  return std::nullopt;
}

namespace {

void finalize(TopicAssignment& t, const Dataset& data) {
  std::sort(t.records.begin(), t.records.end());
  t.records.erase(std::unique(t.records.begin(), t.records.end()), t.records.end());
  t.users.clear();
  for (RecordIndex r : t.records) t.users.push_back(data.author_of(r));
  std::sort(t.users.begin(), t.users.end());
  t.users.erase(std::unique(t.users.begin(), t.users.end()), t.users.end());
}

}  // namespace

std::vector<TopicAssignment> load_topic_assignments(const std::filesystem::path& path, const Dataset& data,
                                                    TopicLoadReport* report) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, fmt::format("cannot open {}", path.string()));
  TopicLoadReport local;
  TopicLoadReport& rep = report ? *report : local;
  rep = TopicLoadReport{};
  std::vector<TopicAssignment> out;
  std::set<int> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("topic_id") || !j["topic_id"].is_number_integer() ||
        !j.contains("record_ids") || !j["record_ids"].is_array()) {
      ++rep.malformed;
      continue;
    }
    TopicAssignment t;
    t.topic_id = j["topic_id"].get<int>();
    if (!seen.insert(t.topic_id).second) {
      throw Error(ErrorCode::corrupt_input, fmt::format("{}:{}: topic {} listed twice", path.string(), line_no, t.topic_id));
    }
    t.keyword = j.contains("keyword") && j["keyword"].is_string() ? j["keyword"].get<std::string>()
                                                                   : fmt::format("topic_{}", t.topic_id);
    for (const auto& r : j["record_ids"]) {
      if (!r.is_string()) {
        ++rep.malformed;
        continue;
      }
      if (auto idx = data.records.find(r.get<std::string>())) {
        t.records.push_back(*idx);
      } else {
        ++rep.unknown_records;
      }
    }
    finalize(t, data);
    out.push_back(std::move(t));
  }
  rep.topics = out.size();
  return out;
}

std::vector<TopicAssignment> assignments_from_records(const Dataset& data, const std::map<int, std::string>& keywords) {
  std::map<int, TopicAssignment> by_id;
  for (const auto& tl : data.timelines) {
    for (const auto& r : tl.records) {
      const auto topic = r.topic_id();
      if (!topic) continue;
      auto& t = by_id[*topic];
      t.topic_id = *topic;
      t.records.push_back(r.id);
    }
  }
  std::vector<TopicAssignment> out;
  for (auto& [id, t] : by_id) {
    auto kw = keywords.find(id);
    t.keyword = kw != keywords.end() ? kw->second : fmt::format("topic_{}", id);
    finalize(t, data);
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<TopicAssignment> select_top_topics(std::span<const TopicAssignment> assignments, std::size_t pool,
                                               std::size_t keep, std::vector<std::string>* warnings) {
  std::vector<TopicAssignment> out(assignments.begin(),
                                   assignments.begin() + static_cast<std::ptrdiff_t>(std::min(pool, assignments.size())));
  std::stable_sort(out.begin(), out.end(), [](const TopicAssignment& a, const TopicAssignment& b) {
    if (a.users.size() != b.users.size()) return a.users.size() > b.users.size();
    return a.topic_id < b.topic_id;
  });
  if (out.size() < keep) {
    if (warnings) warnings->push_back(fmt::format("only {} topics available, wanted {}", out.size(), keep));
  } else {
    out.resize(keep);
  }
  return out;
}

TopicUserNegativity topic_user_negativity(const TopicAssignment& t,
                                          const std::map<AccountId, const SignedEgoNetwork*>& signed_by_ego) {
  TopicUserNegativity r;
  std::vector<double> values;
  for (AccountId u : t.users) {
    auto it = signed_by_ego.find(u);
    if (it == signed_by_ego.end() || !it->second || !it->second->negativity_pct) {
      ++r.missing_users;
      continue;
    }
    ++r.resolved_users;
    values.push_back(*it->second->negativity_pct);
  }
  if (!values.empty()) r.pct = stable_mean(values);
  return r;
}

double topic_tweet_negativity(const TopicAssignment& t, const Dataset& data) {
  if (t.records.empty()) throw Error(ErrorCode::precondition, fmt::format("topic {} has no records", t.topic_id));
  std::size_t negative = 0;
  std::vector<std::string> missing;
  for (RecordIndex r : t.records) {
    const auto& s = data.record(r).sentiment;
    if (!s) {
      missing.emplace_back(data.records.name(r));
      continue;
    }
    negative += *s == Sentiment::negative;
  }
  if (!missing.empty()) {
    std::sort(missing.begin(), missing.end());
    throw Error(ErrorCode::missing_label,
                fmt::format("topic {}: {} records without a sentiment label", t.topic_id, missing.size()),
                std::move(missing));
  }
  return 100.0 * static_cast<double>(negative) / static_cast<double>(t.records.size());
}

namespace {

std::string unquote(std::string_view s) {
  s = csv::trim(s);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return std::string(s);
}

}  // namespace

CategoryMap CategoryMap::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, fmt::format("cannot open {}", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

CategoryMap CategoryMap::parse(std::string_view text, std::string_view origin) {
  CategoryMap m;
  std::string section;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = csv::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(ErrorCode::config, fmt::format("{}:{}: unterminated section", origin, line_no));
      section = unquote(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::config, fmt::format("{}:{}: expected keyword = category", origin, line_no));
    }
    const std::string keyword = unquote(line.substr(0, eq));
    const std::string value = unquote(line.substr(eq + 1));
    const auto c = parse_topic_category(value);
    if (keyword.empty() || !c) {
      throw Error(ErrorCode::config, fmt::format("{}:{}: unknown category '{}'", origin, line_no, value));
    }
    m.set(section, keyword, *c);
  }
  return m;
}

void CategoryMap::set(std::string section, std::string keyword, TopicCategory c) {
  auto& entries = map_[section];
  if (entries.emplace(keyword, c).second) {
    order_[section].push_back(keyword);
  } else {
    entries[keyword] = c;
  }
}

std::optional<TopicCategory> CategoryMap::lookup(std::string_view section, std::string_view keyword) const {
  for (std::string_view s : {section, std::string_view{}}) {
    auto sit = map_.find(s);
    if (sit == map_.end()) continue;
    if (auto it = sit->second.find(keyword); it != sit->second.end()) return it->second;
  }
  return std::nullopt;
}

std::vector<std::string> CategoryMap::sections() const {
  std::vector<std::string> out;
  for (const auto& [s, _] : map_) out.push_back(s);
  return out;
}

std::vector<std::pair<std::string, TopicCategory>> CategoryMap::entries(std::string_view section) const {
  std::vector<std::pair<std::string, TopicCategory>> out;
  auto oit = order_.find(section);
  auto mit = map_.find(section);
  if (oit == order_.end() || mit == map_.end()) return out;
  for (const auto& k : oit->second) out.emplace_back(k, mit->second.find(k)->second);
  return out;
}

std::vector<CategoryMean> category_means(std::span<const TopicNegativity> topics) {
  std::vector<CategoryMean> out;
  for (auto c : {TopicCategory::politics, TopicCategory::covid, TopicCategory::religion, TopicCategory::football,
                 TopicCategory::generic}) {
    std::vector<double> user;
    std::vector<double> tweet;
    for (const auto& t : topics) {
      if (t.category != c) continue;
      tweet.push_back(t.tweet_negativity_pct);
      if (t.user_negativity_pct) user.push_back(*t.user_negativity_pct);
    }
    if (tweet.empty()) continue;
    CategoryMean m;
    m.category = c;
    m.topics = tweet.size();
    m.tweet_mean = stable_mean(tweet);
    if (!user.empty()) m.user_mean = stable_mean(user);
    out.push_back(m);
  }
  return out;
}

}  // namespace senm
