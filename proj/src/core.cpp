#include "senm/core.hpp"
#include "senm/csv.hpp"
#include "senm/keyvalue.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace senm {

std::string_view to_string(Sentiment s) noexcept {
  switch (s) {
    case Sentiment::positive: return "positive";
    case Sentiment::neutral: return "neutral";
    case Sentiment::negative: return "negative";
  }
  return "?";
}

std::optional<Sentiment> parse_sentiment(std::string_view text) noexcept {
  if (text == "positive") return Sentiment::positive;
  if (text == "neutral") return Sentiment::neutral;
  if (text == "negative") return Sentiment::negative;
  return std::nullopt;
}

std::string_view to_string(RecordKind k) noexcept {
  switch (k) {
    case RecordKind::original: return "original";
    case RecordKind::reply: return "reply";
    case RecordKind::mention_only: return "mention_only";
    case RecordKind::retweet: return "retweet";
    case RecordKind::quote_retweet: return "quote_retweet";
  }
  return "?";
}

std::optional<RecordKind> parse_record_kind(std::string_view text) noexcept {
  if (text == "original") return RecordKind::original;
  if (text == "reply") return RecordKind::reply;
  if (text == "mention_only") return RecordKind::mention_only;
  if (text == "retweet") return RecordKind::retweet;
  if (text == "quote_retweet") return RecordKind::quote_retweet;
  return std::nullopt;
}

std::string_view to_string(ErrorCode c) noexcept {
  switch (c) {
    case ErrorCode::io: return "io";
    case ErrorCode::corrupt_input: return "corrupt_input";
    case ErrorCode::precondition: return "precondition";
    case ErrorCode::empty_network: return "empty_network";
    case ErrorCode::unsigned_relationship: return "unsigned_relationship";
    case ErrorCode::missing_sentiment: return "missing_sentiment";
    case ErrorCode::missing_label: return "missing_label";
    case ErrorCode::config: return "config";
  }
  return "?";
}

namespace {

bool read_fixed(std::string_view s, std::size_t pos, std::size_t len, int& out) noexcept {
  if (pos + len > s.size()) return false;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, out);
  return ec == std::errc{} && ptr == s.data() + pos + len;
}

}  // namespace

std::optional<Timestamp> parse_rfc3339(std::string_view s) noexcept {
  using namespace std::chrono;
  int y = 0, mo = 0, d = 0, hh = 0, mm = 0, ss = 0;
  if (s.size() < 20) return std::nullopt;
  if (!read_fixed(s, 0, 4, y) || s[4] != '-' || !read_fixed(s, 5, 2, mo) || s[7] != '-' ||
      !read_fixed(s, 8, 2, d) || (s[10] != 'T' && s[10] != 't' && s[10] != ' ') ||
      !read_fixed(s, 11, 2, hh) || s[13] != ':' || !read_fixed(s, 14, 2, mm) || s[16] != ':' ||
      !read_fixed(s, 17, 2, ss)) {
    return std::nullopt;
  }
  std::size_t pos = 19;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    const std::size_t digits_start = pos;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
    if (pos == digits_start) return std::nullopt;
  }
  if (pos >= s.size()) return std::nullopt;
  int offset_seconds = 0;
  if (s[pos] == 'Z' || s[pos] == 'z') {
    ++pos;
  } else if (s[pos] == '+' || s[pos] == '-') {
    const int sign = s[pos] == '+' ? 1 : -1;
    int oh = 0, om = 0;
    if (!read_fixed(s, pos + 1, 2, oh) || pos + 3 >= s.size() || s[pos + 3] != ':' ||
        !read_fixed(s, pos + 4, 2, om) || oh > 23 || om > 59) {
      return std::nullopt;
    }
    offset_seconds = sign * (oh * 3600 + om * 60);
    pos += 6;
  } else {
    return std::nullopt;
  }
  if (pos != s.size()) return std::nullopt;
  if (hh > 23 || mm > 59 || ss > 60) return std::nullopt;

  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  const auto leap_clamped = std::min(ss, 59);
  return sys_days{ymd} + hours{hh} + minutes{mm} + seconds{leap_clamped} - seconds{offset_seconds};
}

std::string format_rfc3339(Timestamp t) {
  using namespace std::chrono;
  const auto day_start = floor<days>(t);
  const year_month_day ymd{day_start};
  const auto secs = (t - day_start).count();
  return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}Z", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), secs / 3600,
                     (secs / 60) % 60, secs % 60);
}

}  // namespace senm

namespace senm::csv {

std::string_view trim(std::string_view s) noexcept {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

bool split(std::string_view line, std::vector<std::string>& fields) {
  fields.clear();
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  fields.push_back(std::move(current));
  return !quoted;
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace senm::csv

namespace senm {

namespace {

template <class T>
std::optional<T> parse_number(std::string_view s) {
  s = csv::trim(s);
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

KeyValues KeyValues::parse(std::string_view text, std::string_view origin) {
  KeyValues kv;
  kv.origin_ = std::string(origin);
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = csv::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::config, fmt::format("{}:{}: expected key = value", origin, line_no));
    }
    const auto key = csv::trim(line.substr(0, eq));
    if (key.empty()) throw Error(ErrorCode::config, fmt::format("{}:{}: empty key", origin, line_no));
    kv.values_[std::string(key)] = std::string(csv::trim(line.substr(eq + 1)));
  }
  return kv;
}

KeyValues KeyValues::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, fmt::format("cannot open {}", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

std::optional<std::string> KeyValues::get(std::string_view key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> KeyValues::get_double(std::string_view key) const {
  auto v = get(key);
  if (!v) return std::nullopt;
  auto d = parse_number<double>(*v);
  if (!d) throw Error(ErrorCode::config, fmt::format("{}: {} must be a number, got '{}'", origin_, key, *v));
  return d;
}

std::optional<long long> KeyValues::get_int(std::string_view key) const {
  auto v = get(key);
  if (!v) return std::nullopt;
  auto d = parse_number<long long>(*v);
  if (!d) throw Error(ErrorCode::config, fmt::format("{}: {} must be an integer, got '{}'", origin_, key, *v));
  return d;
}

std::optional<bool> KeyValues::get_bool(std::string_view key) const {
  auto v = get(key);
  if (!v) return std::nullopt;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw Error(ErrorCode::config, fmt::format("{}: {} must be true or false, got '{}'", origin_, key, *v));
}

std::optional<std::vector<double>> KeyValues::get_doubles(std::string_view key) const {
  auto v = get(key);
  if (!v) return std::nullopt;
  std::vector<double> out;
  std::string_view rest = *v;
  while (true) {
    const auto comma = rest.find(',');
    auto d = parse_number<double>(rest.substr(0, comma));
    if (!d) throw Error(ErrorCode::config, fmt::format("{}: {} must be a comma-separated list, got '{}'", origin_, key, *v));
    out.push_back(*d);
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return out;
}

std::vector<std::string> KeyValues::unknown_keys(const std::vector<std::string_view>& known) const {
  std::vector<std::string> out;
  for (const auto& [k, _] : values_) {
    if (std::find(known.begin(), known.end(), k) == known.end()) out.push_back(k);
  }
  return out;
}

}  // namespace senm
