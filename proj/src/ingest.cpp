#include "senm/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <fstream>
#include <functional>
#include <istream>
#include <numeric>
#include <sstream>

#include <fmt/format.h>
#include <rapidjson/document.h>
#include <rapidjson/stringbuffer.h>
#include <rapidjson/writer.h>

#include "senm/csv.hpp"
#include "senm/parallel.hpp"

namespace senm {

namespace {

constexpr std::size_t kMaxExamples = 5;

bool has_visible_text(std::string_view text) noexcept {
  return std::any_of(text.begin(), text.end(),
                     [](unsigned char c) { return c != ' ' && c != '\t' && c != '\n' && c != '\r'; });
}

bool has_url(std::string_view text) noexcept {
  return text.find("http://") != std::string_view::npos || text.find("https://") != std::string_view::npos;
}

void check_malformed_fraction(std::size_t malformed, std::size_t total, double limit, std::string_view what) {
  if (total > 0 && static_cast<double>(malformed) > limit * static_cast<double>(total)) {
    throw Error(ErrorCode::corrupt_input,
                fmt::format("{}: {} of {} lines malformed (limit {:.0f}%)", what, malformed, total, limit * 100.0));
  }
}

}  // namespace

const Timeline* Dataset::find_timeline(AccountId ego) const {
  auto it = std::lower_bound(timelines.begin(), timelines.end(), ego,
                             [](const Timeline& t, AccountId e) { return t.ego < e; });
  return it != timelines.end() && it->ego == ego ? &*it : nullptr;
}

std::optional<std::string_view> validate_record(const RecordView& r) noexcept {
  if (r.id.empty()) return "empty id";
  if (r.author_id.empty()) return "empty author_id";
  if ((r.kind == RecordKind::reply || r.kind == RecordKind::quote_retweet) && r.target_ids.empty()) {
    return "reply or quote_retweet without target_ids";
  }
  for (auto t : r.target_ids) {
    if (t.empty()) return "empty target id";
  }
  return std::nullopt;
}

DatasetBuilder::DatasetBuilder() = default;

void DatasetBuilder::reserve(std::size_t records) { data_.records.reserve(records, records * 12); }

DatasetBuilder::AddResult DatasetBuilder::add(const RawRecord& r) {
  std::vector<std::string_view> targets(r.target_ids.begin(), r.target_ids.end());
  RecordView v{r.id, r.author_id, r.created_at, r.text, r.kind, targets, r.sentiment, r.topic_id};
  return add(v);
}

DatasetBuilder::AddResult DatasetBuilder::add(const RecordView& r) {
  if (validate_record(r)) return AddResult::invalid;
  bool inserted = false;
  const RecordIndex rid = data_.records.intern(r.id, &inserted);
  if (!inserted) return AddResult::duplicate_id;

  const AccountId author = data_.accounts.intern(r.author_id);
  // Targets can intern new accounts; size by_author_ lazily for authors only.
  scratch_targets_.clear();
  for (auto t : r.target_ids) {
    const AccountId a = data_.accounts.intern(t);
    if (std::find(scratch_targets_.begin(), scratch_targets_.end(), a) == scratch_targets_.end()) {
      scratch_targets_.push_back(a);
    }
  }
  if (by_author_.size() <= author.value) by_author_.resize(author.value + 1);
  Pending& p = by_author_[author.value];

  TimelineRecord rec;
  rec.created_at = r.created_at;
  rec.text_hash = std::hash<std::string_view>{}(r.text);
  rec.id = rid;
  rec.target_offset = static_cast<std::uint32_t>(p.targets.size());
  rec.target_count = static_cast<std::uint32_t>(scratch_targets_.size());
  rec.topic = r.topic_id ? static_cast<std::int32_t>(*r.topic_id) : TimelineRecord::kNoTopic;
  rec.kind = r.kind;
  rec.has_text = has_visible_text(r.text);
  rec.has_url = has_url(r.text);
  rec.sentiment = r.sentiment;
  p.targets.insert(p.targets.end(), scratch_targets_.begin(), scratch_targets_.end());
  p.records.push_back(rec);
  ++pending_records_;
  return AddResult::ok;
}

Dataset DatasetBuilder::finish() && {
  Dataset out;
  out.records = std::move(data_.records);

  // Renumber accounts so that id order is name order; downstream sorting by id
  // is then independent of input order.
  const std::size_t n_accounts = data_.accounts.size();
  std::vector<std::uint32_t> by_name(n_accounts);
  std::iota(by_name.begin(), by_name.end(), 0u);
  std::sort(by_name.begin(), by_name.end(), [&](std::uint32_t a, std::uint32_t b) {
    return data_.accounts.name(AccountId{a}) < data_.accounts.name(AccountId{b});
  });
  std::vector<AccountId> remap(n_accounts);
  out.accounts.reserve(n_accounts);
  for (std::uint32_t old : by_name) remap[old] = out.accounts.intern(data_.accounts.name(AccountId{old}));

  for (std::uint32_t old : by_name) {
    if (old >= by_author_.size() || by_author_[old].records.empty()) continue;
    Pending& p = by_author_[old];
    Timeline t;
    t.ego = remap[old];
    t.records = std::move(p.records);
    t.targets = std::move(p.targets);
    for (auto& a : t.targets) a = remap[a.value];
    std::sort(t.records.begin(), t.records.end(), [&](const TimelineRecord& a, const TimelineRecord& b) {
      if (a.created_at != b.created_at) return a.created_at < b.created_at;
      return out.records.name(a.id) < out.records.name(b.id);
    });
    t.span_start = t.records.front().created_at;
    t.span_end = t.records.back().created_at;
    out.timelines.push_back(std::move(t));
    std::vector<TimelineRecord>().swap(p.records);
    std::vector<AccountId>().swap(p.targets);
  }

  out.record_locations.resize(out.records.size());
  for (std::size_t ti = 0; ti < out.timelines.size(); ++ti) {
    const auto& recs = out.timelines[ti].records;
    for (std::size_t pi = 0; pi < recs.size(); ++pi) {
      out.record_locations[recs[pi].id.value] =
          RecordLocation{static_cast<std::uint32_t>(ti), static_cast<std::uint32_t>(pi)};
    }
  }
  return out;
}

namespace {

/// One parsed line; views point into the block buffer.
struct ParsedLine {
  std::string_view id;
  std::string_view author_id;
  std::string_view text;
  Timestamp created_at{};
  RecordKind kind = RecordKind::original;
  std::uint32_t target_begin = 0;
  std::uint32_t target_count = 0;
  std::size_t line = 0;
  const char* error = nullptr;
  /// A `{"manifest": ...}` provenance line; neither a record nor malformed.
  bool header = false;
};

struct ParsedPiece {
  std::vector<ParsedLine> lines;
  std::vector<std::string_view> targets;
  std::size_t physical_lines = 0;
};

std::string_view string_member(const rapidjson::Value& obj, const char* key, bool& ok) {
  auto it = obj.FindMember(key);
  if (it == obj.MemberEnd() || !it->value.IsString()) {
    ok = false;
    return {};
  }
  return std::string_view(it->value.GetString(), it->value.GetStringLength());
}

void parse_line(char* begin, ParsedLine& out, std::vector<std::string_view>& targets) {
  // Stack-backed pools avoid a heap allocation per line; in-situ strings need none.
  char value_buffer[4096];
  char parse_buffer[1024];
  rapidjson::MemoryPoolAllocator<> value_alloc(value_buffer, sizeof value_buffer);
  rapidjson::MemoryPoolAllocator<> parse_alloc(parse_buffer, sizeof parse_buffer);
  using PoolDocument = rapidjson::GenericDocument<rapidjson::UTF8<>, rapidjson::MemoryPoolAllocator<>,
                                                  rapidjson::MemoryPoolAllocator<>>;
  PoolDocument doc(&value_alloc, sizeof parse_buffer, &parse_alloc);
  doc.ParseInsitu(begin);
  if (doc.HasParseError() || !doc.IsObject()) {
    out.error = "invalid JSON object";
    return;
  }
  if (!doc.HasMember("id") && doc.HasMember("manifest")) {
    out.header = true;
    return;
  }
  bool ok = true;
  out.id = string_member(doc, "id", ok);
  out.author_id = string_member(doc, "author_id", ok);
  const auto created = string_member(doc, "created_at", ok);
  out.text = string_member(doc, "text", ok);
  const auto kind = string_member(doc, "kind", ok);
  if (!ok) {
    out.error = "missing or non-string field";
    return;
  }
  const auto ts = parse_rfc3339(created);
  if (!ts) {
    out.error = "bad created_at";
    return;
  }
  out.created_at = *ts;
  const auto k = parse_record_kind(kind);
  if (!k) {
    out.error = "unknown kind";
    return;
  }
  out.kind = *k;
  auto tit = doc.FindMember("target_ids");
  if (tit == doc.MemberEnd() || !tit->value.IsArray()) {
    out.error = "missing target_ids";
    return;
  }
  out.target_begin = static_cast<std::uint32_t>(targets.size());
  for (const auto& v : tit->value.GetArray()) {
    if (!v.IsString()) {
      targets.resize(out.target_begin);
      out.error = "non-string target id";
      return;
    }
    targets.emplace_back(v.GetString(), v.GetStringLength());
  }
  out.target_count = static_cast<std::uint32_t>(targets.size() - out.target_begin);
}

/// Parses all lines in [begin, end). `end` must point at a '\n' or the buffer's terminator.
ParsedPiece parse_piece(char* begin, char* end) {
  ParsedPiece piece;
  char* p = begin;
  while (p < end) {
    char* nl = static_cast<char*>(std::memchr(p, '\n', static_cast<std::size_t>(end - p)));
    char* line_end = nl ? nl : end;
    const std::size_t line_no = piece.physical_lines++;
    *line_end = '\0';
    std::string_view view(p, static_cast<std::size_t>(line_end - p));
    if (!csv::trim(view).empty()) {
      ParsedLine pl;
      pl.line = line_no;
      parse_line(p, pl, piece.targets);
      piece.lines.push_back(pl);
    }
    p = line_end + 1;
  }
  return piece;
}

Dataset parse_stream(std::istream& in, const ParseOptions& options, ParseReport* report) {
  ParseReport local;
  ParseReport& rep = report ? *report : local;
  rep = ParseReport{};
  DatasetBuilder builder;
  const unsigned jobs = std::max(1u, options.jobs);
  const std::size_t block = std::max<std::size_t>(options.block_bytes, 1 << 16);

  std::string buffer;
  std::string carry;
  std::size_t line_base = 0;
  std::vector<std::string_view> view_targets;

  while (in || !carry.empty()) {
    buffer.swap(carry);
    carry.clear();
    const std::size_t have = buffer.size();
    buffer.resize(have + block);
    in.read(buffer.data() + have, static_cast<std::streamsize>(block));
    buffer.resize(have + static_cast<std::size_t>(in.gcount()));
    const bool eof = !in;
    if (!eof) {
      // Keep the trailing partial line for the next block.
      const auto last_nl = buffer.rfind('\n');
      if (last_nl == std::string::npos) {
        carry.swap(buffer);
        continue;
      }
      carry.assign(buffer, last_nl + 1);
      buffer.resize(last_nl + 1);
    }
    if (buffer.empty()) break;
    buffer.push_back('\0');
    char* data = buffer.data();
    const std::size_t size = buffer.size() - 1;

    // Split at newlines into one piece per worker.
    std::vector<std::pair<char*, char*>> pieces;
    std::size_t start = 0;
    for (unsigned j = 0; j < jobs && start < size; ++j) {
      std::size_t stop = j + 1 == jobs ? size : std::min(size, start + size / jobs);
      while (stop < size && data[stop] != '\n') ++stop;
      pieces.emplace_back(data + start, data + stop);
      start = stop + 1;
    }
    std::vector<ParsedPiece> parsed(pieces.size());
    parallel_for(pieces.size(), jobs, [&](std::size_t i) { parsed[i] = parse_piece(pieces[i].first, pieces[i].second); });

    for (const auto& piece : parsed) {
      for (const auto& pl : piece.lines) {
        if (pl.header) continue;
        ++rep.lines;
        const char* error = pl.error;
        if (!error) {
          view_targets.assign(piece.targets.begin() + pl.target_begin,
                              piece.targets.begin() + pl.target_begin + pl.target_count);
          RecordView v{pl.id, pl.author_id, pl.created_at, pl.text, pl.kind, view_targets, std::nullopt, std::nullopt};
          switch (builder.add(v)) {
            case DatasetBuilder::AddResult::ok: ++rep.records; break;
            case DatasetBuilder::AddResult::duplicate_id:
              ++rep.duplicate_ids;
              error = "duplicate id";
              break;
            case DatasetBuilder::AddResult::invalid: error = "record invariant violated"; break;
          }
        }
        if (error) {
          ++rep.malformed;
          if (rep.examples.size() < kMaxExamples) rep.examples.push_back({line_base + pl.line + 1, error});
        }
      }
      line_base += piece.physical_lines;
    }
    if (eof) break;
  }
  check_malformed_fraction(rep.malformed, rep.lines, options.max_malformed_fraction, "timelines");
  return std::move(builder).finish();
}

}  // namespace

Dataset parse_timelines(const std::filesystem::path& path, const ParseOptions& options, ParseReport* report) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, fmt::format("cannot open {}", path.string()));
  return parse_stream(in, options, report);
}

Dataset parse_timelines_text(std::string text, const ParseOptions& options, ParseReport* report) {
  std::istringstream in(std::move(text));
  return parse_stream(in, options, report);
}

std::string to_jsonl(const RawRecord& r) {
  rapidjson::StringBuffer buf;
  rapidjson::Writer<rapidjson::StringBuffer> w(buf);
  auto str = [&](std::string_view s) { w.String(s.data(), static_cast<rapidjson::SizeType>(s.size())); };
  w.StartObject();
  w.Key("id");
  str(r.id);
  w.Key("author_id");
  str(r.author_id);
  w.Key("created_at");
  str(format_rfc3339(r.created_at));
  w.Key("text");
  str(r.text);
  w.Key("kind");
  str(to_string(r.kind));
  w.Key("target_ids");
  w.StartArray();
  for (const auto& t : r.target_ids) str(t);
  w.EndArray();
  w.EndObject();
  return std::string(buf.GetString(), buf.GetSize());
}

namespace {

template <class Apply>
JoinReport join_csv(Dataset& data, const std::filesystem::path& path, double limit, std::string_view header,
                    Apply&& apply) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, fmt::format("cannot open {}", path.string()));
  JoinReport rep;
  std::string line;
  std::vector<std::string> fields;
  bool first = true;
  while (std::getline(in, line)) {
    if (csv::trim(line).empty() || line.front() == '#') continue;
    const bool ok = csv::split(line, fields) && fields.size() == 2;
    if (first) {
      first = false;
      if (ok && csv::trim(fields[0]) == "record_id" && csv::trim(fields[1]) == header) continue;
    }
    ++rep.rows;
    if (!ok) {
      ++rep.malformed;
      continue;
    }
    const auto rid = data.records.find(csv::trim(fields[0]));
    if (!rid) {
      ++rep.unknown_records;
      continue;
    }
    if (apply(data.record(*rid), csv::trim(fields[1]))) {
      ++rep.applied;
    } else {
      ++rep.malformed;
    }
  }
  check_malformed_fraction(rep.malformed, rep.rows, limit, path.filename().string());
  return rep;
}

}  // namespace

JoinReport join_sentiments(Dataset& data, const std::filesystem::path& csv_path, double max_malformed_fraction) {
  return join_csv(data, csv_path, max_malformed_fraction, "label", [](TimelineRecord& r, std::string_view v) {
    const auto s = parse_sentiment(v);
    if (!s) return false;
    r.sentiment = s;
    return true;
  });
}

JoinReport join_topics(Dataset& data, const std::filesystem::path& csv_path, double max_malformed_fraction) {
  return join_csv(data, csv_path, max_malformed_fraction, "topic_id", [](TimelineRecord& r, std::string_view v) {
    std::int32_t topic = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), topic);
    if (ec != std::errc{} || ptr != v.data() + v.size() || topic == TimelineRecord::kNoTopic) return false;
    r.topic = topic;
    return true;
  });
}

std::vector<Interaction> extract_interactions(const Timeline& t, ExtractionStats* stats) {
  ExtractionStats local;
  ExtractionStats& st = stats ? *stats : local;
  std::vector<Interaction> out;
  for (const auto& r : t.records) {
    ++st.records;
    if (r.kind == RecordKind::original || r.kind == RecordKind::retweet) {
      ++st.non_communications;
      continue;
    }
    if (r.kind == RecordKind::quote_retweet && !r.has_text) {
      ++st.downgraded_quotes;
      continue;
    }
    for (AccountId alter : t.targets_of(r)) {
      if (alter == t.ego) {
        ++st.self_targets;
        continue;
      }
      out.push_back(Interaction{t.ego, alter, r.created_at, r.sentiment, r.id});
      ++st.interactions;
    }
  }
  return out;
}

RelationshipIndex build_relationship_index(std::span<const Interaction> interactions) {
  RelationshipIndex index;
  for (const auto& i : interactions) {
    auto [it, inserted] = index.try_emplace(RelationshipKey{i.ego, i.alter});
    Relationship& rel = it->second;
    if (inserted) {
      rel.ego = i.ego;
      rel.alter = i.alter;
    }
    ++rel.interaction_count;
    rel.sentiment.add(i.sentiment);
  }
  return index;
}

}  // namespace senm
