#include "senm/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "senm/outputs.hpp"
#include "senm/parallel.hpp"

namespace senm {

using nlohmann::json;

std::string_view to_string(Stage s) noexcept {
  switch (s) {
    case Stage::ingest: return "ingest";
    case Stage::filter: return "filter";
    case Stage::circles: return "circles";
    case Stage::sign: return "sign";
    case Stage::stats: return "stats";
    case Stage::topics: return "topics";
  }
  return "?";
}

namespace {

constexpr std::size_t kMaxWarnings = 20;

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw Error(ErrorCode::config, fmt::format("config key '{}': bad value '{}'", key, value));
}

std::string shortest(double v) { return fmt::format("{}", v); }

}  // namespace

const std::vector<std::string_view>& PipelineConfig::keys() {
  static const std::vector<std::string_view> k{
      "dataset_type",        "dataset_region",     "max_malformed_fraction",
      "skip_nonhuman_filter", "min_tweets",         "min_span_days",
      "min_rate_per_3_days", "min_interactions_per_year",
      "log_frequency",       "bandwidth",          "bandwidth_quantile",
      "mean_shift_tolerance", "mean_shift_max_iterations", "mean_shift_merge_fraction",
      "threshold",           "neutral_handling",   "circle_aggregation",
      "topic_pool",          "topic_keep",         "topic_categories",
      "tables"};
  return k;
}

PipelineConfig PipelineConfig::from_keyvalues(const KeyValues& kv, const std::filesystem::path& base) {
  if (const auto unknown = kv.unknown_keys(keys()); !unknown.empty()) {
    throw Error(ErrorCode::config, fmt::format("unknown config key '{}'", unknown.front()), unknown);
  }
  PipelineConfig c;
  if (auto v = kv.get("dataset_type")) c.dataset_type = *v;
  if (auto v = kv.get("dataset_region")) c.dataset_region = *v;
  if (auto v = kv.get_double("max_malformed_fraction")) {
    if (*v < 0.0 || *v > 1.0) bad_value("max_malformed_fraction", *kv.get("max_malformed_fraction"));
    c.max_malformed_fraction = *v;
  }
  if (auto v = kv.get_bool("skip_nonhuman_filter")) c.skip_nonhuman_filter = *v;
  if (auto v = kv.get_int("min_tweets")) {
    if (*v < 0) bad_value("min_tweets", *kv.get("min_tweets"));
    c.irregular.min_records = static_cast<std::size_t>(*v);
  }
  if (auto v = kv.get_double("min_span_days")) c.irregular.min_span_days = *v;
  if (auto v = kv.get_double("min_rate_per_3_days")) c.irregular.min_rate_per_3_days = *v;
  if (auto v = kv.get_double("min_interactions_per_year")) c.inactive.min_per_year = *v;
  if (auto v = kv.get_bool("log_frequency")) c.circles.log_frequency = *v;
  if (auto v = kv.get("bandwidth")) {
    if (*v == "auto") {
      c.circles.bandwidth.reset();
    } else {
      const auto h = kv.get_double("bandwidth");
      if (!h || !(*h > 0.0)) bad_value("bandwidth", *v);
      c.circles.bandwidth = *h;
    }
  }
  if (auto v = kv.get_double("bandwidth_quantile")) {
    if (!(*v > 0.0 && *v <= 1.0)) bad_value("bandwidth_quantile", *kv.get("bandwidth_quantile"));
    c.circles.quantile = *v;
  }
  if (auto v = kv.get_double("mean_shift_tolerance")) c.circles.mean_shift.tolerance = *v;
  if (auto v = kv.get_int("mean_shift_max_iterations")) c.circles.mean_shift.max_iterations = static_cast<int>(*v);
  if (auto v = kv.get_double("mean_shift_merge_fraction")) c.circles.mean_shift.merge_fraction = *v;
  if (auto v = kv.get_double("threshold")) {
    if (!(*v > 0.0 && *v < 1.0)) bad_value("threshold", *kv.get("threshold"));
    c.signing.threshold = *v;
  }
  if (auto v = kv.get("neutral_handling")) {
    auto n = parse_neutral_handling(*v);
    if (!n) bad_value("neutral_handling", *v);
    c.signing.neutral_handling = *n;
  }
  if (auto v = kv.get("circle_aggregation")) {
    auto a = parse_circle_aggregation(*v);
    if (!a) bad_value("circle_aggregation", *v);
    c.aggregation = *a;
  }
  if (auto v = kv.get_int("topic_pool")) c.topic_pool = static_cast<std::size_t>(*v);
  if (auto v = kv.get_int("topic_keep")) c.topic_keep = static_cast<std::size_t>(*v);
  if (auto v = kv.get("topic_categories")) {
    if (v->empty()) {
      c.topic_categories.reset();
    } else {
      std::filesystem::path p(*v);
      c.topic_categories = p.is_relative() && !base.empty() ? base / p : p;
    }
  }
  if (auto v = kv.get_doubles("tables")) {
    c.tables.clear();
    for (double t : *v) {
      const int n = static_cast<int>(t);
      if (n != t || std::find(std::begin(kStatsTables), std::end(kStatsTables), n) == std::end(kStatsTables)) {
        bad_value("tables", *kv.get("tables"));
      }
      c.tables.push_back(n);
    }
    std::sort(c.tables.begin(), c.tables.end());
    c.tables.erase(std::unique(c.tables.begin(), c.tables.end()), c.tables.end());
  }
  return c;
}

KeyValues PipelineConfig::snapshot() const {
  KeyValues kv;
  kv.set("dataset_type", dataset_type);
  kv.set("dataset_region", dataset_region);
  kv.set("max_malformed_fraction", shortest(max_malformed_fraction));
  kv.set("skip_nonhuman_filter", skip_nonhuman_filter ? "true" : "false");
  kv.set("min_tweets", std::to_string(irregular.min_records));
  kv.set("min_span_days", shortest(irregular.min_span_days));
  kv.set("min_rate_per_3_days", shortest(irregular.min_rate_per_3_days));
  kv.set("min_interactions_per_year", shortest(inactive.min_per_year));
  kv.set("log_frequency", circles.log_frequency ? "true" : "false");
  kv.set("bandwidth", circles.bandwidth ? shortest(*circles.bandwidth) : "auto");
  kv.set("bandwidth_quantile", shortest(circles.quantile));
  kv.set("mean_shift_tolerance", shortest(circles.mean_shift.tolerance));
  kv.set("mean_shift_max_iterations", std::to_string(circles.mean_shift.max_iterations));
  kv.set("mean_shift_merge_fraction", shortest(circles.mean_shift.merge_fraction));
  kv.set("threshold", shortest(signing.threshold));
  kv.set("neutral_handling", std::string(to_string(signing.neutral_handling)));
  kv.set("circle_aggregation", std::string(to_string(aggregation)));
  kv.set("topic_pool", std::to_string(topic_pool));
  kv.set("topic_keep", std::to_string(topic_keep));
  kv.set("topic_categories", topic_categories ? topic_categories->string() : "");
  kv.set("tables", fmt::format("{}", fmt::join(tables, ",")));
  return kv;
}

namespace {

struct InputFile {
  std::string name;
  std::filesystem::path path;
  std::uintmax_t bytes = 0;
  std::string sha256;
};

InputFile digest_input(std::string name, const std::filesystem::path& path) {
  return InputFile{std::move(name), path, std::filesystem::file_size(path), sha256_file(path)};
}

std::string compute_manifest_id(const KeyValues& config, const std::vector<InputFile>& inputs, Stage until) {
  std::string canon = fmt::format("senm {}\nuntil {}\n", SENM_VERSION, to_string(until));
  for (const auto& [k, v] : config.items()) canon += fmt::format("{}={}\n", k, v);
  for (const auto& in : inputs) canon += fmt::format("{} {} {}\n", in.name, in.bytes, in.sha256);
  return sha256_hex(canon).substr(0, 16);
}

/// Per-stage bookkeeping: counters, timings and error wrapping.
class StageRunner {
 public:
  explicit StageRunner(PipelineResult& result) : result_(result) {}

  template <class F>
  void run(Stage stage, F&& body) {
    const auto start = std::chrono::steady_clock::now();
    StageRecord rec{stage, 0.0, {}};
    try {
      body(rec.counters);
    } catch (const StageError&) {
      throw;
    } catch (const Error& e) {
      throw StageError(stage, e);
    } catch (const std::bad_alloc&) {
      throw StageError(stage, Error(ErrorCode::io, "out of memory"));
    } catch (const std::exception& e) {
      throw StageError(stage, Error(ErrorCode::io, e.what()));
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result_.stages.push_back(std::move(rec));
  }

 private:
  PipelineResult& result_;
};

void add_warning(PipelineResult& r, std::string w) {
  r.warnings.push_back(std::move(w));
}

void write_manifest(OutputWriter& w, PipelineResult& result, const KeyValues& config,
                    const std::vector<InputFile>& inputs, Stage until) {
  json cfg = json::object();
  for (const auto& [k, v] : config.items()) cfg[k] = v;
  json in = json::array();
  for (const auto& f : inputs) in.push_back({{"name", f.name}, {"bytes", f.bytes}, {"sha256", f.sha256}});
  json counters = json::object();
  for (const auto& s : result.stages) counters[std::string(to_string(s.stage))] = s.counters;
  json out = json::array();
  for (const auto& [name, digest] : w.digests()) out.push_back({{"name", name}, {"sha256", digest}});
  json warnings = json::array();
  for (std::size_t i = 0; i < std::min(kMaxWarnings, result.warnings.size()); ++i) warnings.push_back(result.warnings[i]);
  json m{{"manifest_id", w.manifest_id()},
         {"senm_version", SENM_VERSION},
         {"until", to_string(until)},
         {"config", std::move(cfg)},
         {"inputs", std::move(in)},
         {"counters", std::move(counters)},
         {"warnings", std::move(warnings)},
         {"warning_count", result.warnings.size()},
         {"outputs", std::move(out)}};
  w.write(std::string(kManifestFile), FileKind::json, m.dump(2) + "\n");
  result.outputs = w.digests();
}

void write_timings(const RunOptions& run, const PipelineResult& result) {
  if (!run.timings) return;
  json t = json::object();
  double total = 0.0;
  for (const auto& s : result.stages) {
    t[std::string(to_string(s.stage))] = s.seconds;
    total += s.seconds;
  }
  t["total"] = total;
  t["jobs"] = run.jobs;
  std::ofstream out(*run.timings, std::ios::binary);
  out << t.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::io, fmt::format("cannot write {}", run.timings->string()));
}

void write_stats(OutputWriter& w, const DatasetStats& stats, const std::vector<int>& tables) {
  const std::set<int> selected(tables.begin(), tables.end());
  const std::span<const DatasetStats> one(&stats, 1);
  w.write("dataset_stats.json", FileKind::json, dataset_stats_json(stats, w.manifest_id()));
  w.write("stats.csv", FileKind::csv, stats_long_csv(one, selected));
  w.write("stats.md", FileKind::markdown, stats_markdown(one, selected));
  for (int t : selected) w.write(fmt::format("table{}.csv", t), FileKind::csv, stats_table_csv(one, t));
  if (const auto svg = circle_negativity_svg(stats); !svg.empty()) {
    w.write("circle_negativity.svg", FileKind::svg, svg);
  }
}

void stats_counters(const DatasetStats& s, std::map<std::string, std::size_t>& c) {
  c["egos"] = s.n_egos;
  c["relationships"] = s.n_relationships;
  c["interactions"] = s.n_interactions;
  c["five_circle_egos"] = s.n_five_circle_egos;
  c["unsigned_relationships"] = s.unsigned_relationships;
}

struct EgoWork {
  AccountLabel label;
  EgoDecision decision;
  ExtractionStats extraction;
  std::size_t relationships_in = 0;
  std::vector<Relationship> kept;
  std::optional<EgoNetwork> network;
  std::optional<SignedEgoNetwork> signed_network;
  std::size_t interactions = 0;
  std::optional<std::string> warning;
};

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& config, const RunOptions& run, Stage until, bool require_topics) {
  PipelineResult result;
  StageRunner stages(result);
  const unsigned jobs = std::max(1u, run.jobs);
  const auto in = [&](std::string_view name) { return run.in_dir / name; };
  const bool has_sentiments = std::filesystem::exists(in(kSentimentsFile));
  const bool has_topics_csv = std::filesystem::exists(in(kTopicsFile));
  const bool has_assignments = std::filesystem::exists(in(kTopicAssignmentsFile));
  const bool has_labels = std::filesystem::exists(in(kAccountLabelsFile));
  const bool do_topics = until == Stage::topics && (has_topics_csv || has_assignments);

  std::vector<InputFile> inputs;
  const KeyValues snapshot = config.snapshot();
  std::optional<OutputWriter> out;
  Dataset data;
  stages.run(Stage::ingest, [&](auto& c) {
    if (!std::filesystem::exists(in(kTimelinesFile))) {
      throw Error(ErrorCode::io, fmt::format("missing input {}", in(kTimelinesFile).string()));
    }
    for (auto name : {kTimelinesFile, kSentimentsFile, kTopicsFile, kTopicAssignmentsFile, kAccountLabelsFile}) {
      if (std::filesystem::exists(in(name))) inputs.push_back(digest_input(std::string(name), in(name)));
    }
    if (config.topic_categories) inputs.push_back(digest_input("topic_categories", *config.topic_categories));
    result.manifest_id = compute_manifest_id(snapshot, inputs, until);
    out.emplace(run.out_dir, result.manifest_id);

    ParseOptions po;
    po.jobs = jobs;
    po.max_malformed_fraction = config.max_malformed_fraction;
    ParseReport rep;
    data = parse_timelines(in(kTimelinesFile), po, &rep);
    c["lines"] = rep.lines;
    c["records"] = rep.records;
    c["malformed"] = rep.malformed;
    c["duplicate_ids"] = rep.duplicate_ids;
    c["timelines"] = data.timelines.size();
    c["accounts"] = data.accounts.size();
    json report{{"manifest", result.manifest_id}, {"lines", rep.lines},           {"records", rep.records},
                {"malformed", rep.malformed},      {"duplicate_ids", rep.duplicate_ids},
                {"timelines", data.timelines.size()}};
    json examples = json::array();
    for (const auto& m : rep.examples) examples.push_back({{"line", m.line}, {"reason", m.reason}});
    report["malformed_examples"] = std::move(examples);
    for (const auto& m : rep.examples) add_warning(result, fmt::format("timelines line {}: {}", m.line, m.reason));
    if (has_sentiments) {
      const auto j = join_sentiments(data, in(kSentimentsFile), config.max_malformed_fraction);
      c["sentiments_applied"] = j.applied;
      c["sentiments_unknown_records"] = j.unknown_records;
      c["sentiments_malformed"] = j.malformed;
      report["sentiments"] = {{"rows", j.rows}, {"applied", j.applied}, {"unknown_records", j.unknown_records},
                              {"malformed", j.malformed}};
    }
    if (has_topics_csv) {
      const auto j = join_topics(data, in(kTopicsFile), config.max_malformed_fraction);
      c["topics_applied"] = j.applied;
      report["topics"] = {{"rows", j.rows}, {"applied", j.applied}, {"unknown_records", j.unknown_records},
                          {"malformed", j.malformed}};
    }
    out->write("ingest_report.json", FileKind::json, report.dump(2) + "\n");
  });

  OutputWriter& writer = *out;
  auto finish = [&] {
    write_manifest(writer, result, snapshot, inputs, until);
    write_timings(run, result);
    return result;
  };
  if (until == Stage::ingest) return finish();

  std::vector<EgoWork> work(data.timelines.size());
  stages.run(Stage::filter, [&](auto& c) {
    ClassifyOptions co;
    co.skip_nonhuman_filter = config.skip_nonhuman_filter;
    if (has_labels) {
      auto loaded = load_account_labels(in(kAccountLabelsFile), data.accounts);
      co.overrides = std::move(loaded.labels);
      c["label_overrides_unknown"] = loaded.unknown_accounts;
    }
    const HeuristicClassifier classifier;
    parallel_for(data.timelines.size(), jobs, [&](std::size_t i) {
      const Timeline& tl = data.timelines[i];
      EgoWork& w = work[i];
      std::vector<std::string> warnings;
      const auto labels = classify_accounts(std::span(&tl, 1), classifier, co, &warnings, &data.accounts);
      w.label = labels.at(tl.ego);
      if (!warnings.empty()) w.warning = warnings.front();
      if (w.label.label == AccountClass::other) return;
      w.decision = filter_irregular_egos(tl, config.irregular);
      if (!w.decision.keep) return;
      const auto interactions = extract_interactions(tl, &w.extraction);
      const auto index = build_relationship_index(interactions);
      w.relationships_in = index.size();
      const double span_years = tl.span_years();
      for (const auto& [key, rel] : index) {
        if (!filter_inactive_relationships(rel, span_years, config.inactive)) continue;
        Relationship r = rel;
        r.contact_frequency = static_cast<double>(r.interaction_count) / span_years;
        w.interactions += r.interaction_count;
        w.kept.push_back(r);
      }
    });

    FilterReport& rep = result.filters;
    rep.egos_in = work.size();
    for (const auto& w : work) {
      if (w.warning) add_warning(result, *w.warning);
      if (w.label.label == AccountClass::other) {
        ++rep.removed_nonhuman;
        continue;
      }
      if (!w.decision.keep) {
        rep.count_irregular(*w.decision.reason);
        continue;
      }
      ++rep.egos_out;
      rep.relationships_in += w.relationships_in;
      rep.relationships_out += w.kept.size();
      rep.removed_inactive += w.relationships_in - w.kept.size();
      result.extraction.merge(w.extraction);
    }
    if (!rep.balanced()) throw Error(ErrorCode::precondition, "filter report does not balance");
    c["egos_in"] = rep.egos_in;
    c["egos_out"] = rep.egos_out;
    c["removed_nonhuman"] = rep.removed_nonhuman;
    c["removed_irregular"] = rep.removed_irregular;
    c["relationships_in"] = rep.relationships_in;
    c["relationships_out"] = rep.relationships_out;
    c["removed_inactive"] = rep.removed_inactive;
    c["interactions"] = result.extraction.interactions;
    c["non_communications"] = result.extraction.non_communications;
    c["downgraded_quotes"] = result.extraction.downgraded_quotes;
    c["self_targets"] = result.extraction.self_targets;
    writer.write("filter_report.json", FileKind::json, filter_report_json(rep, result.manifest_id));
  });
  if (until == Stage::filter) return finish();

  stages.run(Stage::circles, [&](auto& c) {
    parallel_for(work.size(), jobs, [&](std::size_t i) {
      if (work[i].kept.empty()) return;
      work[i].network = build_ego_network(work[i].kept, config.circles);
    });
    std::string lines;
    std::size_t networks = 0;
    std::size_t empty = 0;
    for (std::size_t i = 0; i < work.size(); ++i) {
      const auto& w = work[i];
      if (w.label.label == AccountClass::other || !w.decision.keep) continue;
      if (!w.network) {
        ++empty;
        continue;
      }
      ++networks;
      lines += ego_network_json(*w.network, data.accounts, w.interactions);
      lines += '\n';
    }
    c["networks"] = networks;
    c["empty_networks"] = empty;
    writer.write("ego_networks.jsonl", FileKind::jsonl, lines);
  });
  if (until == Stage::circles) return finish();

  stages.run(Stage::sign, [&](auto& c) {
    if (!has_sentiments) {
      throw Error(ErrorCode::missing_sentiment, fmt::format("signing needs {}", in(kSentimentsFile).string()));
    }
    parallel_for(work.size(), jobs, [&](std::size_t i) {
      EgoWork& w = work[i];
      if (!w.network) return;
      RelationshipIndex index;
      for (const auto& r : w.kept) index.emplace(RelationshipKey{r.ego, r.alter}, r);
      w.signed_network = sign_network(*w.network, index, config.signing, &data.accounts);
      w.kept.clear();
      w.kept.shrink_to_fit();
    });
    std::string lines;
    std::size_t signed_count = 0;
    std::size_t unsigned_count = 0;
    for (const auto& w : work) {
      if (!w.signed_network) continue;
      signed_count += w.signed_network->signs.size();
      unsigned_count += w.signed_network->unsigned_alters.size();
      lines += signed_network_json(*w.signed_network, data.accounts);
      lines += '\n';
    }
    c["signed_relationships"] = signed_count;
    c["unsigned_relationships"] = unsigned_count;
    writer.write("signed_networks.jsonl", FileKind::jsonl, lines);
  });
  if (until == Stage::sign) return finish();

  stages.run(Stage::stats, [&](auto& c) {
    StatsAccumulator acc;
    for (const auto& w : work) {
      if (w.signed_network) acc.add(*w.signed_network, w.interactions);
    }
    if (acc.size() == 0) throw Error(ErrorCode::empty_network, "no ego network survived filtering");
    DatasetStats s = acc.finish(config.aggregation);
    s.dataset_type = config.dataset_type;
    s.dataset_region = config.dataset_region;
    stats_counters(s, c);
    write_stats(writer, s, config.tables);
    result.stats = std::move(s);
  });
  if (until == Stage::stats) return finish();

  if (do_topics || (until == Stage::topics && require_topics)) {
    stages.run(Stage::topics, [&](auto& c) {
      if (!do_topics) {
        throw Error(ErrorCode::config, fmt::format("topics need {} or {} in {}", kTopicAssignmentsFile, kTopicsFile,
                                                   run.in_dir.string()));
      }
      std::vector<TopicAssignment> assignments;
      if (has_assignments) {
        TopicLoadReport rep;
        assignments = load_topic_assignments(in(kTopicAssignmentsFile), data, &rep);
        c["assignments_unknown_records"] = rep.unknown_records;
        c["assignments_malformed"] = rep.malformed;
      } else {
        assignments = assignments_from_records(data);
      }
      std::vector<std::string> warnings;
      const auto top = select_top_topics(assignments, config.topic_pool, config.topic_keep, &warnings);
      for (auto& w : warnings) add_warning(result, std::move(w));
      std::optional<CategoryMap> categories;
      if (config.topic_categories) categories = CategoryMap::load(*config.topic_categories);

      std::map<AccountId, const SignedEgoNetwork*> signed_by_ego;
      for (const auto& w : work) {
        if (w.signed_network) signed_by_ego.emplace(w.signed_network->network.ego, &*w.signed_network);
      }
      std::vector<TopicNegativity> rows(top.size());
      parallel_for(top.size(), jobs, [&](std::size_t i) {
        const auto& t = top[i];
        TopicNegativity& r = rows[i];
        r.topic_id = t.topic_id;
        r.keyword = t.keyword;
        r.users = t.users.size();
        r.records = t.records.size();
        if (categories) {
          const auto cat = categories->lookup(config.dataset_region, t.keyword);
          if (!cat) {
            throw Error(ErrorCode::config,
                        fmt::format("no category for topic keyword '{}' in section [{}]", t.keyword, config.dataset_region),
                        {t.keyword});
          }
          r.category = *cat;
        }
        r.user_negativity_pct = topic_user_negativity(t, signed_by_ego).pct;
        r.tweet_negativity_pct = topic_tweet_negativity(t, data);
      });
      const auto means = category_means(rows);
      c["topics_available"] = assignments.size();
      c["topics_selected"] = rows.size();
      writer.write("topics_user.csv", FileKind::csv, topics_user_csv(rows));
      writer.write("topics_tweet.csv", FileKind::csv, topics_tweet_csv(rows));
      writer.write("categories.csv", FileKind::csv, categories_csv(means));
      result.topics = std::move(rows);
    });
  }
  return finish();
}

PipelineResult run_stats_from_networks(const PipelineConfig& config, const RunOptions& run) {
  PipelineResult result;
  StageRunner stages(result);
  std::vector<InputFile> inputs;
  LoadedNetworks loaded;
  const KeyValues snapshot = config.snapshot();
  std::optional<OutputWriter> writer;
  stages.run(Stage::stats, [&](auto& c) {
    for (auto name : {"ego_networks.jsonl", "signed_networks.jsonl"}) {
      if (!std::filesystem::exists(run.in_dir / name)) {
        throw Error(ErrorCode::io, fmt::format("missing input {}", (run.in_dir / name).string()));
      }
      inputs.push_back(digest_input(name, run.in_dir / name));
    }
    result.manifest_id = compute_manifest_id(snapshot, inputs, Stage::stats);
    writer.emplace(run.out_dir, result.manifest_id);
    loaded = load_signed_networks(run.in_dir);
    StatsAccumulator acc;
    for (std::size_t i = 0; i < loaded.networks.size(); ++i) acc.add(loaded.networks[i], loaded.interactions[i]);
    if (acc.size() == 0) throw Error(ErrorCode::empty_network, "no ego networks in input");
    DatasetStats s = acc.finish(config.aggregation);
    s.dataset_type = config.dataset_type;
    s.dataset_region = config.dataset_region;
    stats_counters(s, c);
    write_stats(*writer, s, config.tables);
    result.stats = std::move(s);
  });
  write_manifest(*writer, result, snapshot, inputs, Stage::stats);
  write_timings(run, result);
  return result;
}

std::vector<std::pair<std::string, std::string>> write_report(const std::vector<std::filesystem::path>& stats_files,
                                                              const std::filesystem::path& out_dir,
                                                              const std::vector<int>& tables) {
  if (stats_files.empty()) throw Error(ErrorCode::config, "report needs at least one dataset_stats.json");
  std::vector<DatasetStats> stats;
  std::string canon = fmt::format("senm {} report\n", SENM_VERSION);
  json in = json::array();
  for (const auto& f : stats_files) {
    std::ifstream file(f, std::ios::binary);
    if (!file) throw Error(ErrorCode::io, fmt::format("cannot open {}", f.string()));
    std::stringstream ss;
    ss << file.rdbuf();
    const std::string text = ss.str();
    const auto digest = sha256_hex(text);
    canon += digest + "\n";
    in.push_back({{"name", f.filename().string()}, {"sha256", digest}});
    stats.push_back(parse_dataset_stats(text));
  }
  const std::set<int> selected(tables.begin(), tables.end());
  OutputWriter w(out_dir, sha256_hex(canon).substr(0, 16));
  w.write("stats.csv", FileKind::csv, stats_long_csv(stats, selected));
  w.write("stats.md", FileKind::markdown, stats_markdown(stats, selected));
  for (int t : selected) w.write(fmt::format("table{}.csv", t), FileKind::csv, stats_table_csv(stats, t));
  w.write("negativity_grid.csv", FileKind::csv, negativity_grid_csv(stats));
  json out = json::array();
  for (const auto& [name, digest] : w.digests()) out.push_back({{"name", name}, {"sha256", digest}});
  json m{{"manifest_id", w.manifest_id()}, {"senm_version", SENM_VERSION}, {"until", "report"},
         {"inputs", std::move(in)},        {"outputs", std::move(out)}};
  w.write(std::string(kManifestFile), FileKind::json, m.dump(2) + "\n");
  return w.digests();
}

KeyValues config_from_manifest(const std::filesystem::path& manifest, const std::filesystem::path& in_dir) {
  std::ifstream file(manifest, std::ios::binary);
  if (!file) throw Error(ErrorCode::io, fmt::format("cannot open {}", manifest.string()));
  json m;
  try {
    m = json::parse(file);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::config, fmt::format("{}: {}", manifest.string(), e.what()));
  }
  if (!m.contains("config") || !m["config"].is_object()) {
    throw Error(ErrorCode::config, fmt::format("{}: no config snapshot", manifest.string()));
  }
  KeyValues kv;
  for (const auto& [k, v] : m["config"].items()) kv.set(k, v.get<std::string>());
  std::vector<std::string> mismatched;
  for (const auto& f : m.value("inputs", json::array())) {
    const auto name = f.at("name").get<std::string>();
    std::filesystem::path p = in_dir / name;
    if (name == "topic_categories") p = kv.get("topic_categories").value_or("");
    if (!std::filesystem::exists(p) || sha256_file(p) != f.at("sha256").get<std::string>()) mismatched.push_back(name);
  }
  if (!mismatched.empty()) {
    throw Error(ErrorCode::config,
                fmt::format("inputs differ from manifest {}: {}", manifest.string(), fmt::join(mismatched, ", ")),
                mismatched);
  }
  return kv;
}

}  // namespace senm
