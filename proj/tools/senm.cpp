// senm: command-line front end for the signed ego network pipeline.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "senm/outputs.hpp"
#include "senm/pipeline.hpp"
#include "senm/synth.hpp"

namespace {

constexpr int kExitData = 1;
constexpr int kExitUsage = 2;

/// Options shared by the pipeline subcommands. Flags override the config file.
struct PipelineFlags {
  std::string config;
  std::string replay;
  std::string in = ".";
  std::string out = "senm_out";
  std::string timings;
  unsigned jobs = 1;
  std::optional<long long> min_tweets;
  std::optional<double> min_span_days;
  std::optional<double> min_rate_per_3_days;
  bool skip_nonhuman_filter = false;
  std::optional<std::string> bandwidth;
  bool log_frequency = false;
  bool raw_frequency = false;
  std::optional<double> threshold;
  std::optional<std::string> neutral_handling;
  std::optional<std::string> aggregation;
  std::optional<std::string> dataset_type;
  std::optional<std::string> dataset_region;
  std::optional<std::string> topic_categories;
  std::vector<int> tables;
};

void add_pipeline_flags(CLI::App* cmd, PipelineFlags& f, senm::Stage stage) {
  cmd->add_option("--config", f.config, "key = value config file")->check(CLI::ExistingFile);
  cmd->add_option("--in", f.in, "input directory")->capture_default_str();
  cmd->add_option("--out", f.out, "output directory")->capture_default_str();
  cmd->add_option("--jobs", f.jobs, "worker threads")->capture_default_str()->check(CLI::Range(1u, 1024u));
  cmd->add_option("--timings", f.timings, "write per-stage wall-clock JSON here");
  cmd->add_option("--dataset-type", f.dataset_type, "dataset label (type)");
  cmd->add_option("--dataset-region", f.dataset_region, "dataset label (region); selects the topic-category section");
  if (stage >= senm::Stage::filter) {
    cmd->add_option("--min-tweets", f.min_tweets, "irregular-ego rule: minimum records");
    cmd->add_option("--min-span-days", f.min_span_days, "irregular-ego rule: minimum span in days");
    cmd->add_option("--min-rate-per-3-days", f.min_rate_per_3_days, "irregular-ego rule: records per 3 days");
    cmd->add_flag("--skip-nonhuman-filter", f.skip_nonhuman_filter, "label every account as people");
  }
  if (stage >= senm::Stage::circles) {
    cmd->add_option("--bandwidth", f.bandwidth, "auto or a positive number (in the clustering space)");
    auto* log = cmd->add_flag("--log-frequency", f.log_frequency, "cluster log contact frequency (default)");
    cmd->add_flag("--raw-frequency", f.raw_frequency, "cluster raw contact frequency")->excludes(log);
  }
  if (stage >= senm::Stage::sign) {
    cmd->add_option("--threshold", f.threshold, "golden-ratio threshold");
    cmd->add_option("--neutral-handling", f.neutral_handling, "denominator | exclude");
  }
  if (stage >= senm::Stage::stats) {
    cmd->add_option("--circle-aggregation", f.aggregation, "ratio_of_sums | mean_of_ratios");
    cmd->add_option("--table", f.tables, "tables to emit (1 2 3 4 6); repeatable")
        ->check(CLI::IsMember({1, 2, 3, 4, 6}));
  }
  if (stage >= senm::Stage::topics) cmd->add_option("--topic-categories", f.topic_categories, "keyword map");
}

senm::KeyValues merged_config(const PipelineFlags& f) {
  senm::KeyValues kv;
  if (!f.replay.empty()) {
    kv = senm::config_from_manifest(f.replay, f.in);
  } else if (!f.config.empty()) {
    kv = senm::KeyValues::load(f.config);
  }
  auto set = [&](const char* key, const auto& v) {
    if (v) kv.set(key, fmt::format("{}", *v));
  };
  set("min_tweets", f.min_tweets);
  set("min_span_days", f.min_span_days);
  set("min_rate_per_3_days", f.min_rate_per_3_days);
  set("bandwidth", f.bandwidth);
  set("threshold", f.threshold);
  set("neutral_handling", f.neutral_handling);
  set("circle_aggregation", f.aggregation);
  set("dataset_type", f.dataset_type);
  set("dataset_region", f.dataset_region);
  set("topic_categories", f.topic_categories);
  if (f.skip_nonhuman_filter) kv.set("skip_nonhuman_filter", "true");
  if (f.log_frequency) kv.set("log_frequency", "true");
  if (f.raw_frequency) kv.set("log_frequency", "false");
  if (!f.tables.empty()) kv.set("tables", fmt::format("{}", fmt::join(f.tables, ",")));
  return kv;
}

senm::PipelineConfig load_config(const PipelineFlags& f) {
  const auto base = f.config.empty() ? std::filesystem::path() : std::filesystem::path(f.config).parent_path();
  return senm::PipelineConfig::from_keyvalues(merged_config(f), base);
}

senm::RunOptions run_options(const PipelineFlags& f) {
  senm::RunOptions r;
  r.in_dir = f.in;
  r.out_dir = f.out;
  r.jobs = f.jobs;
  if (!f.timings.empty()) r.timings = f.timings;
  return r;
}

void summarize(const senm::PipelineResult& r, const std::string& out) {
  std::cerr << fmt::format("manifest {} -> {}\n", r.manifest_id, out);
  for (const auto& s : r.stages) std::cerr << fmt::format("  {:8} {:8.3f}s\n", senm::to_string(s.stage), s.seconds);
  if (r.stats) {
    const auto& s = *r.stats;
    std::cerr << fmt::format("  egos {} relationships {} five-circle {}", s.n_egos, s.n_relationships,
                             s.n_five_circle_egos);
    if (s.user_negativity_pct) std::cerr << fmt::format(" negativity {:.2f}%", *s.user_negativity_pct);
    std::cerr << '\n';
  }
  if (!r.warnings.empty()) std::cerr << fmt::format("  {} warnings (see run_manifest.json)\n", r.warnings.size());
}

int run_synth(const std::string& spec_name, const std::string& out, unsigned jobs, std::optional<std::size_t> egos,
              std::optional<std::uint64_t> seed, std::optional<double> span_years) {
  auto spec = senm::load_synth_spec(spec_name);
  if (egos) spec.n_egos = *egos;
  if (seed) spec.seed = *seed;
  if (span_years) spec.span_years = *span_years;
  senm::validate(spec);
  const std::string description = senm::describe(spec);
  const std::string id = senm::sha256_hex("synth\n" + description).substr(0, 16);
  const auto outputs = senm::generate(spec, out, jobs, id);
  const auto analytic = senm::analytic_negativity(spec);
  nlohmann::json m{{"manifest_id", id},
                   {"senm_version", SENM_VERSION},
                   {"until", "synth"},
                   {"spec", description},
                   {"egos", spec.n_egos},
                   {"records", outputs.records},
                   {"interactions", outputs.interactions},
                   {"analytic_negativity_pct", analytic.expected_pct},
                   {"analytic_survival_probability", analytic.survival_probability}};
  nlohmann::json files = nlohmann::json::array();
  for (const auto& p : {outputs.timelines, outputs.sentiments, outputs.ground_truth}) {
    files.push_back({{"name", p.filename().string()}, {"sha256", senm::sha256_file(p)}});
  }
  m["outputs"] = std::move(files);
  std::ofstream(std::filesystem::path(out) / "synth_manifest.json", std::ios::binary) << m.dump(2) << '\n';
  std::cerr << fmt::format("manifest {}: {} egos, {} records, {} interactions -> {}\n", id, spec.n_egos,
                           outputs.records, outputs.interactions, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Signed ego network pipeline"};
  app.set_version_flag("--version", std::string(SENM_VERSION));
  app.require_subcommand(1);

  struct Sub {
    const char* name;
    const char* help;
    senm::Stage stage;
  };
  const Sub subs[] = {
      {"ingest", "parse timelines and join side tables", senm::Stage::ingest},
      {"filter", "non-human, irregular-ego and inactive-relationship filters", senm::Stage::filter},
      {"circles", "cluster alters into circles", senm::Stage::circles},
      {"sign", "sign relationships", senm::Stage::sign},
      {"stats", "dataset statistics tables", senm::Stage::stats},
      {"topics", "per-topic and per-category negativity", senm::Stage::topics},
  };
  std::vector<PipelineFlags> flags(std::size(subs) + 1);
  std::vector<CLI::App*> cmds;
  for (std::size_t i = 0; i < std::size(subs); ++i) {
    auto* cmd = app.add_subcommand(subs[i].name, subs[i].help);
    add_pipeline_flags(cmd, flags[i], subs[i].stage);
    cmds.push_back(cmd);
  }
  PipelineFlags& run_flags = flags.back();
  auto* run_cmd = app.add_subcommand("run", "every stage; topics when topic input exists");
  add_pipeline_flags(run_cmd, run_flags, senm::Stage::topics);
  run_cmd->add_option("--replay", run_flags.replay, "reuse the config of a run manifest (inputs must match)")
      ->check(CLI::ExistingFile);

  std::string spec = "default";
  std::string synth_out = "synth_out";
  unsigned synth_jobs = 1;
  std::optional<std::size_t> synth_egos;
  std::optional<std::uint64_t> synth_seed;
  std::optional<double> synth_span;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset with planted structure");
  synth_cmd->add_option("--spec", spec, "default or a key = value spec file")->capture_default_str();
  synth_cmd->add_option("--out", synth_out, "output directory")->capture_default_str();
  synth_cmd->add_option("--jobs", synth_jobs, "worker threads")->check(CLI::Range(1u, 1024u));
  synth_cmd->add_option("--egos", synth_egos, "override n_egos");
  synth_cmd->add_option("--seed", synth_seed, "override seed");
  synth_cmd->add_option("--span-years", synth_span, "override span_years");

  std::vector<std::string> report_in;
  std::string report_out = "senm_report";
  std::vector<int> report_tables;
  auto* report_cmd = app.add_subcommand("report", "cross-dataset tables from several stats runs");
  report_cmd->add_option("--in", report_in, "dataset_stats.json files or run directories")->required();
  report_cmd->add_option("--out", report_out, "output directory")->capture_default_str();
  report_cmd->add_option("--table", report_tables, "tables to emit")->check(CLI::IsMember({1, 2, 3, 4, 6}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  std::string stage_name = "cli";
  try {
    if (synth_cmd->parsed()) {
      stage_name = "synth";
      return run_synth(spec, synth_out, synth_jobs, synth_egos, synth_seed, synth_span);
    }
    if (report_cmd->parsed()) {
      stage_name = "report";
      std::vector<std::filesystem::path> files;
      for (const auto& p : report_in) {
        files.push_back(std::filesystem::is_directory(p) ? std::filesystem::path(p) / "dataset_stats.json" : std::filesystem::path(p));
      }
      std::vector<int> tables = report_tables;
      if (tables.empty()) tables.assign(std::begin(senm::kStatsTables), std::end(senm::kStatsTables));
      const auto written = senm::write_report(files, report_out, tables);
      std::cerr << fmt::format("{} files -> {}\n", written.size(), report_out);
      return 0;
    }
    for (std::size_t i = 0; i <= std::size(subs); ++i) {
      const bool is_run = i == std::size(subs);
      CLI::App* cmd = is_run ? run_cmd : cmds[i];
      if (!cmd->parsed()) continue;
      const auto& f = flags[i];
      stage_name = "config";
      const auto config = load_config(f);
      const auto run = run_options(f);
      senm::PipelineResult result;
      const bool networks_only = !is_run && subs[i].stage == senm::Stage::stats &&
                                 !std::filesystem::exists(run.in_dir / senm::kTimelinesFile) &&
                                 std::filesystem::exists(run.in_dir / "signed_networks.jsonl");
      if (networks_only) {
        result = senm::run_stats_from_networks(config, run);
      } else {
        result = senm::run_pipeline(config, run, is_run ? senm::Stage::topics : subs[i].stage, !is_run);
      }
      summarize(result, f.out);
      return 0;
    }
  } catch (const senm::StageError& e) {
    std::cerr << fmt::format("senm: stage {} failed: {} [{}]\n", senm::to_string(e.stage()), e.what(),
                             senm::to_string(e.code()));
    for (std::size_t i = 0; i < std::min<std::size_t>(e.details().size(), 10); ++i) {
      std::cerr << "  " << e.details()[i] << '\n';
    }
    return e.code() == senm::ErrorCode::config ? kExitUsage : kExitData;
  } catch (const senm::Error& e) {
    std::cerr << fmt::format("senm: stage {} failed: {} [{}]\n", stage_name, e.what(), senm::to_string(e.code()));
    return e.code() == senm::ErrorCode::config ? kExitUsage : kExitData;
  } catch (const std::exception& e) {
    std::cerr << fmt::format("senm: stage {} failed: {}\n", stage_name, e.what());
    return kExitData;
  }
  return kExitUsage;
}
