#include <cmath>
#include <map>

#include <gtest/gtest.h>
#include <json.hpp>

#include "senm/pipeline.hpp"
#include "senm/synth.hpp"
#include "support.hpp"

namespace senm {
namespace {

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& p) {
  std::vector<nlohmann::json> out;
  std::istringstream in(test::read_file(p));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line);
    if (j.contains("manifest") && j.size() == 1) continue;
    out.push_back(std::move(j));
  }
  return out;
}

SynthSpec small(std::size_t egos) {
  SynthSpec s;
  s.n_egos = egos;
  return s;
}

TEST(Synth, DeterministicAcrossRunsAndJobs) {
  test::TempDir a("synth_a"), b("synth_b"), c("synth_c");
  const auto spec = small(40);
  generate(spec, a.path(), 1);
  generate(spec, b.path(), 1);
  generate(spec, c.path(), 4);
  for (auto name : {"timelines.jsonl", "sentiments.csv", "ground_truth.jsonl"}) {
    const auto ref = test::read_file(a / name);
    EXPECT_FALSE(ref.empty());
    EXPECT_EQ(ref, test::read_file(b / name)) << name;
    EXPECT_EQ(ref, test::read_file(c / name)) << name;
  }
}

TEST(Synth, SeedChangesOutput) {
  test::TempDir a("seed_a"), b("seed_b");
  auto s = small(3);
  generate(s, a.path());
  s.seed += 1;
  generate(s, b.path());
  EXPECT_NE(test::read_file(a / "timelines.jsonl"), test::read_file(b / "timelines.jsonl"));
}

TEST(Synth, GroundTruthMatchesPlantEgo) {
  test::TempDir dir("truth");
  const auto spec = small(5);
  generate(spec, dir.path());
  const auto truth = read_jsonl(dir / "ground_truth.jsonl");
  ASSERT_EQ(truth.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    const auto ego = plant_ego(spec, i);
    EXPECT_EQ(truth[i]["ego_id"], ego.ego_id);
    ASSERT_EQ(truth[i]["alters"].size(), ego.alters.size());
    for (std::size_t k = 0; k < ego.alters.size(); ++k) {
      EXPECT_EQ(truth[i]["alters"][k]["interactions"], ego.alters[k].interactions);
      EXPECT_EQ(truth[i]["alters"][k]["band"], ego.alters[k].band);
    }
  }
}

TEST(Synth, EmittedRecordsAgreeWithTruth) {
  test::TempDir dir("emitted");
  const auto spec = small(3);
  const auto out = generate(spec, dir.path());
  auto data = parse_timelines(out.timelines);
  join_sentiments(data, out.sentiments);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto ego = plant_ego(spec, i);
    const auto* t = data.find_timeline(*data.accounts.find(ego.ego_id));
    ASSERT_NE(t, nullptr);
    EXPECT_NEAR(t->span_years(), spec.span_years, 1e-6);
    const auto idx = build_relationship_index(extract_interactions(*t));
    ASSERT_EQ(idx.size(), ego.alters.size());
    for (const auto& a : ego.alters) {
      const auto& r = idx.at({t->ego, *data.accounts.find(a.alter_id)});
      EXPECT_EQ(r.interaction_count, a.interactions);
      EXPECT_EQ(r.sentiment.negative, a.negatives);
      EXPECT_EQ(r.sentiment.unlabeled, 0u);
    }
  }
}

TEST(Synth, RejectsInseparableAndMalformedSpecs) {
  SynthSpec s;
  s.noise_cv = 0.5;
  EXPECT_THROW(validate(s), Error);
  s = SynthSpec{};
  s.band_sizes.pop_back();
  EXPECT_THROW(validate(s), Error);
  s = SynthSpec{};
  s.neg_prob = {1.5};
  EXPECT_THROW(validate(s), Error);
  EXPECT_THROW(load_synth_spec("/nonexistent/spec.conf"), Error);
}

TEST(Synth, LoadsSpecFile) {
  test::TempDir dir("specfile");
  test::write_file(dir / "s.conf", "n_egos = 7\nband_means = 30, 5\nband_sizes = 4, 20\nneg_prob = 0.1, 0.4\n");
  const auto s = load_synth_spec((dir / "s.conf").string());
  EXPECT_EQ(s.n_egos, 7u);
  EXPECT_EQ(s.band_means, (std::vector<double>{30, 5}));
  EXPECT_DOUBLE_EQ(s.neg_prob_for(1), 0.4);
  test::write_file(dir / "bad.conf", "n_eggs = 7\n");
  EXPECT_THROW(load_synth_spec((dir / "bad.conf").string()), Error);
}

// Independent enumeration of all 2^n negative/other label sequences.
double enumerate_negative_sign(unsigned n, double p) {
  double total = 0.0;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    const unsigned k = static_cast<unsigned>(__builtin_popcount(mask));
    const double prob = std::pow(p, k) * std::pow(1.0 - p, n - k);
    if (static_cast<long double>(k) / n > 0.17L) total += prob;
  }
  return total;
}

TEST(AnalyticNegativity, BinomialTailForTenInteractions) {
  const double closed = 1.0 - std::pow(0.7, 10) - 10 * 0.3 * std::pow(0.7, 9);
  EXPECT_NEAR(negative_sign_probability(10, 0.3), closed, 1e-12);
  EXPECT_NEAR(negative_sign_probability(10, 0.3), enumerate_negative_sign(10, 0.3), 1e-12);
  for (unsigned n = 1; n <= 14; ++n) {
    for (double p : {0.05, 0.17, 0.4, 0.9}) {
      EXPECT_NEAR(negative_sign_probability(n, p), enumerate_negative_sign(n, p), 1e-12) << n << " " << p;
    }
  }
  SynthSpec s;
  s.band_means = {10.0};
  s.band_sizes = {8.0};
  s.noise_cv = 0.0;
  s.span_years = 1.0;
  s.neg_prob = {0.3};
  EXPECT_NEAR(analytic_negativity(s).expected_pct, 100.0 * closed, 1e-9);
}

TEST(AnalyticNegativity, ExtremeProbabilities) {
  SynthSpec s;
  s.neg_prob = {0.0};
  EXPECT_DOUBLE_EQ(analytic_negativity(s).expected_pct, 0.0);
  s.neg_prob = {1.0};
  EXPECT_NEAR(analytic_negativity(s).expected_pct, 100.0, 1e-12);
  GoldenRatioPolicy ex;
  ex.neutral_handling = NeutralHandling::exclude;
  EXPECT_THROW(analytic_negativity(s, ex), Error);
}

TEST(AnalyticNegativity, DefaultSpecSurvivesInactiveFilter) {
  const auto a = analytic_negativity(SynthSpec{});
  EXPECT_GT(a.survival_probability, 0.999);
  EXPECT_GT(a.expected_pct, 0.0);
  EXPECT_LT(a.expected_pct, 100.0);
  ASSERT_EQ(a.band_negative_probability.size(), 5u);
  // Longer relationships concentrate around the 15% rate, below the threshold.
  EXPECT_LT(a.band_negative_probability[0], a.band_negative_probability[4]);
}

struct PipelineRun {
  test::TempDir in{"synth_in"};
  test::TempDir out{"synth_out"};
  PipelineResult result;

  explicit PipelineRun(const SynthSpec& spec, Stage until = Stage::stats) {
    generate(spec, in.path(), 4);
    PipelineConfig cfg;
    RunOptions run;
    run.in_dir = in.path();
    run.out_dir = out.path();
    run.jobs = 4;
    result = run_pipeline(cfg, run, until);
  }
};

TEST(SynthPipeline, NoiselessSingleBandGivesOneCircle) {
  SynthSpec s;
  s.n_egos = 30;
  s.band_means = {60.0};
  s.band_sizes = {40.0};
  s.noise_cv = 0.0;
  PipelineRun run(s, Stage::circles);
  const auto nets = read_jsonl(run.out / "ego_networks.jsonl");
  ASSERT_EQ(nets.size(), 30u);
  for (const auto& n : nets) EXPECT_EQ(n["n_circles"], 1) << n["ego_id"];
}

TEST(SynthPipeline, RecoversBandMemberships) {
  const auto spec = small(40);
  PipelineRun run(spec, Stage::circles);
  std::size_t total = 0;
  std::size_t matched = 0;
  for (const auto& n : read_jsonl(run.out / "ego_networks.jsonl")) {
    const std::string ego = n["ego_id"];
    const auto planted = plant_ego(spec, std::stoul(ego.substr(1)));
    std::map<std::string, std::size_t> band;
    for (const auto& a : planted.alters) band[a.alter_id] = a.band;
    total += planted.alters.size();
    for (std::size_t c = 0; c < n["clusters"].size(); ++c) {
      for (const auto& id : n["clusters"][c]["alter_ids"]) matched += band.at(id.get<std::string>()) == c;
    }
  }
  EXPECT_GE(static_cast<double>(matched), 0.95 * static_cast<double>(total)) << matched << " of " << total;
}

TEST(SynthPipeline, NegativityWithinThreeStandardErrors) {
  const auto spec = small(500);
  PipelineRun run(spec, Stage::sign);
  std::vector<double> pct;
  for (const auto& s : read_jsonl(run.out / "signed_networks.jsonl")) pct.push_back(s["negativity_pct"].get<double>());
  ASSERT_EQ(pct.size(), 500u);
  double mean = 0;
  for (double v : pct) mean += v;
  mean /= pct.size();
  double ss = 0;
  for (double v : pct) ss += (v - mean) * (v - mean);
  const double se = std::sqrt(ss / (pct.size() - 1) / pct.size());
  const double expected = analytic_negativity(spec).expected_pct;
  EXPECT_LE(std::abs(mean - expected), 3.0 * se) << mean << " vs " << expected << " se " << se;
}

}  // namespace
}  // namespace senm
