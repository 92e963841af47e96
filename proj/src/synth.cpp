#include "senm/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/lognormal.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "senm/ingest.hpp"
#include "senm/keyvalue.hpp"
#include "senm/parallel.hpp"

namespace senm {

namespace {

constexpr std::size_t kEgoBatch = 32;

double lognormal_sigma(double cv) { return std::sqrt(std::log1p(cv * cv)); }

/// Independent stream per (seed, ego index), so egos can be generated in any order.
std::mt19937_64 ego_rng(std::uint64_t seed, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(static_cast<std::uint64_t>(index) >> 32)};
  return std::mt19937_64(seq);
}

struct EgoText {
  std::string timelines;
  std::string sentiments;
  std::string truth;
  std::size_t records = 0;
  std::size_t interactions = 0;
};

/// Draws one ego. When `text` is set the records are rendered too; the random
/// sequence is the same either way so plant_ego matches the files.
PlantedEgo draw_ego(const SynthSpec& spec, std::size_t index, EgoText* text) {
  auto rng = ego_rng(spec.seed, index);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double sigma = lognormal_sigma(spec.noise_cv);
  std::normal_distribution<double> jitter(-0.5 * sigma * sigma, sigma);
  const auto span_seconds = static_cast<std::int64_t>(std::llround(spec.span_years * kDaysPerYear * kSecondsPerDay));
  std::uniform_int_distribution<std::int64_t> when(0, span_seconds);
  std::uniform_int_distribution<int> kind_pick(0, 2);
  constexpr RecordKind kinds[] = {RecordKind::reply, RecordKind::mention_only, RecordKind::quote_retweet};

  PlantedEgo ego;
  ego.ego_id = synth_ego_name(index);
  std::size_t record_no = 0;
  RawRecord rec;
  rec.author_id = ego.ego_id;
  auto emit = [&](Timestamp at, RecordKind kind, std::string target, Sentiment label, bool with_text) {
    rec.id = fmt::format("{}r{:06d}", ego.ego_id, record_no);
    rec.created_at = at;
    rec.kind = kind;
    rec.text = with_text ? fmt::format("m{}", record_no) : std::string();
    rec.target_ids.clear();
    if (!target.empty()) rec.target_ids.push_back(std::move(target));
    ++record_no;
    text->timelines += to_jsonl(rec);
    text->timelines += '\n';
    text->sentiments += rec.id;
    text->sentiments += ',';
    text->sentiments += to_string(label);
    text->sentiments += '\n';
  };

  std::size_t alter_no = 0;
  for (std::size_t b = 0; b < spec.band_means.size(); ++b) {
    const double size = spec.band_sizes[b];
    const auto whole = static_cast<std::size_t>(std::floor(size));
    const std::size_t n = whole + (unit(rng) < size - static_cast<double>(whole) ? 1 : 0);
    for (std::size_t j = 0; j < n; ++j) {
      PlantedAlter a;
      a.alter_id = fmt::format("{}a{:04d}", ego.ego_id, alter_no++);
      a.band = b;
      a.neg_prob = spec.neg_prob_for(b);
      a.frequency = spec.band_means[b] * std::exp(jitter(rng));
      a.interactions = static_cast<std::uint32_t>(std::max(1LL, std::llround(a.frequency * spec.span_years)));
      ego.alters.push_back(std::move(a));
    }
  }

  if (text) {
    // Anchors pin the timeline span to exactly span_years.
    emit(spec.start, RecordKind::original, {}, Sentiment::neutral, true);
    emit(spec.start + std::chrono::seconds(span_seconds), RecordKind::original, {}, Sentiment::neutral, true);
  }
  for (auto& a : ego.alters) {
    for (std::uint32_t k = 0; k < a.interactions; ++k) {
      const auto at = spec.start + std::chrono::seconds(when(rng));
      const RecordKind kind = kinds[kind_pick(rng)];
      Sentiment label = Sentiment::positive;
      if (unit(rng) < a.neg_prob) {
        label = Sentiment::negative;
        ++a.negatives;
      } else if (unit(rng) < spec.neutral_share) {
        label = Sentiment::neutral;
      }
      if (text) emit(at, kind, a.alter_id, label, true);
    }
  }
  std::size_t interactions = 0;
  for (const auto& a : ego.alters) interactions += a.interactions;
  const auto retweets = static_cast<std::size_t>(std::llround(spec.retweet_fraction * static_cast<double>(interactions)));
  if (!ego.alters.empty()) {
    std::uniform_int_distribution<std::size_t> who(0, ego.alters.size() - 1);
    for (std::size_t k = 0; k < retweets; ++k) {
      const auto at = spec.start + std::chrono::seconds(when(rng));
      const auto& a = ego.alters[who(rng)];
      if (text) emit(at, RecordKind::retweet, a.alter_id, Sentiment::neutral, false);
    }
  }
  if (text) {
    text->records = record_no;
    text->interactions = interactions;
  }
  return ego;
}

nlohmann::json truth_json(const PlantedEgo& ego) {
  nlohmann::json alters = nlohmann::json::array();
  for (const auto& a : ego.alters) {
    alters.push_back({{"alter_id", a.alter_id},
                      {"band", a.band},
                      {"frequency", a.frequency},
                      {"interactions", a.interactions},
                      {"negatives", a.negatives},
                      {"neg_prob", a.neg_prob}});
  }
  return {{"ego_id", ego.ego_id}, {"alters", std::move(alters)}};
}

}  // namespace

void validate(const SynthSpec& s) {
  auto fail = [](const std::string& why) { throw Error(ErrorCode::config, "invalid synth spec: " + why); };
  if (s.band_means.empty()) fail("no bands");
  if (s.band_means.size() != s.band_sizes.size()) fail("band_means and band_sizes differ in length");
  if (s.neg_prob.size() != 1 && s.neg_prob.size() != s.band_means.size()) {
    fail("neg_prob needs one value or one per band");
  }
  for (double p : s.neg_prob) {
    if (!(p >= 0.0 && p <= 1.0)) fail("neg_prob outside [0, 1]");
  }
  if (!(s.neutral_share >= 0.0 && s.neutral_share <= 1.0)) fail("neutral_share outside [0, 1]");
  if (!(s.noise_cv >= 0.0)) fail("noise_cv must be non-negative");
  if (!(s.span_years > 0.0)) fail("span_years must be positive");
  if (!(s.retweet_fraction >= 0.0)) fail("retweet_fraction must be non-negative");
  for (std::size_t b = 0; b < s.band_means.size(); ++b) {
    if (!(s.band_means[b] > 0.0)) fail("band means must be positive");
    if (!(s.band_sizes[b] >= 0.0)) fail("band sizes must be non-negative");
    if (b == 0) continue;
    const double hi = s.band_means[b - 1];
    const double lo = s.band_means[b];
    if (!(lo < hi)) fail("band means must strictly decrease outward");
    // Each band spreads about cv * mean either side; require a gap of twice the combined spread.
    if (hi - lo < 2.0 * s.noise_cv * (hi + lo)) {
      fail(fmt::format("bands {} and {} ({} vs {}) are not separable at noise_cv {}", b - 1, b, hi, lo, s.noise_cv));
    }
  }
}

SynthSpec load_synth_spec(std::string_view name_or_path) {
  SynthSpec s;
  if (name_or_path == "default") return s;
  const auto kv = KeyValues::load(std::filesystem::path(name_or_path));
  const auto unknown = kv.unknown_keys({"n_egos", "band_means", "band_sizes", "noise_cv", "neg_prob", "neutral_share",
                                        "span_years", "retweet_fraction", "seed", "start"});
  if (!unknown.empty()) throw Error(ErrorCode::config, fmt::format("unknown synth spec key '{}'", unknown.front()));
  if (auto v = kv.get_int("n_egos")) s.n_egos = static_cast<std::size_t>(*v);
  if (auto v = kv.get_doubles("band_means")) s.band_means = *v;
  if (auto v = kv.get_doubles("band_sizes")) s.band_sizes = *v;
  if (auto v = kv.get_double("noise_cv")) s.noise_cv = *v;
  if (auto v = kv.get_doubles("neg_prob")) s.neg_prob = *v;
  if (auto v = kv.get_double("neutral_share")) s.neutral_share = *v;
  if (auto v = kv.get_double("span_years")) s.span_years = *v;
  if (auto v = kv.get_double("retweet_fraction")) s.retweet_fraction = *v;
  if (auto v = kv.get_int("seed")) s.seed = static_cast<std::uint64_t>(*v);
  if (auto v = kv.get("start")) {
    auto t = parse_rfc3339(*v);
    if (!t) throw Error(ErrorCode::config, fmt::format("synth spec: bad start '{}'", *v));
    s.start = *t;
  }
  validate(s);
  return s;
}

std::string describe(const SynthSpec& s) {
  return fmt::format(
      "n_egos={} band_means={} band_sizes={} noise_cv={} neg_prob={} neutral_share={} span_years={} "
      "retweet_fraction={} seed={} start={}",
      s.n_egos, fmt::join(s.band_means, ","), fmt::join(s.band_sizes, ","), s.noise_cv, fmt::join(s.neg_prob, ","),
      s.neutral_share, s.span_years, s.retweet_fraction, s.seed, format_rfc3339(s.start));
}

std::string synth_ego_name(std::size_t index) { return fmt::format("e{:05d}", index); }

PlantedEgo plant_ego(const SynthSpec& spec, std::size_t index) { return draw_ego(spec, index, nullptr); }

SynthOutputs generate(const SynthSpec& spec, const std::filesystem::path& dir, unsigned jobs,
                      std::string_view manifest_id) {
  validate(spec);
  std::filesystem::create_directories(dir);
  SynthOutputs out;
  out.timelines = dir / "timelines.jsonl";
  out.sentiments = dir / "sentiments.csv";
  out.ground_truth = dir / "ground_truth.jsonl";
  std::ofstream tl(out.timelines, std::ios::binary);
  std::ofstream se(out.sentiments, std::ios::binary);
  std::ofstream gt(out.ground_truth, std::ios::binary);
  if (!tl || !se || !gt) throw Error(ErrorCode::io, fmt::format("cannot write into {}", dir.string()));
  if (!manifest_id.empty()) {
    const std::string header = nlohmann::json{{"manifest", manifest_id}}.dump();
    tl << header << '\n';
    gt << header << '\n';
    se << "# manifest: " << manifest_id << '\n';
  }
  se << "record_id,label\n";

  for (std::size_t first = 0; first < spec.n_egos; first += kEgoBatch) {
    const std::size_t count = std::min(kEgoBatch, spec.n_egos - first);
    std::vector<EgoText> batch(count);
    parallel_for(count, jobs, [&](std::size_t i) {
      const auto ego = draw_ego(spec, first + i, &batch[i]);
      batch[i].truth = truth_json(ego).dump();
    });
    for (const auto& e : batch) {
      tl << e.timelines;
      se << e.sentiments;
      gt << e.truth << '\n';
      out.records += e.records;
      out.interactions += e.interactions;
    }
  }
  tl.close();
  se.close();
  gt.close();
  if (!tl || !se || !gt) throw Error(ErrorCode::io, fmt::format("failed writing into {}", dir.string()));
  return out;
}

double negative_sign_probability(std::uint32_t interactions, double neg_prob, const GoldenRatioPolicy& policy) {
  if (interactions == 0) return 0.0;
  if (neg_prob <= 0.0) return 0.0;
  if (neg_prob >= 1.0) return 1.0;
  const boost::math::binomial_distribution<double> bin(interactions, neg_prob);
  double p = 0.0;
  for (std::uint32_t k = 0; k <= interactions; ++k) {
    const SentimentCounts c{interactions - k, 0, k, 0};
    if (sign_relationship(c, policy) == Sign::negative) p += boost::math::pdf(bin, k);
  }
  return p;
}

AnalyticNegativity analytic_negativity(const SynthSpec& spec, const GoldenRatioPolicy& policy, double min_per_year) {
  validate(spec);
  if (policy.neutral_handling != NeutralHandling::count_in_denominator) {
    throw Error(ErrorCode::precondition, "analytic negativity assumes neutrals count in the denominator");
  }
  AnalyticNegativity out;
  const std::size_t bands = spec.band_means.size();
  const double sigma = lognormal_sigma(spec.noise_cv);
  const double mu = -0.5 * sigma * sigma;
  double survive_weighted = 0.0;
  double survive_total = 0.0;

  for (std::size_t b = 0; b < bands; ++b) {
    const double scale = spec.band_means[b] * spec.span_years;
    // P(count = c) where count = max(1, round(scale * X)), X lognormal with unit mean.
    auto cdf = [&](double c_edge) {
      if (c_edge <= 0.0) return 0.0;
      if (sigma == 0.0) return scale < c_edge ? 1.0 : 0.0;
      return boost::math::cdf(boost::math::lognormal_distribution<double>(mu, sigma), c_edge / scale);
    };
    double q = 0.0;
    double survive = 0.0;
    const auto c_max = static_cast<std::uint32_t>(std::ceil(scale * std::exp(mu + 12.0 * sigma))) + 2;
    for (std::uint32_t c = 1; c <= c_max; ++c) {
      const double lo = c == 1 ? 0.0 : cdf(c - 0.5);
      const double p = cdf(c + 0.5) - lo;
      if (p <= 0.0) continue;
      if (static_cast<double>(c) / spec.span_years < min_per_year) continue;
      survive += p;
      q += p * negative_sign_probability(c, spec.neg_prob_for(b), policy);
    }
    out.band_negative_probability.push_back(survive > 0.0 ? q / survive : 0.0);
    survive_weighted += survive * spec.band_sizes[b];
    survive_total += spec.band_sizes[b];
  }
  out.survival_probability = survive_total > 0.0 ? survive_weighted / survive_total : 1.0;

  // Expectation over the fractional band sizes: each fractional band adds one
  // alter with probability equal to its fractional part.
  std::vector<std::size_t> frac_bands;
  for (std::size_t b = 0; b < bands; ++b) {
    if (spec.band_sizes[b] != std::floor(spec.band_sizes[b])) frac_bands.push_back(b);
  }
  double expected = 0.0;
  double mass = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << frac_bands.size()); ++mask) {
    double w = 1.0;
    std::vector<double> sizes(bands);
    for (std::size_t b = 0; b < bands; ++b) sizes[b] = std::floor(spec.band_sizes[b]);
    for (std::size_t i = 0; i < frac_bands.size(); ++i) {
      const std::size_t b = frac_bands[i];
      const double f = spec.band_sizes[b] - sizes[b];
      if (mask >> i & 1) {
        sizes[b] += 1.0;
        w *= f;
      } else {
        w *= 1.0 - f;
      }
    }
    double n = 0.0;
    double neg = 0.0;
    for (std::size_t b = 0; b < bands; ++b) {
      n += sizes[b];
      neg += sizes[b] * out.band_negative_probability[b];
    }
    if (n == 0.0) continue;  // egos without alters never reach the negativity stats
    expected += w * 100.0 * neg / n;
    mass += w;
  }
  out.expected_pct = mass > 0.0 ? expected / mass : 0.0;
  return out;
}

}  // namespace senm
