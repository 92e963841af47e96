#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "senm/core.hpp"
#include "senm/signs.hpp"

namespace senm {

/// Planted structure for synthetic datasets. Band 0 is the innermost circle
/// and has the highest contact frequency.
struct SynthSpec {
  std::size_t n_egos = 200;
  /// Interactions per year at each band centre, strictly decreasing.
  std::vector<double> band_means{162.0, 54.0, 18.0, 6.0, 2.0};
  /// Alters per band. A fractional part is drawn as one extra alter with that probability.
  std::vector<double> band_sizes{1.5, 3.5, 10.0, 35.0, 100.0};
  /// Coefficient of variation of the lognormal frequency jitter.
  double noise_cv = 0.1;
  /// One value for every band, or one per band.
  std::vector<double> neg_prob{0.15};
  /// Share of non-negative interactions labelled neutral.
  double neutral_share = 0.3;
  double span_years = 3.0;
  /// Plain retweets added per interaction; never communications, they exercise extraction.
  double retweet_fraction = 0.05;
  std::uint64_t seed = 20240601;
  Timestamp start = std::chrono::sys_days{std::chrono::year{2020} / 1 / 1};

  double neg_prob_for(std::size_t band) const { return neg_prob.size() == 1 ? neg_prob[0] : neg_prob[band]; }
};

/// Throws Error{config} for an invalid or non-separable spec.
void validate(const SynthSpec& spec);

/// `default` or a key=value file (keys match the field names; lists are comma separated).
SynthSpec load_synth_spec(std::string_view name_or_path);
std::string describe(const SynthSpec& spec);

struct PlantedAlter {
  std::string alter_id;
  std::size_t band = 0;
  double frequency = 0.0;
  std::uint32_t interactions = 0;
  std::uint32_t negatives = 0;
  double neg_prob = 0.0;
};

struct PlantedEgo {
  std::string ego_id;
  std::vector<PlantedAlter> alters;
};

struct SynthOutputs {
  std::filesystem::path timelines;
  std::filesystem::path sentiments;
  std::filesystem::path ground_truth;
  std::size_t records = 0;
  std::size_t interactions = 0;
};

/// Ego names sort in index order, so ego i is the i-th ego in canonical order.
std::string synth_ego_name(std::size_t index);

/// Planted truth for one ego; a pure function of (spec, index).
PlantedEgo plant_ego(const SynthSpec& spec, std::size_t index);

/// Writes timelines.jsonl, sentiments.csv and ground_truth.jsonl into `dir`.
/// Output is byte-identical for a fixed spec regardless of `jobs`.
SynthOutputs generate(const SynthSpec& spec, const std::filesystem::path& dir, unsigned jobs = 1,
                      std::string_view manifest_id = {});

struct AnalyticNegativity {
  double expected_pct = 0.0;
  /// Probability that an alter survives the inactive-relationship filter; the
  /// expectation assumes survivors, so this should be ~1 for a meaningful result.
  double survival_probability = 1.0;
  /// Probability that an alter of each band is signed negative.
  std::vector<double> band_negative_probability;
};

/// Exact expected dataset negativity under the planted probabilities: the
/// lognormal count distribution per band, binomial tails against the signing
/// threshold, and the expectation over fractional band sizes. Only the
/// count-in-denominator neutral policy is supported.
AnalyticNegativity analytic_negativity(const SynthSpec& spec, const GoldenRatioPolicy& policy = {},
                                       double min_per_year = 1.0);

/// P(relationship with exactly `interactions` draws at `neg_prob` signs negative).
double negative_sign_probability(std::uint32_t interactions, double neg_prob, const GoldenRatioPolicy& policy = {});

}  // namespace senm
