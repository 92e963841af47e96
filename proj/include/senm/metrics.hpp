#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "senm/circles.hpp"
#include "senm/signs.hpp"

namespace senm {

struct MeanCI {
  double mean = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::size_t n = 0;
};

/// Normal-approximation interval mean +- z * s / sqrt(n), s the sample stdev.
/// Values are summed in sorted order so the result does not depend on input order.
MeanCI mean_ci(std::span<const double> values, double z = 1.96);

/// Mean summed in sorted order. Precondition: non-empty.
double stable_mean(std::span<const double> values);

struct StructuralStats {
  std::size_t n_egos = 0;
  std::size_t n_relationships = 0;
  MeanCI network_size;
  MeanCI n_circles;
  std::size_t n_five_circle_egos = 0;
};

/// Throws Error{precondition} on an empty input.
StructuralStats structural_stats(std::span<const EgoNetwork> networks);

/// Mean cumulative circle sizes of egos with exactly `n_circles` circles, or
/// nullopt when there are none.
std::optional<std::vector<double>> circle_size_table(std::span<const EgoNetwork> networks, std::size_t n_circles = 5);

/// Unweighted mean of per-ego negativity_pct. Egos with no signed alter are skipped.
/// Throws Error{precondition} when nothing remains.
double user_negativity(std::span<const SignedEgoNetwork> signed_networks);

enum class CircleAggregation : std::uint8_t { ratio_of_sums, mean_of_ratios };
std::string_view to_string(CircleAggregation a) noexcept;
std::optional<CircleAggregation> parse_circle_aggregation(std::string_view s) noexcept;

struct CircleNegativity {
  double mean_count = 0.0;
  double pct = 0.0;
};

struct CircleNegativityTable {
  std::size_t n_egos = 0;
  std::vector<CircleNegativity> circles;
  /// max - min of pct over every circle but the outermost.
  double range_inner = 0.0;
};

/// Per cumulative circle: mean negatives per ego and the negative share. Only
/// signed alters count. nullopt when no ego has exactly `n_circles` circles.
std::optional<CircleNegativityTable> circle_negativity_table(
    std::span<const SignedEgoNetwork> signed_networks, std::size_t n_circles = 5,
    CircleAggregation aggregation = CircleAggregation::ratio_of_sums);

struct LabeledValue {
  std::string label;
  double value = 0.0;
};

/// max - min over values whose label is in `subset` (all values when empty).
/// Throws Error{precondition} when fewer than two remain.
double negativity_range(std::span<const LabeledValue> values, const std::set<std::string>& subset = {});

/// Everything the stats tables show for one dataset.
struct DatasetStats {
  std::string dataset_type;
  std::string dataset_region;
  std::size_t n_egos = 0;
  std::size_t n_relationships = 0;
  std::size_t n_interactions = 0;
  MeanCI network_size;
  MeanCI n_circles;
  std::size_t n_five_circle_egos = 0;
  std::optional<std::vector<double>> circle_sizes_5;
  std::optional<double> user_negativity_pct;
  std::optional<CircleNegativityTable> circle_negativity_5;
  std::size_t unsigned_relationships = 0;
};

/// Order-independent accumulator. Each ego contributes one summary; finish()
/// sorts by ego before reducing, so shard order never changes a bit.
class StatsAccumulator {
 public:
  void add(const SignedEgoNetwork& s, std::size_t interactions);
  void merge(StatsAccumulator&& other);
  DatasetStats finish(CircleAggregation aggregation = CircleAggregation::ratio_of_sums) const;
  std::size_t size() const noexcept { return egos_.size(); }

 private:
  struct EgoSummary {
    AccountId ego;
    std::size_t size = 0;
    std::size_t n_circles = 0;
    std::size_t interactions = 0;
    std::size_t unsigned_count = 0;
    std::optional<double> negativity_pct;
    /// Per circle, only for egos with five circles.
    std::vector<std::size_t> circle_sizes;
    std::vector<std::size_t> circle_negatives;
    std::vector<std::size_t> circle_signed;
  };
  std::vector<EgoSummary> egos_;
};

}  // namespace senm
