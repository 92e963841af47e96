#include "senm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace senm {

namespace {

struct CircleCounts {
  std::vector<std::size_t> negatives;
  std::vector<std::size_t> signed_alters;
};

/// Cumulative negative and signed counts per circle.
CircleCounts circle_counts(const SignedEgoNetwork& s) {
  CircleCounts c;
  std::size_t neg = 0;
  std::size_t sig = 0;
  for (const auto& cluster : s.network.clusters) {
    for (AccountId a : cluster.alters) {
      auto it = s.signs.find(a);
      if (it == s.signs.end()) continue;
      ++sig;
      neg += it->second == Sign::negative;
    }
    c.negatives.push_back(neg);
    c.signed_alters.push_back(sig);
  }
  return c;
}

CircleNegativityTable reduce_circles(std::span<const CircleCounts> egos, std::size_t n_circles,
                                     CircleAggregation aggregation) {
  CircleNegativityTable t;
  t.n_egos = egos.size();
  for (std::size_t k = 0; k < n_circles; ++k) {
    std::size_t neg = 0;
    std::size_t sig = 0;
    std::vector<double> ratios;
    for (const auto& e : egos) {
      neg += e.negatives[k];
      sig += e.signed_alters[k];
      if (e.signed_alters[k] > 0) {
        ratios.push_back(100.0 * static_cast<double>(e.negatives[k]) / static_cast<double>(e.signed_alters[k]));
      }
    }
    CircleNegativity c;
    c.mean_count = static_cast<double>(neg) / static_cast<double>(egos.size());
    if (aggregation == CircleAggregation::ratio_of_sums) {
      c.pct = sig ? 100.0 * static_cast<double>(neg) / static_cast<double>(sig) : 0.0;
    } else {
      c.pct = ratios.empty() ? 0.0 : stable_mean(ratios);
    }
    t.circles.push_back(c);
  }
  const std::size_t inner = n_circles > 1 ? n_circles - 1 : n_circles;
  auto [lo, hi] = std::minmax_element(t.circles.begin(), t.circles.begin() + static_cast<std::ptrdiff_t>(inner),
                                      [](const auto& a, const auto& b) { return a.pct < b.pct; });
  t.range_inner = hi->pct - lo->pct;
  return t;
}

}  // namespace

double stable_mean(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::precondition, "mean of an empty sample");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

MeanCI mean_ci(std::span<const double> values, double z) {
  MeanCI ci;
  ci.n = values.size();
  if (values.empty()) return ci;
  ci.mean = stable_mean(values);
  double half = 0.0;
  if (values.size() > 1) {
    std::vector<double> sq;
    sq.reserve(values.size());
    for (double v : values) sq.push_back((v - ci.mean) * (v - ci.mean));
    std::sort(sq.begin(), sq.end());
    const double var = std::accumulate(sq.begin(), sq.end(), 0.0) / static_cast<double>(values.size() - 1);
    half = z * std::sqrt(var) / std::sqrt(static_cast<double>(values.size()));
  }
  ci.lower = ci.mean - half;
  ci.upper = ci.mean + half;
  return ci;
}

StructuralStats structural_stats(std::span<const EgoNetwork> networks) {
  if (networks.empty()) throw Error(ErrorCode::precondition, "structural stats need at least one network");
  StructuralStats s;
  s.n_egos = networks.size();
  std::vector<double> sizes;
  std::vector<double> circles;
  for (const auto& n : networks) {
    sizes.push_back(static_cast<double>(n.active_network_size()));
    circles.push_back(static_cast<double>(n.n_circles()));
    s.n_relationships += n.active_network_size();
    s.n_five_circle_egos += n.n_circles() == 5;
  }
  s.network_size = mean_ci(sizes);
  s.n_circles = mean_ci(circles);
  return s;
}

std::optional<std::vector<double>> circle_size_table(std::span<const EgoNetwork> networks, std::size_t n_circles) {
  std::vector<std::size_t> sums(n_circles, 0);
  std::size_t count = 0;
  for (const auto& n : networks) {
    if (n.n_circles() != n_circles) continue;
    ++count;
    for (std::size_t k = 0; k < n_circles; ++k) sums[k] += n.circle_sizes[k];
  }
  if (count == 0) return std::nullopt;
  std::vector<double> out(n_circles);
  for (std::size_t k = 0; k < n_circles; ++k) out[k] = static_cast<double>(sums[k]) / static_cast<double>(count);
  return out;
}

double user_negativity(std::span<const SignedEgoNetwork> signed_networks) {
  std::vector<double> v;
  for (const auto& s : signed_networks) {
    if (s.negativity_pct) v.push_back(*s.negativity_pct);
  }
  if (v.empty()) throw Error(ErrorCode::precondition, "no ego with a signed relationship");
  return stable_mean(v);
}

std::string_view to_string(CircleAggregation a) noexcept {
  return a == CircleAggregation::ratio_of_sums ? "ratio_of_sums" : "mean_of_ratios";
}

std::optional<CircleAggregation> parse_circle_aggregation(std::string_view s) noexcept {
  if (s == "ratio_of_sums") return CircleAggregation::ratio_of_sums;
  if (s == "mean_of_ratios") return CircleAggregation::mean_of_ratios;
  return std::nullopt;
}

std::optional<CircleNegativityTable> circle_negativity_table(std::span<const SignedEgoNetwork> signed_networks,
                                                             std::size_t n_circles, CircleAggregation aggregation) {
  std::vector<CircleCounts> egos;
  for (const auto& s : signed_networks) {
    if (s.network.n_circles() == n_circles) egos.push_back(circle_counts(s));
  }
  if (egos.empty() || n_circles == 0) return std::nullopt;
  return reduce_circles(egos, n_circles, aggregation);
}

double negativity_range(std::span<const LabeledValue> values, const std::set<std::string>& subset) {
  std::optional<double> lo;
  std::optional<double> hi;
  std::size_t n = 0;
  for (const auto& v : values) {
    if (!subset.empty() && !subset.contains(v.label)) continue;
    ++n;
    lo = lo ? std::min(*lo, v.value) : v.value;
    hi = hi ? std::max(*hi, v.value) : v.value;
  }
  if (n < 2) throw Error(ErrorCode::precondition, fmt::format("a range needs at least two values, got {}", n));
  return *hi - *lo;
}

void StatsAccumulator::add(const SignedEgoNetwork& s, std::size_t interactions) {
  EgoSummary e;
  e.ego = s.network.ego;
  e.size = s.network.active_network_size();
  e.n_circles = s.network.n_circles();
  e.interactions = interactions;
  e.unsigned_count = s.unsigned_alters.size();
  e.negativity_pct = s.negativity_pct;
  if (e.n_circles == 5) {
    e.circle_sizes = s.network.circle_sizes;
    auto c = circle_counts(s);
    e.circle_negatives = std::move(c.negatives);
    e.circle_signed = std::move(c.signed_alters);
  }
  egos_.push_back(std::move(e));
}

void StatsAccumulator::merge(StatsAccumulator&& other) {
  egos_.insert(egos_.end(), std::make_move_iterator(other.egos_.begin()), std::make_move_iterator(other.egos_.end()));
  other.egos_.clear();
}

DatasetStats StatsAccumulator::finish(CircleAggregation aggregation) const {
  std::vector<const EgoSummary*> egos;
  for (const auto& e : egos_) egos.push_back(&e);
  std::sort(egos.begin(), egos.end(), [](const EgoSummary* a, const EgoSummary* b) { return a->ego < b->ego; });

  DatasetStats d;
  d.n_egos = egos.size();
  std::vector<double> sizes;
  std::vector<double> circles;
  std::vector<double> negativity;
  std::vector<std::size_t> size_sums(5, 0);
  std::vector<CircleCounts> five;
  for (const auto* e : egos) {
    d.n_relationships += e->size;
    d.n_interactions += e->interactions;
    d.unsigned_relationships += e->unsigned_count;
    sizes.push_back(static_cast<double>(e->size));
    circles.push_back(static_cast<double>(e->n_circles));
    if (e->negativity_pct) negativity.push_back(*e->negativity_pct);
    if (e->n_circles == 5) {
      ++d.n_five_circle_egos;
      for (std::size_t k = 0; k < 5; ++k) size_sums[k] += e->circle_sizes[k];
      five.push_back(CircleCounts{e->circle_negatives, e->circle_signed});
    }
  }
  d.network_size = mean_ci(sizes);
  d.n_circles = mean_ci(circles);
  if (!negativity.empty()) d.user_negativity_pct = stable_mean(negativity);
  if (d.n_five_circle_egos > 0) {
    std::vector<double> means(5);
    for (std::size_t k = 0; k < 5; ++k) {
      means[k] = static_cast<double>(size_sums[k]) / static_cast<double>(d.n_five_circle_egos);
    }
    d.circle_sizes_5 = means;
    d.circle_negativity_5 = reduce_circles(five, 5, aggregation);
  }
  return d;
}

}  // namespace senm
