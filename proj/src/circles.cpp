#include "senm/circles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace senm {

namespace {

/// Distance from sorted[i] to its k-th nearest other point, walking outward from i.
double kth_neighbor_distance(const std::vector<double>& sorted, std::size_t i, std::size_t k) {
  std::size_t lo = i;
  std::size_t hi = i;
  double d = 0.0;
  for (std::size_t step = 0; step < k; ++step) {
    const bool can_left = lo > 0;
    const bool can_right = hi + 1 < sorted.size();
    const double left = can_left ? sorted[i] - sorted[lo - 1] : INFINITY;
    const double right = can_right ? sorted[hi + 1] - sorted[i] : INFINITY;
    if (left <= right) {
      d = left;
      --lo;
    } else {
      d = right;
      ++hi;
    }
  }
  return d;
}

std::optional<double> knn_mean(const std::vector<double>& sorted, double quantile) {
  const std::size_t n = sorted.size();
  if (n < 2) return std::nullopt;
  const auto k = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(quantile * static_cast<double>(n))), 1,
                                         n - 1);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += kth_neighbor_distance(sorted, i, k);
  return sum / static_cast<double>(n);
}

}  // namespace

std::optional<double> auto_bandwidth(std::span<const double> values, double quantile) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.size() < 2 || sorted.front() == sorted.back()) return std::nullopt;
  auto h = knn_mean(sorted, quantile);
  if (h && *h > 0.0) return h;
  // Heavy duplication can put every k-th neighbour at distance zero.
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  return knn_mean(sorted, quantile);
}

std::vector<MeanShiftCluster> mean_shift_1d(std::span<const double> values, std::optional<double> bandwidth,
                                            const MeanShiftParams& params) {
  const std::size_t n = values.size();
  if (n == 0) throw Error(ErrorCode::precondition, "mean_shift_1d needs at least one value");
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::precondition, "mean_shift_1d values must be finite");
  }
  if (bandwidth && !(*bandwidth > 0.0 && std::isfinite(*bandwidth))) {
    throw Error(ErrorCode::precondition, fmt::format("bandwidth must be positive, got {}", *bandwidth));
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> sorted(n);
  for (std::size_t i = 0; i < n; ++i) sorted[i] = values[order[i]];

  const std::optional<double> h = bandwidth ? bandwidth : auto_bandwidth(sorted);
  if (!h) {
    MeanShiftCluster c;
    c.mode = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(n);
    c.members.resize(n);
    std::iota(c.members.begin(), c.members.end(), std::size_t{0});
    return {c};
  }

  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + sorted[i];
  const double radius = *h * (1.0 + kWindowSlack);
  const double stop = params.tolerance * *h;

  std::vector<double> converged(n);
  for (std::size_t i = 0; i < n; ++i) {
    double x = sorted[i];
    for (int it = 0; it < params.max_iterations; ++it) {
      const auto lo = std::lower_bound(sorted.begin(), sorted.end(), x - radius) - sorted.begin();
      const auto hi = std::upper_bound(sorted.begin(), sorted.end(), x + radius) - sorted.begin();
      // The window always holds the seed's own basin, but guard against rounding.
      if (hi <= lo) break;
      const double next = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
      const double shift = std::abs(next - x);
      x = next;
      if (shift < stop) break;
    }
    converged[i] = x;
  }

  // Single-linkage merge of converged positions. Seeds are processed in value
  // order, and the flat-kernel map is monotone, so converged[] is non-decreasing
  // up to rounding; sort anyway to make the grouping independent of that.
  std::vector<std::size_t> by_pos(n);
  std::iota(by_pos.begin(), by_pos.end(), std::size_t{0});
  std::stable_sort(by_pos.begin(), by_pos.end(),
                   [&](std::size_t a, std::size_t b) { return converged[a] < converged[b]; });
  const double merge = params.merge_fraction * *h * (1.0 - kWindowSlack);

  std::vector<MeanShiftCluster> out;
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t s = by_pos[j];
    if (j == 0 || converged[s] - converged[by_pos[j - 1]] >= merge) {
      if (!out.empty()) out.back().mode = sum / static_cast<double>(out.back().members.size());
      out.emplace_back();
      sum = 0.0;
    }
    out.back().members.push_back(order[s]);
    sum += converged[s];
  }
  out.back().mode = sum / static_cast<double>(out.back().members.size());
  for (auto& c : out) std::sort(c.members.begin(), c.members.end());
  return out;
}

std::optional<std::size_t> EgoNetwork::cluster_of(AccountId alter) const {
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    if (std::binary_search(clusters[c].alters.begin(), clusters[c].alters.end(), alter)) return c;
  }
  return std::nullopt;
}

EgoNetwork build_ego_network(std::span<const Relationship> rels, const CircleOptions& options) {
  if (rels.empty()) throw Error(ErrorCode::empty_network, "ego has no relationships");
  EgoNetwork net;
  net.ego = rels.front().ego;

  // Canonical order so the result does not depend on input order.
  std::vector<const Relationship*> sorted;
  sorted.reserve(rels.size());
  for (const auto& r : rels) {
    if (r.ego != net.ego) throw Error(ErrorCode::precondition, "relationships span more than one ego");
    if (!(r.contact_frequency > 0.0)) {
      throw Error(ErrorCode::precondition, "contact frequency must be positive before clustering");
    }
    sorted.push_back(&r);
  }
  std::sort(sorted.begin(), sorted.end(), [](const Relationship* a, const Relationship* b) { return a->alter < b->alter; });

  std::vector<double> x(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    x[i] = options.log_frequency ? std::log(sorted[i]->contact_frequency) : sorted[i]->contact_frequency;
  }
  net.bandwidth = options.bandwidth ? options.bandwidth : auto_bandwidth(x, options.quantile);
  const auto ms = mean_shift_1d(x, net.bandwidth, options.mean_shift);

  net.clusters.reserve(ms.size());
  for (const auto& c : ms) {
    EgoCluster ec;
    ec.mode_frequency = options.log_frequency ? std::exp(c.mode) : c.mode;
    double sum = 0.0;
    for (std::size_t m : c.members) {
      ec.alters.push_back(sorted[m]->alter);
      sum += sorted[m]->contact_frequency;
    }
    ec.mean_frequency = sum / static_cast<double>(c.members.size());
    std::sort(ec.alters.begin(), ec.alters.end());
    net.clusters.push_back(std::move(ec));
  }
  std::sort(net.clusters.begin(), net.clusters.end(),
            [](const EgoCluster& a, const EgoCluster& b) { return a.mean_frequency > b.mean_frequency; });
  std::size_t total = 0;
  for (std::size_t c = 0; c < net.clusters.size(); ++c) {
    if (c > 0 && !(net.clusters[c].mean_frequency < net.clusters[c - 1].mean_frequency)) {
      throw Error(ErrorCode::precondition, "clusters with equal mean frequency after merging");
    }
    total += net.clusters[c].alters.size();
    net.circle_sizes.push_back(total);
  }
  return net;
}

}  // namespace senm
