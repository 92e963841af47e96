#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "senm/core.hpp"
#include "senm/model.hpp"

namespace senm {

struct MeanShiftCluster {
  double mode = 0.0;
  /// Indices into the input, ascending.
  std::vector<std::size_t> members;
};

struct MeanShiftParams {
  /// Convergence when a shift is below this fraction of the bandwidth.
  double tolerance = 1e-4;
  int max_iterations = 300;
  /// Converged seeds closer than this fraction of the bandwidth share a mode.
  double merge_fraction = 0.5;
};

/// Relative slack on the kernel radius so that points exactly one bandwidth
/// apart stay inside each other's window despite rounding.
inline constexpr double kWindowSlack = 1e-9;

/// Flat-kernel MeanShift seeded at every point. Clusters come back ordered by
/// ascending mode. Without a bandwidth, auto_bandwidth is used; a degenerate
/// input forms one cluster. Throws Error{precondition} on empty input, a
/// non-finite value or a non-positive bandwidth.
std::vector<MeanShiftCluster> mean_shift_1d(std::span<const double> values,
                                            std::optional<double> bandwidth = std::nullopt,
                                            const MeanShiftParams& params = {});

/// Mean over points of the distance to the k-th nearest other point,
/// k = ceil(quantile * n). Returns nullopt when fewer than two distinct values exist.
std::optional<double> auto_bandwidth(std::span<const double> values, double quantile = 0.3);

struct CircleOptions {
  /// Cluster log(frequency) rather than frequency.
  bool log_frequency = true;
  /// Fixed bandwidth in the clustering space; nullopt selects auto_bandwidth.
  std::optional<double> bandwidth;
  double quantile = 0.3;
  MeanShiftParams mean_shift;
};

struct EgoCluster {
  /// Mode mapped back to interactions per year.
  double mode_frequency = 0.0;
  double mean_frequency = 0.0;
  /// Sorted by id.
  std::vector<AccountId> alters;
};

struct EgoNetwork {
  AccountId ego;
  /// Strongest first.
  std::vector<EgoCluster> clusters;
  /// circle_sizes[k] = |clusters[0..k]|.
  std::vector<std::size_t> circle_sizes;
  /// Bandwidth actually used in the clustering space; nullopt when degenerate.
  std::optional<double> bandwidth;

  std::size_t n_circles() const noexcept { return clusters.size(); }
  std::size_t active_network_size() const noexcept { return circle_sizes.empty() ? 0 : circle_sizes.back(); }
  /// Index of the cluster holding `alter`, or nullopt.
  std::optional<std::size_t> cluster_of(AccountId alter) const;
};

/// Clusters one ego's relationships by contact frequency. All relationships must
/// share an ego and have positive frequency. Throws Error{empty_network} for none.
EgoNetwork build_ego_network(std::span<const Relationship> rels, const CircleOptions& options = {});

}  // namespace senm
