#pragma once

#include <map>
#include <optional>
#include <string_view>
#include <vector>

#include "senm/circles.hpp"
#include "senm/model.hpp"
#include "senm/registry.hpp"

namespace senm {

enum class NeutralHandling : std::uint8_t { count_in_denominator, exclude };

std::string_view to_string(NeutralHandling n) noexcept;
/// Accepts "denominator" / "count_in_denominator" and "exclude".
std::optional<NeutralHandling> parse_neutral_handling(std::string_view s) noexcept;

struct GoldenRatioPolicy {
  /// Highest negative fraction that still signs positive (inclusive).
  double threshold = 0.17;
  NeutralHandling neutral_handling = NeutralHandling::count_in_denominator;
};

/// Positive iff negative / denominator <= threshold. Throws
/// Error{missing_sentiment} if any interaction is unlabeled and
/// Error{unsigned_relationship} if the denominator is zero.
Sign sign_relationship(const SentimentCounts& counts, const GoldenRatioPolicy& policy = {});
Sign sign_relationship(const Relationship& r, const GoldenRatioPolicy& policy = {});

struct SignedEgoNetwork {
  EgoNetwork network;
  std::map<AccountId, Sign> signs;
  /// Alters whose relationship could not be signed; they count in neither
  /// numerator nor denominator of negativity_pct.
  std::vector<AccountId> unsigned_alters;
  /// nullopt when no alter could be signed.
  std::optional<double> negativity_pct;

  std::size_t negative_count() const noexcept;
};

/// Signs every alter of `en` from `rels` (keyed by (ego, alter)). Missing or
/// unlabeled relationships raise Error{missing_sentiment}, listing alter ids
/// (names when `names` is given) in details().
SignedEgoNetwork sign_network(const EgoNetwork& en, const RelationshipIndex& rels, const GoldenRatioPolicy& policy = {},
                              const AccountRegistry* names = nullptr);

}  // namespace senm
