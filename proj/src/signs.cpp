#include "senm/signs.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "senm/registry.hpp"

namespace senm {

std::string_view to_string(NeutralHandling n) noexcept {
  return n == NeutralHandling::count_in_denominator ? "denominator" : "exclude";
}

std::optional<NeutralHandling> parse_neutral_handling(std::string_view s) noexcept {
  if (s == "denominator" || s == "count_in_denominator") return NeutralHandling::count_in_denominator;
  if (s == "exclude") return NeutralHandling::exclude;
  return std::nullopt;
}

Sign sign_relationship(const SentimentCounts& c, const GoldenRatioPolicy& policy) {
  if (c.unlabeled > 0) {
    throw Error(ErrorCode::missing_sentiment, fmt::format("{} interactions without a sentiment label", c.unlabeled));
  }
  const std::uint64_t denominator =
      policy.neutral_handling == NeutralHandling::count_in_denominator ? c.labeled() : c.positive + c.negative;
  if (denominator == 0) throw Error(ErrorCode::unsigned_relationship, "no interactions count toward the ratio");
  // Exact for the default threshold: 17/100 itself must land on the positive side,
  // so compare in integers when the threshold is a whole percentage.
  const double scaled = policy.threshold * 100.0;
  const double rounded = std::round(scaled);
  if (std::abs(scaled - rounded) < 1e-9) {
    return 100 * static_cast<std::uint64_t>(c.negative) <= static_cast<std::uint64_t>(rounded) * denominator
               ? Sign::positive
               : Sign::negative;
  }
  const double fraction = static_cast<double>(c.negative) / static_cast<double>(denominator);
  return fraction <= policy.threshold ? Sign::positive : Sign::negative;
}

Sign sign_relationship(const Relationship& r, const GoldenRatioPolicy& policy) {
  return sign_relationship(r.sentiment, policy);
}

std::size_t SignedEgoNetwork::negative_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(signs.begin(), signs.end(), [](const auto& kv) { return kv.second == Sign::negative; }));
}

SignedEgoNetwork sign_network(const EgoNetwork& en, const RelationshipIndex& rels, const GoldenRatioPolicy& policy,
                              const AccountRegistry* names) {
  SignedEgoNetwork out;
  out.network = en;
  std::vector<AccountId> missing;
  std::size_t negative = 0;
  for (const auto& cluster : en.clusters) {
    for (AccountId alter : cluster.alters) {
      auto it = rels.find(RelationshipKey{en.ego, alter});
      if (it == rels.end() || it->second.sentiment.unlabeled > 0) {
        missing.push_back(alter);
        continue;
      }
      try {
        const Sign s = sign_relationship(it->second.sentiment, policy);
        out.signs.emplace(alter, s);
        negative += s == Sign::negative;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::unsigned_relationship) throw;
        out.unsigned_alters.push_back(alter);
      }
    }
  }
  if (!missing.empty()) {
    std::sort(missing.begin(), missing.end());
    std::vector<std::string> ids;
    for (AccountId a : missing) ids.push_back(names ? std::string(names->name(a)) : std::to_string(a.value));
    const std::string ego = names ? std::string(names->name(en.ego)) : std::to_string(en.ego.value);
    throw Error(ErrorCode::missing_sentiment,
                fmt::format("ego {}: {} alters lack sentiment labels", ego, missing.size()), std::move(ids));
  }
  std::sort(out.unsigned_alters.begin(), out.unsigned_alters.end());
  if (!out.signs.empty()) {
    out.negativity_pct = 100.0 * static_cast<double>(negative) / static_cast<double>(out.signs.size());
  }
  return out;
}

}  // namespace senm
