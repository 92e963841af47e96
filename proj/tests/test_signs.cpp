#include <random>

#include <gtest/gtest.h>

#include "senm/signs.hpp"

namespace senm {
namespace {

SentimentCounts counts(std::uint32_t pos, std::uint32_t neu, std::uint32_t neg, std::uint32_t unlabeled = 0) {
  SentimentCounts c;
  c.positive = pos;
  c.neutral = neu;
  c.negative = neg;
  c.unlabeled = unlabeled;
  return c;
}

// Direct fraction comparison in extended precision.
std::optional<Sign> oracle(std::uint32_t pos, std::uint32_t neu, std::uint32_t neg, bool exclude) {
  const long double denom = static_cast<long double>(pos) + neg + (exclude ? 0 : neu);
  if (denom == 0) return std::nullopt;
  return static_cast<long double>(neg) / denom <= 0.17L ? Sign::positive : Sign::negative;
}

TEST(SignRelationship, PublishedExamples) {
  EXPECT_EQ(sign_relationship(counts(5, 0, 1)), Sign::positive);
  EXPECT_EQ(sign_relationship(counts(0, 0, 1)), Sign::negative);
  EXPECT_EQ(sign_relationship(counts(83, 0, 17)), Sign::positive);
  EXPECT_EQ(sign_relationship(counts(82, 0, 18)), Sign::negative);
  EXPECT_EQ(sign_relationship(counts(4, 0, 1)), Sign::negative);
}

TEST(SignRelationship, ExhaustiveUpToTwelve) {
  std::size_t cases = 0;
  for (bool exclude : {false, true}) {
    GoldenRatioPolicy p;
    p.neutral_handling = exclude ? NeutralHandling::exclude : NeutralHandling::count_in_denominator;
    for (std::uint32_t total = 0; total <= 12; ++total) {
      for (std::uint32_t pos = 0; pos <= total; ++pos) {
        for (std::uint32_t neg = 0; pos + neg <= total; ++neg) {
          const std::uint32_t neu = total - pos - neg;
          if (!exclude) ++cases;
          const auto want = oracle(pos, neu, neg, exclude);
          if (!want) {
            EXPECT_THROW(sign_relationship(counts(pos, neu, neg), p), Error);
          } else {
            EXPECT_EQ(sign_relationship(counts(pos, neu, neg), p), *want) << pos << "," << neu << "," << neg;
          }
        }
      }
    }
  }
  EXPECT_EQ(cases, 455u);
}

TEST(SignRelationship, UnsignedAndUnlabeledErrors) {
  try {
    sign_relationship(counts(0, 0, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::unsigned_relationship);
  }
  GoldenRatioPolicy ex;
  ex.neutral_handling = NeutralHandling::exclude;
  try {
    sign_relationship(counts(0, 4, 0), ex);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::unsigned_relationship);
  }
  try {
    sign_relationship(counts(3, 0, 0, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::missing_sentiment);
  }
}

TEST(SignRelationship, NonPercentThresholds) {
  GoldenRatioPolicy p;
  p.threshold = 1.0 / 6.0;
  EXPECT_EQ(sign_relationship(counts(5, 0, 1), p), Sign::positive);
  EXPECT_EQ(sign_relationship(counts(83, 0, 17), p), Sign::negative);
  p.threshold = 0.5;
  EXPECT_EQ(sign_relationship(counts(1, 0, 1), p), Sign::positive);
}

// Properties: monotone in negatives and positives; neutrals never hurt under
// count_in_denominator.
TEST(SignRelationship, MonotoneProperties) {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 5000; ++t) {
    const auto c = counts(rng() % 60, rng() % 60, rng() % 60);
    if (c.labeled() == 0) continue;
    const Sign s = sign_relationship(c);
    auto more_neg = c;
    ++more_neg.negative;
    if (s == Sign::negative) EXPECT_EQ(sign_relationship(more_neg), Sign::negative);
    auto more_pos = c;
    ++more_pos.positive;
    if (s == Sign::positive) EXPECT_EQ(sign_relationship(more_pos), Sign::positive);
    auto more_neu = c;
    more_neu.neutral += 1 + rng() % 5;
    if (s == Sign::positive) EXPECT_EQ(sign_relationship(more_neu), Sign::positive);
  }
}

RelationshipIndex index_of(AccountId ego, const std::vector<SentimentCounts>& per_alter) {
  RelationshipIndex idx;
  for (std::uint32_t a = 0; a < per_alter.size(); ++a) {
    Relationship r;
    r.ego = ego;
    r.alter = AccountId{a};
    r.sentiment = per_alter[a];
    r.interaction_count = per_alter[a].total();
    idx.emplace(RelationshipKey{ego, r.alter}, r);
  }
  return idx;
}

EgoNetwork one_cluster(AccountId ego, std::uint32_t n) {
  EgoNetwork en;
  en.ego = ego;
  EgoCluster c;
  for (std::uint32_t a = 0; a < n; ++a) c.alters.push_back(AccountId{a});
  en.clusters.push_back(c);
  en.circle_sizes.push_back(n);
  return en;
}

TEST(SignNetwork, AllPositiveAndCountedNegatives) {
  const AccountId ego{100};
  const auto pos = index_of(ego, std::vector<SentimentCounts>(4, counts(3, 1, 0)));
  const auto s = sign_network(one_cluster(ego, 4), pos);
  EXPECT_DOUBLE_EQ(*s.negativity_pct, 0.0);
  std::vector<SentimentCounts> mixed(10, counts(5, 0, 0));
  for (int i = 0; i < 6; ++i) mixed[i] = counts(1, 0, 2);
  const auto m = sign_network(one_cluster(ego, 10), index_of(ego, mixed));
  EXPECT_DOUBLE_EQ(*m.negativity_pct, 60.0);
  EXPECT_EQ(m.negative_count(), 6u);
  EXPECT_EQ(m.signs.size(), 10u);
}

TEST(SignNetwork, MissingSentimentListsAlters) {
  const AccountId ego{100};
  auto idx = index_of(ego, {counts(1, 0, 0), counts(0, 0, 0, 2), counts(2, 0, 0)});
  idx.erase(RelationshipKey{ego, AccountId{2}});
  try {
    sign_network(one_cluster(ego, 3), idx);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::missing_sentiment);
    EXPECT_EQ(e.details(), (std::vector<std::string>{"1", "2"}));
  }
}

TEST(SignNetwork, UnsignedAltersAreExcludedFromPct) {
  const AccountId ego{100};
  GoldenRatioPolicy ex;
  ex.neutral_handling = NeutralHandling::exclude;
  const auto s = sign_network(one_cluster(ego, 3), index_of(ego, {counts(0, 5, 0), counts(0, 0, 1), counts(2, 0, 0)}), ex);
  EXPECT_EQ(s.unsigned_alters, (std::vector<AccountId>{AccountId{0}}));
  EXPECT_DOUBLE_EQ(*s.negativity_pct, 50.0);
  const auto none = sign_network(one_cluster(ego, 1), index_of(ego, {counts(0, 5, 0)}), ex);
  EXPECT_FALSE(none.negativity_pct);
}

TEST(NeutralHandling, ParsesBothSpellings) {
  EXPECT_EQ(parse_neutral_handling("denominator"), NeutralHandling::count_in_denominator);
  EXPECT_EQ(parse_neutral_handling("count_in_denominator"), NeutralHandling::count_in_denominator);
  EXPECT_EQ(parse_neutral_handling("exclude"), NeutralHandling::exclude);
  EXPECT_FALSE(parse_neutral_handling("ignore"));
}

}  // namespace
}  // namespace senm
