#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>

#include "senm/core.hpp"

namespace senm {

enum class Sign : std::uint8_t { positive, negative };

inline char sign_symbol(Sign s) noexcept { return s == Sign::positive ? '+' : '-'; }

struct SentimentCounts {
  std::uint32_t positive = 0;
  std::uint32_t neutral = 0;
  std::uint32_t negative = 0;
  /// Interactions whose record never received a label from the sentiment join.
  std::uint32_t unlabeled = 0;

  std::uint32_t labeled() const noexcept { return positive + neutral + negative; }
  std::uint32_t total() const noexcept { return labeled() + unlabeled; }

  void add(std::optional<Sentiment> s) noexcept {
    if (!s) {
      ++unlabeled;
      return;
    }
    switch (*s) {
      case Sentiment::positive: ++positive; break;
      case Sentiment::neutral: ++neutral; break;
      case Sentiment::negative: ++negative; break;
    }
  }

  friend bool operator==(const SentimentCounts&, const SentimentCounts&) = default;
};

/// All interactions from one ego to one alter. Directed: (A,B) and (B,A) differ.
struct Relationship {
  AccountId ego;
  AccountId alter;
  std::uint32_t interaction_count = 0;
  /// Interactions per year; zero until assign_contact_frequency runs.
  double contact_frequency = 0.0;
  SentimentCounts sentiment;
  std::optional<Sign> sign;

  friend bool operator==(const Relationship&, const Relationship&) = default;
};

using RelationshipKey = std::pair<AccountId, AccountId>;
using RelationshipIndex = std::map<RelationshipKey, Relationship>;

}  // namespace senm
