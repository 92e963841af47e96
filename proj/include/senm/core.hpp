#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace senm {

/// UTC timestamp with second precision.
using Timestamp = std::chrono::sys_seconds;

enum class Sentiment : std::uint8_t { positive, neutral, negative };

enum class RecordKind : std::uint8_t { original, reply, mention_only, retweet, quote_retweet };

std::string_view to_string(Sentiment s) noexcept;
std::optional<Sentiment> parse_sentiment(std::string_view text) noexcept;

std::string_view to_string(RecordKind k) noexcept;
std::optional<RecordKind> parse_record_kind(std::string_view text) noexcept;

/// Accepts `YYYY-MM-DDThh:mm:ss[.frac](Z|+hh:mm|-hh:mm)`; fractions are truncated.
std::optional<Timestamp> parse_rfc3339(std::string_view text) noexcept;
/// Always emits `YYYY-MM-DDThh:mm:ssZ`.
std::string format_rfc3339(Timestamp t);

/// Dense index into a NameRegistry. The tag keeps account and record ids apart.
template <class Tag>
struct Id {
  std::uint32_t value = 0;

  friend constexpr auto operator<=>(Id, Id) = default;

  template <class H>
  friend H AbslHashValue(H h, Id id) {
    return H::combine(std::move(h), id.value);
  }
};

struct AccountTag;
struct RecordTag;
using AccountId = Id<AccountTag>;
using RecordIndex = Id<RecordTag>;

inline constexpr double kSecondsPerDay = 86400.0;
inline constexpr double kDaysPerYear = 365.25;

inline double days_between(Timestamp from, Timestamp to) noexcept {
  return static_cast<double>((to - from).count()) / kSecondsPerDay;
}

enum class ErrorCode {
  io,
  corrupt_input,
  precondition,
  empty_network,
  unsigned_relationship,
  missing_sentiment,
  missing_label,
  config,
};

std::string_view to_string(ErrorCode c) noexcept;

/// Every failure the library reports. `details` carries offending ids
/// (alter ids, record ids) when the error is about a specific set of items.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::vector<std::string> details = {})
      : std::runtime_error(message), code_(code), details_(std::move(details)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::vector<std::string>& details() const noexcept { return details_; }

 private:
  ErrorCode code_;
  std::vector<std::string> details_;
};

}  // namespace senm

template <class Tag>
struct std::hash<senm::Id<Tag>> {
  std::size_t operator()(senm::Id<Tag> id) const noexcept { return std::hash<std::uint32_t>{}(id.value); }
};
