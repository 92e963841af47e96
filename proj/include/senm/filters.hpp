#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "senm/core.hpp"
#include "senm/ingest.hpp"
#include "senm/model.hpp"

namespace senm {

enum class AccountClass : std::uint8_t { people, other };
enum class LabelSource : std::uint8_t { classifier, heuristic, manual };

std::string_view to_string(AccountClass c) noexcept;
std::optional<AccountClass> parse_account_class(std::string_view s) noexcept;
std::string_view to_string(LabelSource s) noexcept;

struct AccountLabel {
  AccountId account;
  AccountClass label = AccountClass::people;
  LabelSource source = LabelSource::classifier;

  friend bool operator==(const AccountLabel&, const AccountLabel&) = default;
};

/// Inputs to the human/other decision. All fractions are over the whole timeline.
struct AccountFeatures {
  std::size_t records = 0;
  /// Coefficient of variation of gaps between consecutive records; 0 means clockwork.
  double cadence_cv = 0.0;
  double url_fraction = 0.0;
  /// 1 - distinct texts / records with text.
  double duplicate_fraction = 0.0;
};

AccountFeatures compute_features(const Timeline& t);

/// Pluggable scorer. Returning nullopt (or throwing) counts as a failure for that account.
class AccountClassifier {
 public:
  virtual ~AccountClassifier() = default;
  virtual std::optional<AccountClass> classify(const AccountFeatures& f) const = 0;
};

/// Transparent threshold rules standing in for a trained model.
class HeuristicClassifier final : public AccountClassifier {
 public:
  struct Thresholds {
    /// Below this many records there is too little signal; always people.
    std::size_t min_records = 20;
    double max_cadence_cv = 0.15;
    double min_url_fraction = 0.8;
    double min_duplicate_fraction = 0.5;
    /// Near-total repetition is decisive on its own.
    double decisive_duplicate_fraction = 0.9;
    int red_flags_for_other = 2;
  };

  HeuristicClassifier() = default;
  explicit HeuristicClassifier(Thresholds t) : t_(t) {}

  std::optional<AccountClass> classify(const AccountFeatures& f) const override;
  const Thresholds& thresholds() const noexcept { return t_; }

 private:
  Thresholds t_;
};

using AccountLabels = std::map<AccountId, AccountLabel>;

struct ClassifyOptions {
  bool skip_nonhuman_filter = false;
  /// Manual labels win over the classifier.
  std::map<AccountId, AccountClass> overrides;
};

/// Labels every ego in `timelines`. Failures default to people/heuristic and add a warning.
AccountLabels classify_accounts(std::span<const Timeline> timelines, const AccountClassifier& classifier,
                                const ClassifyOptions& options = {}, std::vector<std::string>* warnings = nullptr,
                                const AccountRegistry* names = nullptr);

struct OverrideLoad {
  std::map<AccountId, AccountClass> labels;
  std::size_t unknown_accounts = 0;
};

/// Reads `account_id,label` rows; accounts not in the dataset are counted and ignored.
OverrideLoad load_account_labels(const std::filesystem::path& csv, const AccountRegistry& accounts);

enum class IrregularReason : std::uint8_t { min_volume, short_span, low_rate };
std::string_view to_string(IrregularReason r) noexcept;

struct IrregularPolicy {
  std::size_t min_records = 2000;
  double min_span_days = 183.0;
  /// Required posting rate, in records per 3 days, within an active month.
  double min_rate_per_3_days = 1.0;
};

struct EgoDecision {
  bool keep = true;
  std::optional<IrregularReason> reason;

  friend bool operator==(const EgoDecision&, const EgoDecision&) = default;
};

/// What the irregular-ego rule needs from a timeline.
struct EgoSummary {
  std::size_t records = 0;
  double span_days = 0.0;
  /// Records per calendar month, for months with at least one record.
  std::vector<std::pair<std::chrono::year_month, std::size_t>> monthly;
};

EgoSummary summarize(const Timeline& t);

EgoDecision filter_irregular_egos(const EgoSummary& s, const IrregularPolicy& policy = {});
EgoDecision filter_irregular_egos(const Timeline& t, const IrregularPolicy& policy = {});

struct InactivePolicy {
  double min_per_year = 1.0;
};

/// True when the relationship is kept. Throws Error{precondition} if span_years <= 0.
bool filter_inactive_relationships(const Relationship& r, double ego_span_years, const InactivePolicy& policy = {});

struct FilterReport {
  std::size_t egos_in = 0;
  std::size_t egos_out = 0;
  std::size_t removed_nonhuman = 0;
  std::size_t removed_irregular = 0;
  std::size_t removed_min_volume = 0;
  std::size_t removed_short_span = 0;
  std::size_t removed_low_rate = 0;
  std::size_t relationships_in = 0;
  std::size_t relationships_out = 0;
  std::size_t removed_inactive = 0;

  void merge(const FilterReport& o) noexcept;
  bool balanced() const noexcept;
  void count_irregular(IrregularReason r) noexcept;

  friend bool operator==(const FilterReport&, const FilterReport&) = default;
};

}  // namespace senm
