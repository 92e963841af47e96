#include "senm/filters.hpp"

#include <cmath>
#include <fstream>

#include <absl/container/flat_hash_set.h>
#include <fmt/format.h>

#include "senm/csv.hpp"

namespace senm {

std::string_view to_string(AccountClass c) noexcept { return c == AccountClass::people ? "people" : "other"; }

std::optional<AccountClass> parse_account_class(std::string_view s) noexcept {
  if (s == "people") return AccountClass::people;
  if (s == "other") return AccountClass::other;
  return std::nullopt;
}

std::string_view to_string(LabelSource s) noexcept {
  switch (s) {
    case LabelSource::classifier: return "classifier";
    case LabelSource::heuristic: return "heuristic";
    case LabelSource::manual: return "manual";
  }
  return "?";
}

std::string_view to_string(IrregularReason r) noexcept {
  switch (r) {
    case IrregularReason::min_volume: return "min_volume";
    case IrregularReason::short_span: return "short_span";
    case IrregularReason::low_rate: return "low_rate";
  }
  return "?";
}

AccountFeatures compute_features(const Timeline& t) {
  AccountFeatures f;
  f.records = t.records.size();
  if (t.records.empty()) return f;

  std::size_t urls = 0;
  std::size_t with_text = 0;
  absl::flat_hash_set<std::uint64_t> distinct;
  for (const auto& r : t.records) {
    urls += r.has_url;
    if (r.has_text) {
      ++with_text;
      distinct.insert(r.text_hash);
    }
  }
  f.url_fraction = static_cast<double>(urls) / static_cast<double>(f.records);
  f.duplicate_fraction =
      with_text ? 1.0 - static_cast<double>(distinct.size()) / static_cast<double>(with_text) : 0.0;

  if (t.records.size() >= 3) {
    double sum = 0.0;
    double sum_sq = 0.0;
    const std::size_t gaps = t.records.size() - 1;
    for (std::size_t i = 1; i < t.records.size(); ++i) {
      const double g = static_cast<double>((t.records[i].created_at - t.records[i - 1].created_at).count());
      sum += g;
      sum_sq += g * g;
    }
    const double mean = sum / static_cast<double>(gaps);
    const double var = std::max(0.0, sum_sq / static_cast<double>(gaps) - mean * mean);
    f.cadence_cv = mean > 0.0 ? std::sqrt(var) / mean : 0.0;
  } else {
    f.cadence_cv = 1.0;
  }
  return f;
}

std::optional<AccountClass> HeuristicClassifier::classify(const AccountFeatures& f) const {
  if (f.records < t_.min_records) return AccountClass::people;
  if (f.duplicate_fraction >= t_.decisive_duplicate_fraction) return AccountClass::other;
  int flags = 0;
  flags += f.cadence_cv <= t_.max_cadence_cv;
  flags += f.url_fraction >= t_.min_url_fraction;
  flags += f.duplicate_fraction >= t_.min_duplicate_fraction;
  return flags >= t_.red_flags_for_other ? AccountClass::other : AccountClass::people;
}

AccountLabels classify_accounts(std::span<const Timeline> timelines, const AccountClassifier& classifier,
                                const ClassifyOptions& options, std::vector<std::string>* warnings,
                                const AccountRegistry* names) {
  AccountLabels out;
  for (const auto& t : timelines) {
    AccountLabel label{t.ego, AccountClass::people, LabelSource::classifier};
    if (auto it = options.overrides.find(t.ego); it != options.overrides.end()) {
      label.label = it->second;
      label.source = LabelSource::manual;
    } else if (options.skip_nonhuman_filter) {
      label.source = LabelSource::heuristic;
    } else {
      std::optional<AccountClass> c;
      std::string why = "no label";
      try {
        c = classifier.classify(compute_features(t));
      } catch (const std::exception& e) {
        why = e.what();
      }
      if (c) {
        label.label = *c;
      } else {
        label.source = LabelSource::heuristic;
        if (warnings) {
          const std::string who = names ? std::string(names->name(t.ego)) : std::to_string(t.ego.value);
          warnings->push_back(fmt::format("classifier failed for {}: {}; defaulting to people", who, why));
        }
      }
    }
    out.emplace(t.ego, label);
  }
  return out;
}

OverrideLoad load_account_labels(const std::filesystem::path& path, const AccountRegistry& accounts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, fmt::format("cannot open {}", path.string()));
  OverrideLoad out;
  std::string line;
  std::vector<std::string> fields;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty() || line.front() == '#') continue;
    if (!csv::split(line, fields) || fields.size() != 2) {
      throw Error(ErrorCode::corrupt_input, fmt::format("{}:{}: expected account_id,label", path.string(), line_no));
    }
    const auto id = csv::trim(fields[0]);
    const auto value = csv::trim(fields[1]);
    if (id == "account_id" && value == "label") continue;
    const auto label = parse_account_class(value);
    if (!label) {
      throw Error(ErrorCode::corrupt_input,
                  fmt::format("{}:{}: label must be people or other, got '{}'", path.string(), line_no, value));
    }
    if (auto a = accounts.find(id)) {
      out.labels[*a] = *label;
    } else {
      ++out.unknown_accounts;
    }
  }
  return out;
}

EgoSummary summarize(const Timeline& t) {
  using namespace std::chrono;
  EgoSummary s;
  s.records = t.records.size();
  if (t.records.empty()) return s;
  s.span_days = t.span_days();
  for (const auto& r : t.records) {
    const year_month_day ymd{floor<days>(r.created_at)};
    const year_month ym{ymd.year(), ymd.month()};
    if (s.monthly.empty() || s.monthly.back().first != ym) {
      s.monthly.emplace_back(ym, 0);
    }
    ++s.monthly.back().second;
  }
  return s;
}

EgoDecision filter_irregular_egos(const EgoSummary& s, const IrregularPolicy& policy) {
  using namespace std::chrono;
  if (s.records < policy.min_records) return {false, IrregularReason::min_volume};
  // A zero span cannot yield a contact frequency, whatever the configured minimum.
  if (s.span_days < policy.min_span_days || s.span_days <= 0.0) return {false, IrregularReason::short_span};
  std::size_t low = 0;
  for (const auto& [ym, count] : s.monthly) {
    const auto last = year_month_day_last{ym.year(), month_day_last{ym.month()}};
    const auto days_in_month = static_cast<unsigned>(last.day());
    // count / days < rate / 3, kept in products to avoid rounding at the boundary.
    if (3.0 * static_cast<double>(count) < policy.min_rate_per_3_days * days_in_month) ++low;
  }
  if (2 * low > s.monthly.size()) return {false, IrregularReason::low_rate};
  return {true, std::nullopt};
}

EgoDecision filter_irregular_egos(const Timeline& t, const IrregularPolicy& policy) {
  return filter_irregular_egos(summarize(t), policy);
}

bool filter_inactive_relationships(const Relationship& r, double ego_span_years, const InactivePolicy& policy) {
  if (!(ego_span_years > 0.0)) {
    throw Error(ErrorCode::precondition, fmt::format("ego span must be positive, got {} years", ego_span_years));
  }
  return static_cast<double>(r.interaction_count) / ego_span_years >= policy.min_per_year;
}

void FilterReport::merge(const FilterReport& o) noexcept {
  egos_in += o.egos_in;
  egos_out += o.egos_out;
  removed_nonhuman += o.removed_nonhuman;
  removed_irregular += o.removed_irregular;
  removed_min_volume += o.removed_min_volume;
  removed_short_span += o.removed_short_span;
  removed_low_rate += o.removed_low_rate;
  relationships_in += o.relationships_in;
  relationships_out += o.relationships_out;
  removed_inactive += o.removed_inactive;
}

bool FilterReport::balanced() const noexcept {
  return egos_out + removed_nonhuman + removed_irregular == egos_in &&
         removed_min_volume + removed_short_span + removed_low_rate == removed_irregular &&
         relationships_out + removed_inactive == relationships_in;
}

void FilterReport::count_irregular(IrregularReason r) noexcept {
  ++removed_irregular;
  switch (r) {
    case IrregularReason::min_volume: ++removed_min_volume; break;
    case IrregularReason::short_span: ++removed_short_span; break;
    case IrregularReason::low_rate: ++removed_low_rate; break;
  }
}

}  // namespace senm
