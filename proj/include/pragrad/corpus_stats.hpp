#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pragrad/condition.hpp"
#include "pragrad/corpus_io.hpp"

namespace pragrad {

// Undefined ratios (zero denominators) are std::nullopt and print as "NA".
using Rate = std::optional<double>;

Rate ratio(std::uint64_t numerator, std::uint64_t denominator);

// Rows: condition in the indication / not in the indication.
// Columns: report labels the condition negative / does not mention it.
// Reports labeling the condition positive or uncertain are not counted.
struct ContingencyTable2x2 {
  std::uint64_t a = 0;  // in indication, negative
  std::uint64_t b = 0;  // in indication, not mentioned
  std::uint64_t c = 0;  // not in indication, negative
  std::uint64_t d = 0;  // not in indication, not mentioned

  std::uint64_t total() const { return a + b + c + d; }
  bool operator==(const ContingencyTable2x2&) const = default;
};

struct ConditionCounts {
  std::uint64_t negative_mentions = 0;             // reports labeling it negative
  std::uint64_t indication_mentions = 0;           // reports mentioning it in the indication
  std::uint64_t indication_with_any_negative = 0;  // ... that carry at least one negative label

  bool operator==(const ConditionCounts&) const = default;
};

// Positive/negative mention statistics over a labeled corpus. Mention counts
// exclude No Finding; "non-No-Finding" reports are those whose No Finding
// label is not positive. All derived values are exact ratios of the counts.
struct CorpusSummary {
  std::uint64_t report_count = 0;
  std::uint64_t no_finding_reports = 0;
  std::uint64_t positive_mentions = 0;
  std::uint64_t negative_mentions = 0;
  std::uint64_t other_reports = 0;  // No Finding not positive
  std::uint64_t other_positive_mentions = 0;
  std::uint64_t other_negative_mentions = 0;
  std::array<ConditionCounts, kNumConditions> per_condition{};

  Rate pct_no_finding() const;
  Rate avg_positive_mentions() const;
  Rate avg_positive_mentions_other() const;
  Rate avg_negative_mentions() const;
  Rate avg_negative_mentions_other() const;
  Rate pct_negative_given_indication(Condition c) const;

  bool operator==(const CorpusSummary&) const = default;
};

using LabelsByStudy = std::map<std::string, LabelVector>;
using MentionsByStudy = std::map<std::string, ConditionSet>;

// Throws InputError naming the first study id lacking labels or mentions.
CorpusSummary summarize(const Corpus& corpus, const LabelsByStudy& labels,
                        const MentionsByStudy& mentions);

struct ConditionalRates {
  Rate p_in;   // P(negative | condition in indication)
  Rate p_out;  // P(negative | condition not in indication)
  ContingencyTable2x2 table;
};

// Throws std::invalid_argument for No Finding.
ConditionalRates conditional_negative_rates(const Corpus& corpus, const LabelsByStudy& labels,
                                            const MentionsByStudy& mentions, Condition condition);
ConditionalRates rates_from_table(const ContingencyTable2x2& table);

struct ChiSquareResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Pearson chi-square test of independence, one degree of freedom, without
// continuity correction. Throws InputError("degenerate table") when any row
// or column marginal is zero.
ChiSquareResult chi_square_test(const ContingencyTable2x2& table);

struct FieldDelta {
  std::string field;
  Rate a;
  Rate b;
  Rate absolute;  // b - a
  Rate relative;  // |b - a| / |a|
  bool flagged = false;
};

// Compares the rate fields of two summaries and flags those whose relative
// delta exceeds `threshold` (a fraction, 0.25 = 25%).
std::vector<FieldDelta> shift_report(const CorpusSummary& a, const CorpusSummary& b,
                                     double threshold = 0.25);

std::string format_rate(const Rate& r, int decimals = 6);

// CSV "field,value" rows plus per-condition rows.
void write_summary_csv(const CorpusSummary& summary, std::ostream& out);
// Aligned human-readable table.
void write_summary_table(const CorpusSummary& summary, std::ostream& out);
void write_shift_csv(const std::vector<FieldDelta>& deltas, std::ostream& out);

struct ChiSquareRow {
  Condition condition;
  ConditionalRates rates;
  std::optional<ChiSquareResult> test;  // nullopt for degenerate tables
};

// condition,p_in,p_out,a,b,c,d,statistic,p_value,significance
void write_chi_square_csv(const std::vector<ChiSquareRow>& rows, std::ostream& out);

}  // namespace pragrad
