#include "pragrad/corpus_stats.hpp"

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <ostream>
#include <stdexcept>

#include "pragrad/errors.hpp"
#include "pragrad/incomplete_gamma.hpp"

namespace pragrad {

namespace {

template <typename Map>
const auto& lookup(const Map& map, const std::string& id, const char* what) {
  auto it = map.find(id);
  if (it == map.end()) throw InputError("missing " + std::string(what) + " for study_id '" + id + "'");
  return it->second;
}

Rate percent(std::uint64_t numerator, std::uint64_t denominator) {
  auto r = ratio(numerator, denominator);
  if (r) *r *= 100.0;
  return r;
}

}  // namespace

Rate ratio(std::uint64_t numerator, std::uint64_t denominator) {
  if (denominator == 0) return std::nullopt;
  return static_cast<double>(numerator) / static_cast<double>(denominator);
}

Rate CorpusSummary::pct_no_finding() const { return percent(no_finding_reports, report_count); }
Rate CorpusSummary::avg_positive_mentions() const { return ratio(positive_mentions, report_count); }
Rate CorpusSummary::avg_positive_mentions_other() const {
  return ratio(other_positive_mentions, other_reports);
}
Rate CorpusSummary::avg_negative_mentions() const { return ratio(negative_mentions, report_count); }
Rate CorpusSummary::avg_negative_mentions_other() const {
  return ratio(other_negative_mentions, other_reports);
}
Rate CorpusSummary::pct_negative_given_indication(Condition c) const {
  const auto& counts = per_condition[index_of(c)];
  return percent(counts.indication_with_any_negative, counts.indication_mentions);
}

CorpusSummary summarize(const Corpus& corpus, const LabelsByStudy& labels,
                        const MentionsByStudy& mentions) {
  CorpusSummary s;
  for (const auto& report : corpus) {
    const auto& lv = lookup(labels, report.study_id, "labels");
    const auto& mentioned = lookup(mentions, report.study_id, "indication mentions");
    ++s.report_count;

    std::uint64_t pos = 0;
    std::uint64_t neg = 0;
    for (auto c : finding_conditions()) {
      if (lv[c] == LabelValue::kPositive) ++pos;
      if (lv[c] == LabelValue::kNegative) {
        ++neg;
        ++s.per_condition[index_of(c)].negative_mentions;
      }
    }
    s.positive_mentions += pos;
    s.negative_mentions += neg;
    if (lv[Condition::kNoFinding] == LabelValue::kPositive) {
      ++s.no_finding_reports;
    } else {
      ++s.other_reports;
      s.other_positive_mentions += pos;
      s.other_negative_mentions += neg;
    }
    for (auto c : mentioned.members()) {
      auto& counts = s.per_condition[index_of(c)];
      ++counts.indication_mentions;
      if (neg > 0) ++counts.indication_with_any_negative;
    }
  }
  return s;
}

ConditionalRates rates_from_table(const ContingencyTable2x2& table) {
  return ConditionalRates{ratio(table.a, table.a + table.b), ratio(table.c, table.c + table.d),
                          table};
}

ConditionalRates conditional_negative_rates(const Corpus& corpus, const LabelsByStudy& labels,
                                            const MentionsByStudy& mentions, Condition condition) {
  if (condition == Condition::kNoFinding) {
    throw std::invalid_argument("conditional negative rates are undefined for No Finding");
  }
  ContingencyTable2x2 t;
  for (const auto& report : corpus) {
    const auto value = lookup(labels, report.study_id, "labels")[condition];
    const bool in_indication =
        lookup(mentions, report.study_id, "indication mentions").contains(condition);
    if (value == LabelValue::kNegative) {
      ++(in_indication ? t.a : t.c);
    } else if (value == LabelValue::kNotMentioned) {
      ++(in_indication ? t.b : t.d);
    }
  }
  return rates_from_table(t);
}

ChiSquareResult chi_square_test(const ContingencyTable2x2& table) {
  const double observed[2][2] = {{static_cast<double>(table.a), static_cast<double>(table.b)},
                                 {static_cast<double>(table.c), static_cast<double>(table.d)}};
  const double rows[2] = {observed[0][0] + observed[0][1], observed[1][0] + observed[1][1]};
  const double cols[2] = {observed[0][0] + observed[1][0], observed[0][1] + observed[1][1]};
  if (rows[0] == 0 || rows[1] == 0 || cols[0] == 0 || cols[1] == 0) {
    throw InputError("degenerate table");
  }
  const double n = rows[0] + rows[1];
  double statistic = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double expected = rows[i] * cols[j] / n;
      const double diff = observed[i][j] - expected;
      statistic += diff * diff / expected;
    }
  }
  // Cancellation leaves ~1e-16 residue on exactly independent tables.
  if (table.a * table.d == table.b * table.c) statistic = 0.0;
  return ChiSquareResult{statistic, chi_square_survival(statistic, 1.0)};
}

std::vector<FieldDelta> shift_report(const CorpusSummary& a, const CorpusSummary& b,
                                     double threshold) {
  std::vector<std::pair<std::string, std::pair<Rate, Rate>>> fields = {
      {"pct_no_finding", {a.pct_no_finding(), b.pct_no_finding()}},
      {"avg_positive_mentions", {a.avg_positive_mentions(), b.avg_positive_mentions()}},
      {"avg_positive_mentions_not_no_finding",
       {a.avg_positive_mentions_other(), b.avg_positive_mentions_other()}},
      {"avg_negative_mentions", {a.avg_negative_mentions(), b.avg_negative_mentions()}},
      {"avg_negative_mentions_not_no_finding",
       {a.avg_negative_mentions_other(), b.avg_negative_mentions_other()}},
  };
  for (auto c : finding_conditions()) {
    fields.push_back({"pct_negative_given_indication:" + std::string(condition_name(c)),
                      {a.pct_negative_given_indication(c), b.pct_negative_given_indication(c)}});
  }

  std::vector<FieldDelta> out;
  for (auto& [name, values] : fields) {
    FieldDelta d;
    d.field = name;
    d.a = values.first;
    d.b = values.second;
    if (d.a && d.b) {
      d.absolute = *d.b - *d.a;
      if (*d.a != 0.0) {
        d.relative = std::fabs(*d.b - *d.a) / std::fabs(*d.a);
      } else if (*d.b == 0.0) {
        d.relative = 0.0;
      }
      d.flagged = d.relative && *d.relative > threshold;
    }
    out.push_back(std::move(d));
  }
  return out;
}

std::string format_rate(const Rate& r, int decimals) {
  if (!r) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, *r);
  return buf;
}

void write_summary_csv(const CorpusSummary& s, std::ostream& out) {
  out << "field,value\n";
  out << "reports," << s.report_count << '\n';
  out << "pct_no_finding," << format_rate(s.pct_no_finding()) << '\n';
  out << "avg_positive_mentions," << format_rate(s.avg_positive_mentions()) << '\n';
  out << "avg_positive_mentions_not_no_finding," << format_rate(s.avg_positive_mentions_other())
      << '\n';
  out << "avg_negative_mentions," << format_rate(s.avg_negative_mentions()) << '\n';
  out << "avg_negative_mentions_not_no_finding," << format_rate(s.avg_negative_mentions_other())
      << '\n';
  out << "\ncondition,negative_mentions,indication_mentions,pct_negative_given_indication\n";
  for (auto c : kAllConditions) {
    const auto& counts = s.per_condition[index_of(c)];
    out << condition_name(c) << ',' << counts.negative_mentions << ','
        << counts.indication_mentions << ',' << format_rate(s.pct_negative_given_indication(c))
        << '\n';
  }
}

void write_summary_table(const CorpusSummary& s, std::ostream& out) {
  auto row = [&](const std::string& label, const std::string& value) {
    out << std::left << std::setw(58) << label << std::right << std::setw(12) << value << '\n';
  };
  row("#Reports", std::to_string(s.report_count));
  row("% No Finding", format_rate(s.pct_no_finding(), 1));
  row("avg. #positive mentions", format_rate(s.avg_positive_mentions(), 3));
  row("avg. #positive mentions in reports that are not No Finding",
      format_rate(s.avg_positive_mentions_other(), 3));
  row("avg. #negative mentions", format_rate(s.avg_negative_mentions(), 3));
  row("avg. #negative mentions in reports that are not No Finding",
      format_rate(s.avg_negative_mentions_other(), 3));
  out << "\n% of reports with negative mentions, given the condition in the indication\n";
  for (auto c : kAllConditions) {
    row(std::string(condition_name(c)), format_rate(s.pct_negative_given_indication(c), 1));
  }
}

void write_shift_csv(const std::vector<FieldDelta>& deltas, std::ostream& out) {
  out << "field,a,b,absolute_delta,relative_delta,flagged\n";
  for (const auto& d : deltas) {
    out << d.field << ',' << format_rate(d.a) << ',' << format_rate(d.b) << ','
        << format_rate(d.absolute) << ',' << format_rate(d.relative) << ','
        << (d.flagged ? "yes" : "no") << '\n';
  }
}

void write_chi_square_csv(const std::vector<ChiSquareRow>& rows, std::ostream& out) {
  out << "condition,p_in,p_out,a,b,c,d,statistic,p_value,significance\n";
  for (const auto& row : rows) {
    const auto& t = row.rates.table;
    out << condition_name(row.condition) << ',' << format_rate(row.rates.p_in) << ','
        << format_rate(row.rates.p_out) << ',' << t.a << ',' << t.b << ',' << t.c << ',' << t.d
        << ',';
    if (row.test) {
      char p[64];
      std::snprintf(p, sizeof p, "%.6e", row.test->p_value);
      const char* stars = row.test->p_value < 0.001  ? "***"
                          : row.test->p_value < 0.01 ? "**"
                          : row.test->p_value < 0.05 ? "*"
                                                     : "";
      out << format_rate(row.test->statistic) << ',' << p << ',' << stars << '\n';
    } else {
      out << "NA,NA,\n";
    }
  }
}

}  // namespace pragrad
