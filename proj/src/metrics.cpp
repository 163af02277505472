#include "pragrad/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "pragrad/errors.hpp"
#include "pragrad/labeler.hpp"
#include "pragrad/text.hpp"
#include "sectioned_text.hpp"

namespace pragrad {

namespace builtin {
extern const std::string_view kKeywordsText;
}

namespace {

double f1_of(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) {
  const double p = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  const double r = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

std::vector<LabelVector> aligned_labels(const std::vector<LabeledStudy>& pred,
                                        const std::vector<LabeledStudy>& ref,
                                        std::vector<LabelVector>& ref_out) {
  if (pred.size() != ref.size()) {
    throw InputError("misaligned label sets: " + std::to_string(pred.size()) + " predictions vs " +
                     std::to_string(ref.size()) + " references");
  }
  std::vector<LabelVector> pred_out;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i].study_id != ref[i].study_id) {
      throw InputError("misaligned study ids at position " + std::to_string(i) + ": '" +
                       pred[i].study_id + "' vs '" + ref[i].study_id + "'");
    }
    pred_out.push_back(pred[i].labels);
    ref_out.push_back(ref[i].labels);
  }
  return pred_out;
}

void check_aligned(const Corpus& a, const Corpus& b, const char* what) {
  if (a.size() != b.size()) {
    throw InputError(std::string("misaligned corpora (") + what + "): " + std::to_string(a.size()) +
                     " vs " + std::to_string(b.size()) + " reports");
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].study_id != b[i].study_id) {
      throw InputError(std::string("misaligned corpora (") + what + ") at position " +
                       std::to_string(i) + ": '" + a[i].study_id + "' vs '" + b[i].study_id + "'");
    }
  }
}

}  // namespace

F1Result label_f1(const std::vector<LabelVector>& pred, const std::vector<LabelVector>& ref,
                  const std::vector<Condition>& conditions, LabelValue target,
                  F1Averaging averaging) {
  if (pred.size() != ref.size()) {
    throw InputError("misaligned label sets: " + std::to_string(pred.size()) + " vs " +
                     std::to_string(ref.size()));
  }
  F1Result result;
  std::uint64_t tp_all = 0, fp_all = 0, fn_all = 0;
  double macro_sum = 0.0;
  std::size_t macro_count = 0;
  for (auto c : conditions) {
    ConditionF1 cf;
    cf.condition = c;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const bool p = pred[i][c] == target;
      const bool r = ref[i][c] == target;
      if (p && r) ++cf.true_positives;
      if (p && !r) ++cf.false_positives;
      if (!p && r) ++cf.false_negatives;
    }
    cf.support = cf.true_positives + cf.false_negatives;
    const auto tp = cf.true_positives, fp = cf.false_positives, fn = cf.false_negatives;
    cf.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    cf.recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    cf.f1 = f1_of(tp, fp, fn);
    if (tp + fp + fn > 0) {
      macro_sum += cf.f1;
      ++macro_count;
    }
    tp_all += tp;
    fp_all += fp;
    fn_all += fn;
    result.per_condition.push_back(cf);
  }
  if (averaging == F1Averaging::kMicro) {
    result.score = f1_of(tp_all, fp_all, fn_all);
  } else {
    result.score = macro_count == 0 ? 0.0 : macro_sum / static_cast<double>(macro_count);
  }
  return result;
}

F1Result positive_f1(const std::vector<LabeledStudy>& pred, const std::vector<LabeledStudy>& ref,
                     const std::vector<Condition>& conditions, F1Averaging averaging) {
  std::vector<LabelVector> r;
  auto p = aligned_labels(pred, ref, r);
  return label_f1(p, r, conditions, LabelValue::kPositive, averaging);
}

F1Result negative_f1(const std::vector<LabeledStudy>& pred, const std::vector<LabeledStudy>& ref,
                     const std::vector<Condition>& conditions, F1Averaging averaging) {
  std::vector<LabelVector> r;
  auto p = aligned_labels(pred, ref, r);
  return label_f1(p, r, conditions, LabelValue::kNegative, averaging);
}

const std::vector<Condition>& default_positive_five() {
  static const std::vector<Condition> five = {Condition::kAtelectasis, Condition::kCardiomegaly,
                                              Condition::kConsolidation, Condition::kEdema,
                                              Condition::kPleuralEffusion};
  return five;
}

const std::vector<Condition>& negative_five() {
  // Five most frequent negative mentions, Cardiomegaly left out.
  static const std::vector<Condition> five = {Condition::kConsolidation, Condition::kEdema,
                                              Condition::kPleuralEffusion, Condition::kPneumonia,
                                              Condition::kPneumothorax};
  return five;
}

std::vector<Condition> most_frequent_positive(const std::vector<LabelVector>& ref,
                                              std::size_t count) {
  std::vector<std::pair<std::size_t, Condition>> counts;
  for (auto c : finding_conditions()) {
    std::size_t n = 0;
    for (const auto& lv : ref) n += lv[c] == LabelValue::kPositive;
    counts.emplace_back(n, c);
  }
  std::stable_sort(counts.begin(), counts.end(),
                   [](const auto& x, const auto& y) { return x.first > y.first; });
  std::vector<Condition> out;
  for (std::size_t i = 0; i < count && i < counts.size(); ++i) out.push_back(counts[i].second);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> bleu_tokens(std::string_view text) { return tokenize(text, false); }

BleuStats bleu2_stats(const std::vector<std::string>& hypotheses,
                      const std::vector<std::string>& references) {
  if (hypotheses.size() != references.size()) {
    throw InputError("misaligned BLEU inputs: " + std::to_string(hypotheses.size()) +
                     " hypotheses vs " + std::to_string(references.size()) + " references");
  }
  BleuStats stats;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    const auto hyp = bleu_tokens(hypotheses[i]);
    const auto ref = bleu_tokens(references[i]);
    stats.hypothesis_length += hyp.size();
    stats.reference_length += ref.size();
    for (std::size_t n = 1; n <= 2; ++n) {
      if (hyp.size() < n) continue;
      std::map<std::vector<std::string>, std::uint64_t> ref_counts;
      for (std::size_t k = 0; k + n <= ref.size(); ++k) {
        ++ref_counts[std::vector<std::string>(ref.begin() + k, ref.begin() + k + n)];
      }
      std::map<std::vector<std::string>, std::uint64_t> hyp_counts;
      for (std::size_t k = 0; k + n <= hyp.size(); ++k) {
        ++hyp_counts[std::vector<std::string>(hyp.begin() + k, hyp.begin() + k + n)];
      }
      for (const auto& [gram, count] : hyp_counts) {
        auto it = ref_counts.find(gram);
        stats.matches[n - 1] += std::min(count, it == ref_counts.end() ? 0 : it->second);
      }
      stats.totals[n - 1] += hyp.size() - n + 1;
    }
  }
  return stats;
}

double bleu2_from_stats(const BleuStats& stats) {
  const double c = static_cast<double>(stats.hypothesis_length);
  const double r = static_cast<double>(stats.reference_length);
  if (c == 0.0) return 0.0;
  double log_sum = 0.0;
  for (int n = 0; n < 2; ++n) {
    if (stats.totals[n] == 0 || stats.matches[n] == 0) return 0.0;
    log_sum += 0.5 * std::log(static_cast<double>(stats.matches[n]) /
                              static_cast<double>(stats.totals[n]));
  }
  const double brevity = c < r ? std::exp(1.0 - r / c) : 1.0;
  return brevity * std::exp(log_sum);
}

double bleu2(const std::vector<std::string>& hypotheses, const std::vector<std::string>& references) {
  return bleu2_from_stats(bleu2_stats(hypotheses, references));
}

KeywordCatalog::KeywordCatalog(std::string version, std::vector<KeywordCategory> categories)
    : version_(std::move(version)), categories_(std::move(categories)) {}

KeywordCatalog KeywordCatalog::parse(std::string_view text, const std::string& source) {
  auto parsed = detail::parse_sectioned(text, source);
  auto version = parsed.settings.find("version");
  if (version == parsed.settings.end() || version->second.empty()) {
    throw InputError(source + ": missing 'version' setting");
  }
  std::vector<KeywordCategory> categories;
  for (const auto& [name, entries] : parsed.sections) {
    if (entries.empty()) throw InputError(source + ": category '" + name + "' has no stems");
    KeywordCategory cat{name, {}};
    for (const auto& e : entries) {
      if (std::any_of(e.begin(), e.end(), [](char ch) { return std::isupper(static_cast<unsigned char>(ch)); })) {
        throw InputError(source + ": stem '" + e + "' must be lowercase");
      }
      cat.stems.push_back(e);
    }
    categories.push_back(std::move(cat));
  }
  if (categories.empty()) throw InputError(source + ": no keyword categories");
  return KeywordCatalog(version->second, std::move(categories));
}

KeywordCatalog KeywordCatalog::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path.string() + ": cannot open keyword catalog");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.string());
}

const KeywordCatalog& KeywordCatalog::builtin() {
  static const KeywordCatalog catalog = parse(builtin::kKeywordsText, "data/keywords.txt");
  return catalog;
}

std::vector<std::size_t> flagged_categories(std::string_view text, const KeywordCatalog& catalog) {
  const auto tokens = bleu_tokens(text);
  std::vector<std::size_t> out;
  const auto& cats = catalog.categories();
  for (std::size_t i = 0; i < cats.size(); ++i) {
    const bool hit = std::any_of(tokens.begin(), tokens.end(), [&](const std::string& t) {
      return std::any_of(cats[i].stems.begin(), cats[i].stems.end(),
                         [&](const std::string& s) { return token_matches_stem(t, s); });
    });
    if (hit) out.push_back(i);
  }
  return out;
}

HallucinationResult hallucination_rate(const std::vector<std::string>& reports,
                                       const KeywordCatalog& catalog) {
  HallucinationResult result;
  const auto ncat = catalog.categories().size();
  std::vector<std::size_t> per_category(ncat, 0);
  std::size_t any = 0;
  for (const auto& text : reports) {
    const auto hits = flagged_categories(text, catalog);
    for (auto i : hits) ++per_category[i];
    result.flagged.push_back(!hits.empty());
    any += !hits.empty();
  }
  const double n = static_cast<double>(reports.size());
  result.rate = reports.empty() ? 0.0 : static_cast<double>(any) / n;
  for (auto count : per_category) {
    result.per_category.push_back(reports.empty() ? 0.0 : static_cast<double>(count) / n);
  }
  return result;
}

MetricsReport evaluate_generation(const Corpus& generated, const Corpus& reference_original,
                                  const Corpus& reference_clean, const Lexicon& lexicon,
                                  const KeywordCatalog& catalog, const MetricsOptions& options) {
  check_aligned(generated, reference_original, "generated vs original reference");
  check_aligned(generated, reference_clean, "generated vs clean reference");

  auto gen_labels = label_corpus(generated, lexicon);
  std::vector<LabeledStudy> ref_labels;
  if (options.reference_labels) {
    auto by_id = index_by_study(*options.reference_labels);
    for (const auto& r : reference_original) {
      auto it = by_id.find(r.study_id);
      if (it == by_id.end()) throw InputError("no reference labels for study_id '" + r.study_id + "'");
      ref_labels.push_back({r.study_id, it->second});
    }
  } else {
    ref_labels = label_corpus(reference_original, lexicon);
  }

  MetricsReport m;
  m.reports = generated.size();
  m.pos_f1 = positive_f1(gen_labels, ref_labels, finding_conditions(), options.averaging);
  m.neg_f1 = negative_f1(gen_labels, ref_labels, finding_conditions(), options.averaging);
  if (options.positive_five_from_reference) {
    std::vector<LabelVector> refs;
    for (const auto& r : ref_labels) refs.push_back(r.labels);
    m.positive_five = most_frequent_positive(refs);
  } else {
    m.positive_five = default_positive_five();
  }
  m.pos_f1_5 = positive_f1(gen_labels, ref_labels, m.positive_five, options.averaging);
  m.neg_f1_5 = negative_f1(gen_labels, ref_labels, negative_five(), options.averaging);

  std::vector<std::string> hyp, orig, clean;
  for (std::size_t i = 0; i < generated.size(); ++i) {
    hyp.push_back(generated[i].impression);
    orig.push_back(reference_original[i].impression);
    clean.push_back(reference_clean[i].impression);
  }
  m.bleu2 = bleu2(hyp, orig);
  m.clean_bleu2 = bleu2(hyp, clean);
  m.hallucination = hallucination_rate(hyp, catalog);
  for (const auto& cat : catalog.categories()) m.hallucination_categories.push_back(cat.id);
  return m;
}

namespace {

nlohmann::ordered_json f1_json(const F1Result& r) {
  nlohmann::ordered_json j;
  j["score"] = r.score;
  auto& per = j["per_condition"] = nlohmann::ordered_json::object();
  for (const auto& c : r.per_condition) {
    per[std::string(condition_name(c.condition))] = {
        {"f1", c.f1},       {"precision", c.precision},  {"recall", c.recall},
        {"support", c.support}, {"true_positives", c.true_positives},
        {"false_positives", c.false_positives}, {"false_negatives", c.false_negatives}};
  }
  return j;
}

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

nlohmann::ordered_json metrics_to_json(const MetricsReport& m) {
  nlohmann::ordered_json j;
  j["reports"] = m.reports;
  j["pos_f1"] = f1_json(m.pos_f1);
  j["pos_f1_5"] = f1_json(m.pos_f1_5);
  auto& five = j["positive_five"] = nlohmann::ordered_json::array();
  for (auto c : m.positive_five) five.push_back(std::string(condition_name(c)));
  j["neg_f1"] = f1_json(m.neg_f1);
  j["neg_f1_5"] = f1_json(m.neg_f1_5);
  j["bleu2"] = m.bleu2;
  j["clean_bleu2"] = m.clean_bleu2;
  j["hallucination_rate"] = m.hallucination.rate;
  auto& cats = j["hallucination_per_category"] = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < m.hallucination_categories.size(); ++i) {
    cats[m.hallucination_categories[i]] = m.hallucination.per_category[i];
  }
  return j;
}

void write_metrics_csv_row(const MetricsReport& m, const std::string& model, std::ostream& out) {
  out << "model,pos_f1,pos_f1_5,bleu2,clean_bleu2,neg_f1,neg_f1_5,hallucination\n";
  out << model << ',' << fixed3(m.pos_f1.score) << ',' << fixed3(m.pos_f1_5.score) << ','
      << fixed3(m.bleu2) << ',' << fixed3(m.clean_bleu2) << ',' << fixed3(m.neg_f1.score) << ','
      << fixed3(m.neg_f1_5.score) << ',' << fixed3(m.hallucination.rate) << '\n';
}

}  // namespace pragrad
