#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "pragrad/condition.hpp"
#include "pragrad/corpus_io.hpp"
#include "pragrad/lexicon.hpp"

namespace pragrad {

// ---------------------------------------------------------------------------
// Label F1

struct ConditionF1 {
  Condition condition = Condition::kAtelectasis;
  std::uint64_t true_positives = 0;
  std::uint64_t false_positives = 0;
  std::uint64_t false_negatives = 0;
  std::uint64_t support = 0;  // reference items in the class (tp + fn)
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;            // 0 when precision + recall == 0
};

struct F1Result {
  double score = 0.0;
  std::vector<ConditionF1> per_condition;
};

// Macro: mean F1 over the conditions that occur in either prediction or
// reference (tp + fp + fn > 0); 0 when none do. Micro: F1 of pooled counts.
enum class F1Averaging { kMacro, kMicro };

// Binary F1 per condition with the given class (positive or negative label).
F1Result label_f1(const std::vector<LabelVector>& pred, const std::vector<LabelVector>& ref,
                  const std::vector<Condition>& conditions, LabelValue target,
                  F1Averaging averaging = F1Averaging::kMacro);

// Study-aligned variants; throw InputError when ids differ position by position.
F1Result positive_f1(const std::vector<LabeledStudy>& pred, const std::vector<LabeledStudy>& ref,
                     const std::vector<Condition>& conditions,
                     F1Averaging averaging = F1Averaging::kMacro);
F1Result negative_f1(const std::vector<LabeledStudy>& pred, const std::vector<LabeledStudy>& ref,
                     const std::vector<Condition>& conditions,
                     F1Averaging averaging = F1Averaging::kMacro);

const std::vector<Condition>& default_positive_five();
const std::vector<Condition>& negative_five();

// The five finding conditions with the most positive labels in `ref`
// (ties broken by canonical order).
std::vector<Condition> most_frequent_positive(const std::vector<LabelVector>& ref,
                                              std::size_t count = 5);

// ---------------------------------------------------------------------------
// BLEU-2

struct BleuStats {
  std::uint64_t matches[2] = {0, 0};
  std::uint64_t totals[2] = {0, 0};
  std::uint64_t hypothesis_length = 0;
  std::uint64_t reference_length = 0;
};

// Lowercase, split on non-alphanumeric characters.
std::vector<std::string> bleu_tokens(std::string_view text);

BleuStats bleu2_stats(const std::vector<std::string>& hypotheses,
                      const std::vector<std::string>& references);
double bleu2_from_stats(const BleuStats& stats);

// Corpus BLEU with uniform weights on clipped unigram and bigram precision and
// brevity penalty exp(1 - r/c) when c < r. Zero for an empty hypothesis
// corpus. Throws InputError on length mismatch.
double bleu2(const std::vector<std::string>& hypotheses, const std::vector<std::string>& references);

// ---------------------------------------------------------------------------
// Uninferable-information keywords

struct KeywordCategory {
  std::string id;
  std::vector<std::string> stems;
};

class KeywordCatalog {
 public:
  static KeywordCatalog parse(std::string_view text, const std::string& source = "<catalog>");
  static KeywordCatalog load(const std::filesystem::path& path);
  // data/keywords.txt
  static const KeywordCatalog& builtin();

  KeywordCatalog() = default;
  KeywordCatalog(std::string version, std::vector<KeywordCategory> categories);

  const std::string& version() const { return version_; }
  const std::vector<KeywordCategory>& categories() const { return categories_; }

 private:
  std::string version_;
  std::vector<KeywordCategory> categories_;
};

struct HallucinationResult {
  double rate = 0.0;                    // fraction flagged in any category
  std::vector<double> per_category;     // aligned with catalog categories
  std::vector<bool> flagged;            // per report
};

// Categories whose stems occur in `text`, as indices into the catalog.
std::vector<std::size_t> flagged_categories(std::string_view text, const KeywordCatalog& catalog);

HallucinationResult hallucination_rate(const std::vector<std::string>& reports,
                                       const KeywordCatalog& catalog);

// ---------------------------------------------------------------------------
// Whole-corpus evaluation

struct MetricsOptions {
  F1Averaging averaging = F1Averaging::kMacro;
  // Pick the positive five from the reference corpus instead of the fixed set.
  bool positive_five_from_reference = false;
  // Precomputed labels of the original references; labeled from text if unset.
  std::optional<std::vector<LabeledStudy>> reference_labels;
};

struct MetricsReport {
  F1Result pos_f1;
  F1Result pos_f1_5;
  F1Result neg_f1;
  F1Result neg_f1_5;
  std::vector<Condition> positive_five;
  double bleu2 = 0.0;
  double clean_bleu2 = 0.0;
  HallucinationResult hallucination;
  std::vector<std::string> hallucination_categories;
  std::size_t reports = 0;
};

// All three corpora must list the same study ids in the same order.
MetricsReport evaluate_generation(const Corpus& generated, const Corpus& reference_original,
                                  const Corpus& reference_clean, const Lexicon& lexicon,
                                  const KeywordCatalog& catalog, const MetricsOptions& options = {});

nlohmann::ordered_json metrics_to_json(const MetricsReport& report);
// Header + one row: pos_f1,pos_f1_5,bleu2,clean_bleu2,neg_f1,neg_f1_5,hallucination
void write_metrics_csv_row(const MetricsReport& report, const std::string& model, std::ostream& out);

}  // namespace pragrad
