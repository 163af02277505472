#pragma once

#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "pragrad/corpus_io.hpp"
#include "pragrad/lexicon.hpp"

namespace pragrad {

// Sentinel a rule returns when the whole sentence should be dropped.
inline constexpr std::string_view kRemoved = "REMOVED";

enum class RuleAction { kRemoveSentence, kRemovePhrase, kRewritePositive, kRewriteNegative };

struct RuleExample {
  std::string original;
  std::string cleaned;
};

struct CleaningRule {
  int id = 0;
  std::string name;
  // Instruction text sent to prompt-driven backends.
  std::string prompt_template;
  // Lowercase keywords gating the rule; matched like hallucination keywords
  // (prefix for stems of 4+ characters, whole token otherwise).
  std::vector<std::string> trigger_cues;
  RuleAction action = RuleAction::kRemovePhrase;
  std::vector<RuleExample> examples;
};

// The seven cleaning rules ordered by id.
const std::vector<CleaningRule>& cleaning_rules();
const CleaningRule& cleaning_rule(int id);

bool rule_triggered(const CleaningRule& rule, std::string_view sentence);

// Instruction, few-shot examples, then "Original:\n<sentence>\nNew:\n".
std::string build_rule_prompt(const CleaningRule& rule, std::string_view sentence);

// Rewrites one sentence under one rule, returning the rewritten sentence or
// "REMOVED". Implementations must be deterministic per (rule, sentence) and
// safe to call concurrently.
class RewriteBackend {
 public:
  virtual ~RewriteBackend() = default;
  virtual std::string rewrite(const CleaningRule& rule, std::string_view sentence) = 0;
  virtual std::string name() const = 0;
};

// Offline backend: each rule is an ordered list of regular-expression
// productions.
class PatternBackend final : public RewriteBackend {
 public:
  PatternBackend();
  ~PatternBackend() override;
  std::string rewrite(const CleaningRule& rule, std::string_view sentence) override;
  std::string name() const override { return "pattern"; }

 private:
  struct Productions;
  std::unique_ptr<Productions> productions_;
};

// Applies one rule. Sentences containing "REMOVED" and sentences without a
// trigger cue are returned unchanged and the backend is not called. Output is
// normalized; an empty rewrite becomes "REMOVED".
std::string apply_rule(std::string_view sentence, const CleaningRule& rule, RewriteBackend& backend);

enum class GuardDecision {
  kNotTriggered,
  kPassThrough,  // sentence already REMOVED
  kUnchanged,
  kAccepted,
  kRejected,     // label guard discarded the change
};

std::string_view to_string(GuardDecision d);

struct RuleStep {
  int rule_id = 0;
  std::string candidate;  // backend output, empty when not invoked
  GuardDecision decision = GuardDecision::kNotTriggered;
};

struct SentenceCleaning {
  std::string original;
  std::string result;  // cleaned sentence or "REMOVED"
  std::vector<RuleStep> steps;
};

// Folds apply_rule over `rules` in order. After each rule the candidate is
// relabeled; a change that alters any of the 14 labels is discarded. A
// REMOVED candidate is kept only when the sentence had no mentions.
SentenceCleaning clean_sentence_audited(std::string_view sentence,
                                        const std::vector<CleaningRule>& rules,
                                        RewriteBackend& backend, const Lexicon& lexicon);
std::string clean_sentence(std::string_view sentence, const std::vector<CleaningRule>& rules,
                           RewriteBackend& backend, const Lexicon& lexicon);

struct ReportCleaning {
  Report cleaned;
  std::vector<SentenceCleaning> sentences;
};

// Cleans the impression sentence by sentence, drops REMOVED sentences and
// rejoins the rest with single spaces. Kept sentences that lost their final
// period get it back so the rejoined text segments the same way. Backend
// errors are rethrown as RemoteError naming the rule and sentence index.
ReportCleaning clean_report_audited(const Report& report, const std::vector<CleaningRule>& rules,
                                    RewriteBackend& backend, const Lexicon& lexicon);
Report clean_report(const Report& report, const std::vector<CleaningRule>& rules,
                    RewriteBackend& backend, const Lexicon& lexicon);

// Cleans every report on up to `jobs` threads; results follow corpus order.
std::vector<ReportCleaning> clean_corpus(const Corpus& corpus,
                                         const std::vector<CleaningRule>& rules,
                                         RewriteBackend& backend, const Lexicon& lexicon,
                                         std::size_t jobs = 1);

// One JSON audit record per sentence.
nlohmann::ordered_json audit_record(const std::string& study_id, std::size_t sentence_index,
                                    const SentenceCleaning& sentence);

struct CleaningEvaluation {
  double pos_f1 = 0.0;
  double neg_f1 = 0.0;
  double em_accuracy = 0.0;
  double bleu2 = 0.0;
};

// Label preservation (Positive/Negative F1 of machine-cleaned labels against
// original labels) and similarity to manual cleaning (exact match after
// whitespace normalization, corpus BLEU-2). Throws InputError on length
// mismatch.
CleaningEvaluation evaluate_cleaning(const std::vector<std::string>& machine_cleaned,
                                     const std::vector<std::string>& manual_cleaned,
                                     const std::vector<std::string>& originals,
                                     const Lexicon& lexicon);

}  // namespace pragrad
