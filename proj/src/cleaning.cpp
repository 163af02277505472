#include "pragrad/cleaning.hpp"

#include <stdexcept>

#include "pragrad/errors.hpp"
#include "pragrad/labeler.hpp"
#include "pragrad/metrics.hpp"
#include "pragrad/parallel.hpp"
#include "pragrad/text.hpp"

namespace pragrad {

namespace {

std::vector<CleaningRule> make_rules() {
  std::vector<CleaningRule> rules;

  rules.push_back(CleaningRule{
      1,
      "Remove comparison to prior studies",
      "You will be given a sentence from a chest X-ray report. Remove ALL sentences that contain "
      "comparisons to the past, and rewrite sentences minimally to preserve meaning. If a sentence "
      "contains the word \"compare\", remove it. If a sentence is empty after cleaning, replace it "
      "with the token \"REMOVED\". If a sentence contains \"REMOVED\", do not change it.",
      {"compar", "prior", "previous", "earlier", "chang", "since"},
      RuleAction::kRemovePhrase,
      {{"In comparison with the study of, there are slightly improved lung volumes.",
        "There are slightly improved lung volumes."}},
  });
  rules.push_back(CleaningRule{
      2,
      "Remove communication information",
      "You will be given a sentence from a chest X-ray report. Remove ALL sentences that contain "
      "information about communication between medical professionals, such as between doctors or "
      "nurses. If a sentence is empty after cleaning, replace it with the token \"REMOVED\". If a "
      "sentence contains \"REMOVED\", do not change it.",
      {"commun", "notif", "discuss", "telephon", "phone", "paged", "pager", "dashboard", "relay",
       "convey", "called", "contacted", "informed"},
      RuleAction::kRemoveSentence,
      {{"These findings were communicated via the radiology critical results dashboard at 12:57 "
        "p.m.",
        "REMOVED"}},
  });
  rules.push_back(CleaningRule{
      3,
      "Remove doctor recommendations",
      "You will be given a sentence from a chest X-ray report. Remove ALL sentences that mention "
      "medical recommendations from doctors. Remove sentences that contain \"recommend\". If a "
      "sentence is empty after cleaning, replace it with the token \"REMOVED\". If a sentence "
      "contains \"REMOVED\", do not change it.",
      {"recommend", "suggest", "advis", "should", "consider", "correlat", "follow up", "followup"},
      RuleAction::kRemoveSentence,
      {{"Recommend advising patient to avoid palpating the area to avoid irritating it.",
        "REMOVED"}},
  });
  rules.push_back(CleaningRule{
      4,
      "Remove previous treatment and image view",
      "You will be given a sentence from a chest X-ray report. Remove ALL sentences that mention "
      "the chest X-ray view (e.g. AP, PA, lateral) or \"status post\". Rewrite sentences minimally "
      "to preserve meaning. If a sentence is empty after cleaning, replace it with the token "
      "\"REMOVED\". If a sentence is empty or contains \"REMOVED\", do not change it.",
      {"ap", "pa", "lateral", "view", "frontal", "portable", "upright", "supine", "oblique",
       "decubitus", "status post"},
      RuleAction::kRemovePhrase,
      {{"Small lateral pneumothorax is present in this patient status post right first rib "
        "resection.",
        "Small lateral pneumothorax is present in this patient"},
       {"Lateral view raises concern for pneumonia at the left lung base",
        "Concern for pneumonia at the left lung base"}},
  });
  rules.push_back(CleaningRule{
      5,
      "Rewrite new/increased conditions into positive",
      "You will be given a sentence from a chest X-ray report. Remove all instances of \"new\", "
      "\"increase\", \"greater\", \"worsen\", etc. and rewrite the sentence to preserve meaning. "
      "If the sentence mentions changes to an organ (e.g. lung, heart), do not rewrite it. If a "
      "sentence contains \"REMOVED\", do not change it.",
      {"new", "newly", "increas", "greater", "worse", "progress", "enlarging"},
      RuleAction::kRewritePositive,
      {{"New large right pneumothorax", "Large right pneumothorax"},
       {"Mild interval increase in loculated right pleural effusion",
        "Loculated right pleural effusion."}},
  });
  rules.push_back(CleaningRule{
      6,
      "Rewrite unchanged/partially-improved conditions into positive",
      "You will be given a sentence from a chest X-ray report. If a sentence mentions that a "
      "positive medical condition is unchanged or improved (but still positive), remove words "
      "related to \"unchanged\" or \"improve\" and rewrite the sentence to only say the condition. "
      "Otherwise, keep it the same. If a sentence contains \"REMOVED\", do not change it.",
      {"unchang", "improv", "stable", "persist", "decreas", "smaller", "similar"},
      RuleAction::kRewritePositive,
      {{"Small right pleural effusion probably unchanged since", "Small right pleural effusion"},
       {"Mild pulmonary edema appears slightly improved", "Mild pulmonary edema"}},
  });
  rules.push_back(CleaningRule{
      7,
      "Rewrite resolved conditions into negative",
      "You will be given a sentence from a chest X-ray report. If the sentence mentions the "
      "resolution or disappearance of a condition, rewrite it to simply say the condition is "
      "negative. Otherwise, keep the sentence the same. If a sentence is empty or contains "
      "\"REMOVED\", do not change it.",
      {"resol", "disappear", "clearance"},
      RuleAction::kRewriteNegative,
      {{"Resolved opacities in the left mid lung.", "No opacities in the left mid lung."}},
  });
  return rules;
}

bool contains_removed(std::string_view s) { return s.find(kRemoved) != std::string_view::npos; }

}  // namespace

const std::vector<CleaningRule>& cleaning_rules() {
  static const std::vector<CleaningRule> rules = make_rules();
  return rules;
}

const CleaningRule& cleaning_rule(int id) {
  const auto& rules = cleaning_rules();
  if (id < 1 || id > static_cast<int>(rules.size())) {
    throw std::out_of_range("no cleaning rule with id " + std::to_string(id));
  }
  return rules[static_cast<std::size_t>(id - 1)];
}

bool rule_triggered(const CleaningRule& rule, std::string_view sentence) {
  const auto tokens = tokenize(sentence);
  for (const auto& cue : rule.trigger_cues) {
    if (contains_cue(tokens, tokenize(cue))) return true;
  }
  return false;
}

std::string build_rule_prompt(const CleaningRule& rule, std::string_view sentence) {
  std::string prompt = rule.prompt_template;
  prompt += "\n\n";
  for (const auto& ex : rule.examples) {
    prompt += "Original:\n" + ex.original + "\nNew:\n" + ex.cleaned + "\n\n";
  }
  prompt += "Original:\n";
  prompt += sentence;
  prompt += "\nNew:\n";
  return prompt;
}

std::string apply_rule(std::string_view sentence, const CleaningRule& rule, RewriteBackend& backend) {
  if (contains_removed(sentence) || !rule_triggered(rule, sentence)) return std::string(sentence);
  std::string out;
  try {
    out = normalize_text(backend.rewrite(rule, sentence));
  } catch (const RemoteError& e) {
    throw RemoteError("rule " + std::to_string(rule.id) + ": " + e.what());
  }
  if (out.empty() || contains_removed(out) || !has_alphanumeric(out)) return std::string(kRemoved);
  return out;
}

std::string_view to_string(GuardDecision d) {
  switch (d) {
    case GuardDecision::kNotTriggered: return "not-triggered";
    case GuardDecision::kPassThrough: return "pass-through";
    case GuardDecision::kUnchanged: return "unchanged";
    case GuardDecision::kAccepted: return "accepted";
    case GuardDecision::kRejected: return "guard-rejected";
  }
  return "unknown";
}

SentenceCleaning clean_sentence_audited(std::string_view sentence,
                                        const std::vector<CleaningRule>& rules,
                                        RewriteBackend& backend, const Lexicon& lexicon) {
  SentenceCleaning out;
  out.original = std::string(sentence);
  std::string current = normalize_text(sentence);
  LabelVector current_labels = label_sentence(current, lexicon);

  for (const auto& rule : rules) {
    RuleStep step;
    step.rule_id = rule.id;
    if (current == kRemoved) {
      step.decision = GuardDecision::kPassThrough;
    } else if (!rule_triggered(rule, current)) {
      step.decision = GuardDecision::kNotTriggered;
    } else {
      step.candidate = apply_rule(current, rule, backend);
      if (step.candidate == current) {
        step.decision = GuardDecision::kUnchanged;
      } else if (step.candidate == kRemoved) {
        // Deleting a sentence is only allowed when it mentions nothing.
        step.decision = current_labels.all_not_mentioned() ? GuardDecision::kAccepted
                                                           : GuardDecision::kRejected;
      } else {
        step.decision = label_sentence(step.candidate, lexicon) == current_labels
                            ? GuardDecision::kAccepted
                            : GuardDecision::kRejected;
      }
      if (step.decision == GuardDecision::kAccepted) current = step.candidate;
    }
    out.steps.push_back(std::move(step));
  }
  out.result = std::move(current);
  return out;
}

std::string clean_sentence(std::string_view sentence, const std::vector<CleaningRule>& rules,
                           RewriteBackend& backend, const Lexicon& lexicon) {
  return clean_sentence_audited(sentence, rules, backend, lexicon).result;
}

ReportCleaning clean_report_audited(const Report& report, const std::vector<CleaningRule>& rules,
                                    RewriteBackend& backend, const Lexicon& lexicon) {
  ReportCleaning out;
  out.cleaned = report;
  std::vector<Sentence> kept;
  for (const auto& sentence : segment_sentences(normalize_text(report.impression))) {
    SentenceCleaning sc;
    try {
      sc = clean_sentence_audited(sentence.text, rules, backend, lexicon);
    } catch (const RemoteError& e) {
      throw RemoteError("study '" + report.study_id + "', sentence " +
                        std::to_string(sentence.index) + ": " + e.what());
    }
    if (sc.result != kRemoved) {
      std::string text = sc.result;
      if (ends_with_terminal_punctuation(sentence.text) && !ends_with_terminal_punctuation(text)) {
        text += '.';
      }
      kept.push_back(Sentence{std::move(text), kept.size()});
    }
    out.sentences.push_back(std::move(sc));
  }
  out.cleaned.impression = join_sentences(kept);
  return out;
}

Report clean_report(const Report& report, const std::vector<CleaningRule>& rules,
                    RewriteBackend& backend, const Lexicon& lexicon) {
  return clean_report_audited(report, rules, backend, lexicon).cleaned;
}

std::vector<ReportCleaning> clean_corpus(const Corpus& corpus,
                                         const std::vector<CleaningRule>& rules,
                                         RewriteBackend& backend, const Lexicon& lexicon,
                                         std::size_t jobs) {
  std::vector<ReportCleaning> out(corpus.size());
  parallel_for(corpus.size(), jobs, [&](std::size_t i) {
    out[i] = clean_report_audited(corpus[i], rules, backend, lexicon);
  });
  return out;
}

nlohmann::ordered_json audit_record(const std::string& study_id, std::size_t sentence_index,
                                    const SentenceCleaning& sentence) {
  nlohmann::ordered_json j;
  j["study_id"] = study_id;
  j["sentence_index"] = sentence_index;
  j["original"] = sentence.original;
  j["result"] = sentence.result;
  auto& steps = j["steps"] = nlohmann::ordered_json::array();
  for (const auto& step : sentence.steps) {
    nlohmann::ordered_json s;
    s["rule"] = step.rule_id;
    s["decision"] = std::string(to_string(step.decision));
    if (step.decision != GuardDecision::kNotTriggered &&
        step.decision != GuardDecision::kPassThrough) {
      s["candidate"] = step.candidate;
    }
    steps.push_back(std::move(s));
  }
  return j;
}

CleaningEvaluation evaluate_cleaning(const std::vector<std::string>& machine_cleaned,
                                     const std::vector<std::string>& manual_cleaned,
                                     const std::vector<std::string>& originals,
                                     const Lexicon& lexicon) {
  if (machine_cleaned.size() != manual_cleaned.size() || machine_cleaned.size() != originals.size()) {
    throw InputError("clean-eval inputs differ in length: " +
                     std::to_string(machine_cleaned.size()) + " machine, " +
                     std::to_string(manual_cleaned.size()) + " manual, " +
                     std::to_string(originals.size()) + " original");
  }
  std::vector<LabelVector> machine_labels, original_labels;
  std::size_t exact = 0;
  for (std::size_t i = 0; i < machine_cleaned.size(); ++i) {
    const auto machine = normalize_text(machine_cleaned[i]);
    const auto manual = normalize_text(manual_cleaned[i]);
    exact += machine == manual;
    machine_labels.push_back(machine == kRemoved ? LabelVector{} : label_sentence(machine, lexicon));
    original_labels.push_back(label_sentence(normalize_text(originals[i]), lexicon));
  }
  CleaningEvaluation eval;
  eval.pos_f1 = label_f1(machine_labels, original_labels, finding_conditions(),
                         LabelValue::kPositive).score;
  eval.neg_f1 = label_f1(machine_labels, original_labels, finding_conditions(),
                         LabelValue::kNegative).score;
  eval.em_accuracy = machine_cleaned.empty()
                         ? 0.0
                         : static_cast<double>(exact) / static_cast<double>(machine_cleaned.size());
  eval.bleu2 = bleu2(machine_cleaned, manual_cleaned);
  return eval;
}

}  // namespace pragrad
