#include "pragrad/labeler.hpp"

#include <algorithm>

#include "pragrad/parallel.hpp"
#include "pragrad/text.hpp"

namespace pragrad {

namespace {

using Tokens = std::vector<std::string>;

bool matches_at(const Tokens& tokens, std::size_t pos, const TokenPhrase& phrase) {
  if (pos + phrase.size() > tokens.size()) return false;
  return std::equal(phrase.begin(), phrase.end(), tokens.begin() + static_cast<std::ptrdiff_t>(pos));
}

// Whether some cue ends before `phrase_start`, within the scope window and
// with no terminator between the cue and the phrase.
bool cue_in_scope(const Tokens& tokens, std::size_t phrase_start,
                  const std::vector<TokenPhrase>& cues, const Lexicon& lexicon) {
  const auto window = lexicon.scope_window();
  const auto& terminators = lexicon.terminators();
  for (std::size_t distance = 1; distance <= window && distance <= phrase_start; ++distance) {
    const std::size_t cue_end = phrase_start - distance;
    // Tokens strictly between the cue and the phrase.
    if (distance > 1) {
      const auto& between = tokens[cue_end + 1];
      if (std::find(terminators.begin(), terminators.end(), between) != terminators.end()) {
        return false;
      }
    }
    for (const auto& cue : cues) {
      if (cue.size() > cue_end + 1) continue;
      if (matches_at(tokens, cue_end + 1 - cue.size(), cue)) return true;
    }
  }
  return false;
}

LabelValue classify_occurrence(const Tokens& tokens, std::size_t start, const Lexicon& lexicon) {
  if (cue_in_scope(tokens, start, lexicon.uncertainty_cues(), lexicon)) return LabelValue::kUncertain;
  if (cue_in_scope(tokens, start, lexicon.negation_cues(), lexicon)) return LabelValue::kNegative;
  return LabelValue::kPositive;
}

}  // namespace

LabelVector label_sentence(std::string_view sentence, const Lexicon& lexicon) {
  const auto tokens = tokenize(sentence, /*keep_question_mark=*/true);
  LabelVector labels;
  for (auto c : kAllConditions) {
    LabelValue value = LabelValue::kNotMentioned;
    for (const auto& phrase : lexicon.phrases(c)) {
      for (std::size_t pos = 0; pos + phrase.size() <= tokens.size(); ++pos) {
        if (!matches_at(tokens, pos, phrase)) continue;
        if (c == Condition::kNoFinding) {
          value = LabelValue::kPositive;
        } else {
          value = max_precedence(value, classify_occurrence(tokens, pos, lexicon));
        }
      }
    }
    labels.set(c, value);
  }
  return labels;
}

LabelVector label_report(std::string_view text, const Lexicon& lexicon) {
  LabelVector aggregate;
  for (const auto& sentence : segment_sentences(normalize_text(text))) {
    aggregate.merge(label_sentence(sentence.text, lexicon));
  }
  for (auto c : finding_conditions()) {
    auto v = aggregate[c];
    if (v == LabelValue::kPositive || v == LabelValue::kUncertain) {
      aggregate.set(Condition::kNoFinding, LabelValue::kNotMentioned);
      break;
    }
  }
  return aggregate;
}

ConditionSet indication_mentions(std::string_view indication, const Lexicon& lexicon) {
  const auto labels = label_report(indication, lexicon);
  ConditionSet mentions;
  for (auto c : finding_conditions()) {
    if (is_mention(labels[c])) mentions.insert(c);
  }
  return mentions;
}

std::vector<LabeledStudy> label_corpus(const Corpus& corpus, const Lexicon& lexicon,
                                       std::size_t jobs) {
  std::vector<LabeledStudy> out(corpus.size());
  parallel_for(corpus.size(), jobs, [&](std::size_t i) {
    out[i] = LabeledStudy{corpus[i].study_id, label_report(corpus[i].impression, lexicon)};
  });
  return out;
}

std::map<std::string, ConditionSet> indication_mentions_by_study(const Corpus& corpus,
                                                                 const Lexicon& lexicon,
                                                                 std::size_t jobs) {
  std::vector<ConditionSet> sets(corpus.size());
  parallel_for(corpus.size(), jobs, [&](std::size_t i) {
    sets[i] = indication_mentions(corpus[i].indication, lexicon);
  });
  std::map<std::string, ConditionSet> out;
  for (std::size_t i = 0; i < corpus.size(); ++i) out.emplace(corpus[i].study_id, sets[i]);
  return out;
}

}  // namespace pragrad
