#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "pragrad/condition.hpp"
#include "pragrad/corpus_io.hpp"
#include "pragrad/lexicon.hpp"

namespace pragrad {

// Labels a single normalized sentence.
//
// A condition is not-mentioned when none of its phrases occur. Otherwise each
// occurrence is uncertain if an uncertainty cue is in scope, negative if a
// negation cue is in scope, positive otherwise; several occurrences combine
// by precedence. No Finding is positive whenever one of its phrases occurs.
LabelVector label_sentence(std::string_view sentence, const Lexicon& lexicon);

// Normalizes and segments `text`, labels every sentence and aggregates with
// positive > uncertain > negative > not-mentioned. No Finding survives only
// when no other condition ends up positive or uncertain.
LabelVector label_report(std::string_view text, const Lexicon& lexicon);

// Conditions mentioned (positive, negative or uncertain) in an indication.
// No Finding is never included.
ConditionSet indication_mentions(std::string_view indication, const Lexicon& lexicon);

// Impression labels for every report, in corpus order.
std::vector<LabeledStudy> label_corpus(const Corpus& corpus, const Lexicon& lexicon,
                                       std::size_t jobs = 1);

// Indication mention sets keyed by study id.
std::map<std::string, ConditionSet> indication_mentions_by_study(const Corpus& corpus,
                                                                 const Lexicon& lexicon,
                                                                 std::size_t jobs = 1);

}  // namespace pragrad
