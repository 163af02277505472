#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace pragrad {

// Collapses whitespace runs, trims both ends and canonicalizes runs of three
// or more underscores to "___". Idempotent.
std::string normalize_text(std::string_view raw);

struct Sentence {
  std::string text;
  std::size_t index = 0;

  bool operator==(const Sentence&) const = default;
};

// Splits normalized text on '.', '!' or '?' followed by a space and an
// uppercase letter or digit. Never splits after "Dr.", "a.m.", "p.m.",
// "e.g.", "i.e.", "vs." or a lone capital initial such as "J.".
std::vector<Sentence> segment_sentences(std::string_view normalized);

// Joins sentence texts with single spaces.
std::string join_sentences(const std::vector<Sentence>& sentences);

// Lowercase alphanumeric runs. '?' is kept as its own token when
// keep_question_mark is set (the labeler treats it as an uncertainty cue).
std::vector<std::string> tokenize(std::string_view text, bool keep_question_mark = false);

// Keyword match against a single lowercase token: stems of length >= 4 match
// by prefix, shorter stems ("ap", "pa", "new") only by equality.
bool token_matches_stem(std::string_view token, std::string_view stem);

// Multi-word cue match: every cue token but the last must be equal, the last
// follows token_matches_stem.
bool contains_cue(const std::vector<std::string>& tokens,
                  const std::vector<std::string>& cue_tokens);

bool has_alphanumeric(std::string_view text);
bool ends_with_terminal_punctuation(std::string_view text);

}  // namespace pragrad
