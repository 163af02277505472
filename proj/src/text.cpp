#include "pragrad/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace pragrad {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
bool is_upper(char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }
char to_lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

constexpr std::array<std::string_view, 6> kAbbreviations = {
    "dr.", "a.m.", "p.m.", "e.g.", "i.e.", "vs.",
};

// Word (maximal non-space run) that ends at position `end` inclusive.
std::string_view word_ending_at(std::string_view text, std::size_t end) {
  std::size_t begin = end;
  while (begin > 0 && !is_space(text[begin - 1])) --begin;
  return text.substr(begin, end - begin + 1);
}

bool is_protected_period(std::string_view word) {
  // Opening brackets or quotes glued to the word do not count.
  auto first = word.find_first_not_of("([\"'");
  if (first != std::string_view::npos) word.remove_prefix(first);
  std::string lower(word);
  std::transform(lower.begin(), lower.end(), lower.begin(), to_lower);
  for (auto abbr : kAbbreviations) {
    if (lower == abbr) return true;
  }
  // Single capital initial, e.g. "J."
  return word.size() == 2 && is_upper(word[0]) && word[1] == '.';
}

}  // namespace

std::string normalize_text(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  std::size_t i = 0;
  while (i < raw.size()) {
    char c = raw[i];
    if (is_space(c)) {
      pending_space = !out.empty();
      ++i;
      continue;
    }
    if (pending_space) {
      out += ' ';
      pending_space = false;
    }
    if (c == '_') {
      std::size_t j = i;
      while (j < raw.size() && raw[j] == '_') ++j;
      std::size_t run = j - i;
      out.append(run >= 3 ? std::string("___") : std::string(run, '_'));
      i = j;
      continue;
    }
    out += c;
    ++i;
  }
  return out;
}

std::vector<Sentence> segment_sentences(std::string_view text) {
  std::vector<Sentence> out;
  std::size_t start = 0;
  auto emit = [&](std::size_t end) {
    auto piece = text.substr(start, end - start);
    while (!piece.empty() && is_space(piece.front())) piece.remove_prefix(1);
    while (!piece.empty() && is_space(piece.back())) piece.remove_suffix(1);
    if (!piece.empty()) out.push_back(Sentence{std::string(piece), out.size()});
  };
  for (std::size_t i = 0; i + 2 < text.size(); ++i) {
    char c = text[i];
    if (c != '.' && c != '!' && c != '?') continue;
    if (!is_space(text[i + 1])) continue;
    char next = text[i + 2];
    if (!is_upper(next) && !is_digit(next)) continue;
    if (c == '.' && is_protected_period(word_ending_at(text, i))) continue;
    emit(i + 1);
    start = i + 2;
  }
  emit(text.size());
  return out;
}

std::string join_sentences(const std::vector<Sentence>& sentences) {
  std::string out;
  for (const auto& s : sentences) {
    if (!out.empty()) out += ' ';
    out += s.text;
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text, bool keep_question_mark) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : text) {
    if (is_alnum(c)) {
      current += to_lower(c);
      continue;
    }
    if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
    if (keep_question_mark && c == '?') tokens.emplace_back("?");
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

bool token_matches_stem(std::string_view token, std::string_view stem) {
  if (stem.size() >= 4) return token.substr(0, stem.size()) == stem;
  return token == stem;
}

bool contains_cue(const std::vector<std::string>& tokens,
                  const std::vector<std::string>& cue_tokens) {
  if (cue_tokens.empty() || cue_tokens.size() > tokens.size()) return false;
  for (std::size_t i = 0; i + cue_tokens.size() <= tokens.size(); ++i) {
    bool ok = true;
    for (std::size_t k = 0; k + 1 < cue_tokens.size() && ok; ++k) {
      ok = tokens[i + k] == cue_tokens[k];
    }
    if (ok && token_matches_stem(tokens[i + cue_tokens.size() - 1], cue_tokens.back())) {
      return true;
    }
  }
  return false;
}

bool has_alphanumeric(std::string_view text) {
  return std::any_of(text.begin(), text.end(), is_alnum);
}

bool ends_with_terminal_punctuation(std::string_view text) {
  return !text.empty() && (text.back() == '.' || text.back() == '!' || text.back() == '?');
}

}  // namespace pragrad
