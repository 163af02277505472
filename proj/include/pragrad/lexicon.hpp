#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "pragrad/condition.hpp"

namespace pragrad {

using TokenPhrase = std::vector<std::string>;

// Condition phrases plus negation/uncertainty cues for the rule labeler.
// Loaded from a sectioned text file:
//
//   version = <id>
//   scope_window = <int>
//   [negation] / [uncertainty] / [terminators] / [condition <Name>]
//
// followed by one lowercase phrase per line.
class Lexicon {
 public:
  static Lexicon parse(std::string_view text, const std::string& source = "<lexicon>");
  static Lexicon load(const std::filesystem::path& path);
  // The lexicon shipped in data/lexicon.txt.
  static const Lexicon& builtin();

  const std::string& version() const { return version_; }
  std::size_t scope_window() const { return scope_window_; }
  const std::vector<TokenPhrase>& negation_cues() const { return negation_; }
  const std::vector<TokenPhrase>& uncertainty_cues() const { return uncertainty_; }
  const std::vector<std::string>& terminators() const { return terminators_; }
  const std::vector<TokenPhrase>& phrases(Condition c) const { return phrases_[index_of(c)]; }

 private:
  std::string version_;
  std::size_t scope_window_ = 0;
  std::vector<TokenPhrase> negation_;
  std::vector<TokenPhrase> uncertainty_;
  std::vector<std::string> terminators_;
  std::array<std::vector<TokenPhrase>, kNumConditions> phrases_;
};

}  // namespace pragrad
