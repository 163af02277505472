#pragma once

// Parser for the small sectioned data files (lexicon, keyword catalog).
// Lines starting with '#' and blank lines are ignored; "key = value" lines
// before the first section are settings; "[name]" opens a section whose
// remaining lines are entries.

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pragrad/errors.hpp"

namespace pragrad::detail {

struct SectionedText {
  std::map<std::string, std::string> settings;
  // Sections in file order.
  std::vector<std::pair<std::string, std::vector<std::string>>> sections;
};

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline SectionedText parse_sectioned(std::string_view text, const std::string& source) {
  SectionedText out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    auto raw = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto loc = source + ":" + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') throw InputError(loc + ": unterminated section header");
      out.sections.emplace_back(std::string(trim(line.substr(1, line.size() - 2))),
                                std::vector<std::string>{});
      continue;
    }
    if (out.sections.empty()) {
      auto eq = line.find('=');
      if (eq == std::string_view::npos) throw InputError(loc + ": expected 'key = value'");
      out.settings[std::string(trim(line.substr(0, eq)))] = std::string(trim(line.substr(eq + 1)));
      continue;
    }
    out.sections.back().second.emplace_back(line);
  }
  return out;
}

}  // namespace pragrad::detail
