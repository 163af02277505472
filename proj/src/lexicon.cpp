#include "pragrad/lexicon.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "pragrad/errors.hpp"
#include "pragrad/text.hpp"
#include "sectioned_text.hpp"

namespace pragrad {

namespace builtin {
extern const std::string_view kLexiconText;
}

namespace {

TokenPhrase phrase_tokens(const std::string& entry, const std::string& where) {
  for (char c : entry) {
    if (std::isupper(static_cast<unsigned char>(c))) {
      throw InputError(where + ": phrase '" + entry + "' must be lowercase");
    }
  }
  auto tokens = tokenize(entry, /*keep_question_mark=*/true);
  if (tokens.empty()) throw InputError(where + ": empty phrase '" + entry + "'");
  return tokens;
}

}  // namespace

Lexicon Lexicon::parse(std::string_view text, const std::string& source) {
  auto parsed = detail::parse_sectioned(text, source);
  Lexicon lex;

  auto version = parsed.settings.find("version");
  if (version == parsed.settings.end() || version->second.empty()) {
    throw InputError(source + ": missing 'version' setting");
  }
  lex.version_ = version->second;

  auto window = parsed.settings.find("scope_window");
  if (window == parsed.settings.end()) throw InputError(source + ": missing 'scope_window' setting");
  try {
    long value = std::stol(window->second);
    if (value < 1) throw InputError(source + ": scope_window must be >= 1");
    lex.scope_window_ = static_cast<std::size_t>(value);
  } catch (const std::logic_error&) {
    throw InputError(source + ": scope_window must be an integer");
  }

  for (const auto& [name, entries] : parsed.sections) {
    auto where = source + " [" + name + "]";
    if (name == "negation" || name == "uncertainty") {
      auto& target = name == "negation" ? lex.negation_ : lex.uncertainty_;
      for (const auto& e : entries) target.push_back(phrase_tokens(e, where));
    } else if (name == "terminators") {
      for (const auto& e : entries) {
        auto tokens = phrase_tokens(e, where);
        if (tokens.size() != 1) throw InputError(where + ": terminator must be one token");
        lex.terminators_.push_back(tokens.front());
      }
    } else if (name.rfind("condition ", 0) == 0) {
      auto cname = name.substr(10);
      auto c = condition_from_name(cname);
      if (!c) throw InputError(where + ": unknown condition '" + cname + "'");
      for (const auto& e : entries) lex.phrases_[index_of(*c)].push_back(phrase_tokens(e, where));
    } else {
      throw InputError(where + ": unknown section");
    }
  }

  for (auto c : kAllConditions) {
    if (lex.phrases_[index_of(c)].empty()) {
      throw InputError(source + ": condition '" + std::string(condition_name(c)) +
                       "' has no phrases");
    }
  }
  return lex;
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path.string() + ": cannot open lexicon");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.string());
}

const Lexicon& Lexicon::builtin() {
  static const Lexicon lex = parse(builtin::kLexiconText, "data/lexicon.txt");
  return lex;
}

}  // namespace pragrad
