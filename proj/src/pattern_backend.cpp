#include <cctype>
#include <map>
#include <regex>
#include <utility>

#include "pragrad/cleaning.hpp"
#include "pragrad/text.hpp"

namespace pragrad {

namespace {

struct Production {
  std::regex pattern;
  std::string replacement;
};

std::regex re(const std::string& pattern) {
  return std::regex(pattern, std::regex::ECMAScript | std::regex::icase | std::regex::optimize);
}

// Organ words; rules 5 and 6 leave sentences about organ changes alone.
const std::string kOrgan =
    R"((?:heart|cardiac|cardiomediastinal|lung volumes?|lungs?|mediastin\w*|hil(?:a|um|ar)\b|aort\w*))";
const std::string kNotOrgan = "(?!(?:the )?" + kOrgan + "\\b)";

const std::string kView =
    R"((?:frontal|lateral|pa|ap|portable|upright|supine|semi-upright|oblique|decubitus)\b)";
const std::string kViews = kView + R"((?:(?:\s*(?:and|/|,)\s*|\s+)(?:the )?)" + kView + ")*";
const std::string kViewNoun = R"((?:views?|radiographs?|images?|films?|projections?))";

std::vector<Production> comparison_rule() {
  const std::string prior_word = R"((?:prior|previous|earlier|last|recent|most recent|preceding))";
  const std::string study_word =
      R"((?:chest radiographs?|radiographs?|studies|study|examinations?|exams?|films?|images?|x-rays?|ct))";
  return {
      {re(R"(^(?:there (?:is|has been|are) )?(?:no|without) (?:(?:significant|substantial|appreciable|interval|major|relevant) )*changes?(?: (?:since|from|compared (?:to|with)|in comparison (?:to|with)|relative to)\b.*)?\.?$)"),
       ""},
      {re(R"(^(?:comparison|compared) (?:is made )?(?:to|with)\b[^,;]*\.?$)"), ""},
      {re(R"(^(?:as |when )?(?:in comparison (?:to|with)|compared (?:to|with)|comparison (?:is made )?(?:to|with)|relative to)\b[^,:;]*[,:;]\s*)"),
       ""},
      {re(R"(\s*,?\s*(?:as |when )?(?:compared (?:to|with)|in comparison (?:to|with)|relative to)\b[^,:;.]*)"),
       ""},
      {re("\\s*,?\\s*\\b(?:since|from|than|versus|on) (?:the )?(?:" + prior_word + " )+" + study_word +
          R"((?: (?:of|from|on|dated) (?:___|[^,;.]*))?)"),
       ""},
      {re(R"(\s*,?\s*\bsince ___)"), ""},
      {re(R"(\s+since(?=\.?$))"), ""},
  };
}

std::vector<Production> view_and_procedure_rule() {
  return {
      {re(R"(^(?:the )?(?:patient|pt) (?:is|has been) status post\b.*$)"), ""},
      {re(R"(^status post\b[^,]*$)"), ""},
      {re("^(?:the )?" + kViews + "(?: chest)?(?: " + kViewNoun +
          R"((?: of the chest)?(?: (?:was|were) (?:obtained|provided|submitted|performed))?)?\.?$)"),
       ""},
      {re(R"(^status post [^,]*,\s*)"), ""},
      {re(R"(\s*,?\s*\bstatus post\b.*$)"), ""},
      {re("^(?:(?:on|in) )?(?:the )?" + kViews + "(?: chest)?(?: " + kViewNoun +
          R"((?: of the chest)?)?\s*[,:]\s*)"),
       ""},
      {re("^(?:the )?" + kViews + "(?: chest)? " + kViewNoun +
          R"((?: of the chest)?(?: (?:raises?|demonstrates?|shows?|reveals?))?\s+)"),
       ""},
      {re("\\s*,?\\s*\\b(?:on|in) (?:the )?" + kViews + "(?: chest)? " + kViewNoun + "\\b"), ""},
  };
}

std::vector<Production> new_or_increased_rule() {
  const std::string change_adj = "(?:new|newly|increasing|increased|worsening|worsened|enlarging)";
  return {
      {re("^(?:(?:mild|slight|slightly|minimal|minimally|moderate|small|marked|significant|"
          "substantial) )?(?:interval )?(?:increase|increasing|worsening|worsened|progression|"
          "enlargement) (?:in|of) (?:size of )?(?:the )?" +
          kNotOrgan + R"((.+?)\.?$)"),
       "$1."},
      {re("^new(?:ly)?(?: (?:appearing|developed|onset))?\\s+" + kNotOrgan), ""},
      {re("(?:\\b(?:mildly|slightly|minimally|markedly|somewhat) )?\\b" + change_adj +
          "(?: (?:or|and) " + change_adj + ")?\\s+" + kNotOrgan +
          R"((?!(?:in|of|since|from|to|and|or|size)\b)(?=[a-z]))"),
       ""},
      {re("^" + kNotOrgan +
          R"((.+?) (?:has|have) (?:increased|worsened|progressed)(?: (?:in size|slightly|mildly|somewhat))*(?: (?:since|from|compared)\b[^.]*)?(\.?)$)"),
       "$1$2"},
      {re("^" + kNotOrgan +
          R"((.+?) (?:is|are) (?:new|increased|worse|worsened|larger|greater)(?: (?:in size|since|from|compared)\b[^.]*)?(\.?)$)"),
       "$1$2"},
  };
}

std::vector<Production> unchanged_or_improved_rule() {
  return {
      {re("^" + kNotOrgan +
          R"((.*?[a-z0-9)])(?:\s*,)?(?: (?:is|are|has|have|appears?|remains?|been|probably|likely|essentially|overall|grossly|slightly|mildly|minimally|somewhat|partially|not significantly|relatively|largely))* (?:unchanged|improved|improving|stable|decreased|decreasing|smaller|persistent|persists|persisting|similar)(?: in (?:size|extent|appearance))?(?: (?:since|from|compared (?:to|with)|when compared|to)\b[^.]*)?(\.?)$)"),
       "$1$2"},
      {re(R"(^(?:(?:overall|grossly|essentially|relatively) )?(?:slightly improved|partially improved|unchanged|stable|persistent|persisting|improved|improving|decreased|decreasing|similar)\s+)" +
          kNotOrgan + R"((?!(?:appearance|and|or|in|since|from|compared)\b)(?=[a-z]))"),
       ""},
      {re(R"(\b(is|are|with|of|and) (?:persistent|unchanged|stable|persisting) )" + kNotOrgan +
          R"((?!(?:appearance|and|or|in|since)\b)(?=[a-z]))"),
       "$1 "},
  };
}

std::vector<Production> resolved_rule() {
  return {
      {re(R"(^(?:(?:interval|complete|completely) )*(?:resolved|resolution of(?: the)?|clearance of(?: the)?|disappearance of(?: the)?) (.+)$)"),
       "No $1"},
  };
}

std::string tidy(std::string s) {
  static const std::regex space_before_punct(R"(\s+([,.;:!?]))");
  static const std::regex comma_before_period(R"([,;:]+\.)");
  static const std::regex leading(R"(^[\s,;:]+)");
  static const std::regex trailing(R"([\s,;:]+$)");
  s = normalize_text(s);
  s = std::regex_replace(s, space_before_punct, "$1");
  s = std::regex_replace(s, comma_before_period, ".");
  s = std::regex_replace(s, leading, "");
  s = std::regex_replace(s, trailing, "");
  return s;
}

}  // namespace

struct PatternBackend::Productions {
  std::map<int, std::vector<Production>> by_rule;
};

PatternBackend::PatternBackend() : productions_(std::make_unique<Productions>()) {
  productions_->by_rule[1] = comparison_rule();
  productions_->by_rule[4] = view_and_procedure_rule();
  productions_->by_rule[5] = new_or_increased_rule();
  productions_->by_rule[6] = unchanged_or_improved_rule();
  productions_->by_rule[7] = resolved_rule();
}

PatternBackend::~PatternBackend() = default;

std::string PatternBackend::rewrite(const CleaningRule& rule, std::string_view sentence) {
  if (rule.action == RuleAction::kRemoveSentence) return std::string(kRemoved);
  const std::string original = normalize_text(sentence);
  auto it = productions_->by_rule.find(rule.id);
  if (it == productions_->by_rule.end()) return original;

  std::string out = original;
  for (const auto& p : it->second) out = std::regex_replace(out, p.pattern, p.replacement);
  out = tidy(std::move(out));
  if (!has_alphanumeric(out)) return std::string(kRemoved);
  if (out != original) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  return out;
}

}  // namespace pragrad
