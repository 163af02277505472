#include <doctest.h>

#include <random>

#include "pragrad/errors.hpp"
#include "pragrad/labeler.hpp"
#include "support/synthetic.hpp"

using namespace pragrad;

namespace {

const Lexicon& lex() { return Lexicon::builtin(); }

// Conditions with a mention, for compact assertions.
std::map<Condition, LabelValue> mentions(const LabelVector& v) {
  std::map<Condition, LabelValue> out;
  for (auto c : kAllConditions) {
    if (v[c] != LabelValue::kNotMentioned) out[c] = v[c];
  }
  return out;
}

using M = std::map<Condition, LabelValue>;
constexpr auto kPos = LabelValue::kPositive;
constexpr auto kNeg = LabelValue::kNegative;
constexpr auto kUnc = LabelValue::kUncertain;

}  // namespace

TEST_SUITE("labeler") {
  TEST_CASE("lexicon file invariants") {
    CHECK(lex().version() == "pragrad-lexicon-1.0");
    CHECK(lex().scope_window() >= 1);
    for (auto c : kAllConditions) {
      CHECK_FALSE(lex().phrases(c).empty());
      for (const auto& phrase : lex().phrases(c)) {
        for (const auto& tok : phrase) {
          for (char ch : tok) CHECK_FALSE((ch >= 'A' && ch <= 'Z'));
        }
      }
    }
  }

  TEST_CASE("lexicon parser rejects bad files") {
    CHECK_THROWS_AS(Lexicon::parse("scope_window = 3\n"), InputError);
    CHECK_THROWS_AS(Lexicon::parse("version = x\nscope_window = 0\n"), InputError);
    CHECK_THROWS_AS(Lexicon::parse("version = x\nscope_window = 2\n[condition Edema]\nEdema\n"),
                    InputError);
    CHECK_THROWS_AS(Lexicon::parse("version = x\nscope_window = 2\n[condition Nope]\nx\n"),
                    InputError);
  }

  TEST_CASE("sentence examples") {
    CHECK(mentions(label_sentence("there is no pneumonia", lex())) ==
          M{{Condition::kPneumonia, kNeg}});
    CHECK(mentions(label_sentence("Large right pneumothorax", lex())) ==
          M{{Condition::kPneumothorax, kPos}});
    CHECK(mentions(label_sentence("concern for pneumonia at the left lung base", lex())) ==
          M{{Condition::kPneumonia, kUnc}});
  }

  TEST_CASE("uncertainty outranks negation") {
    CHECK(mentions(label_sentence("No definite pneumonia, cannot exclude early pneumonia.", lex())) ==
          M{{Condition::kPneumonia, kUnc}});
    CHECK(mentions(label_sentence("possible but no edema", lex())) == M{{Condition::kEdema, kNeg}});
    CHECK(mentions(label_sentence("no possible edema", lex())) == M{{Condition::kEdema, kUnc}});
  }

  TEST_CASE("negation scope window") {
    // Distance from the cue's end to the phrase start, in tokens.
    CHECK(label_sentence("no edema", lex())[Condition::kEdema] == kNeg);
    CHECK(label_sentence("no a b c d e edema", lex())[Condition::kEdema] == kNeg);
    CHECK(label_sentence("no a b c d e f edema", lex())[Condition::kEdema] == kPos);
    // Cues after the phrase never apply.
    CHECK(label_sentence("edema no", lex())[Condition::kEdema] == kPos);
    CHECK(label_sentence("edema is possible", lex())[Condition::kEdema] == kPos);
  }

  TEST_CASE("terminators stop cue scope") {
    CHECK(label_sentence("no pneumothorax but small effusion", lex())[Condition::kPleuralEffusion] ==
          kPos);
    CHECK(label_sentence("no pneumothorax but small effusion", lex())[Condition::kPneumothorax] ==
          kNeg);
  }

  TEST_CASE("question mark is an uncertainty cue") {
    CHECK(mentions(label_sentence("?pneumothorax", lex())) == M{{Condition::kPneumothorax, kUnc}});
  }

  TEST_CASE("report aggregation") {
    CHECK(mentions(label_report("No pneumonia. Small right pleural effusion.", lex())) ==
          M{{Condition::kPneumonia, kNeg}, {Condition::kPleuralEffusion, kPos}});
    CHECK(label_report("", lex()).all_not_mentioned());
    CHECK(mentions(label_report("No acute cardiopulmonary process.", lex())) ==
          M{{Condition::kNoFinding, kPos}});
    CHECK(label_report("No edema. Edema.", lex())[Condition::kEdema] == kPos);
    CHECK(label_report("No edema. Possible edema.", lex())[Condition::kEdema] == kUnc);
  }

  TEST_CASE("No Finding is dropped when another condition is positive or uncertain") {
    CHECK(label_report("No acute cardiopulmonary process. Possible pneumonia.", lex())
              [Condition::kNoFinding] == LabelValue::kNotMentioned);
    CHECK(label_report("No acute cardiopulmonary process. No pneumonia.", lex())
              [Condition::kNoFinding] == kPos);
  }

  TEST_CASE("indication mentions") {
    CHECK(indication_mentions("previous aspiration pneumonia and a history of congestive heart failure",
                              lex()) == ConditionSet{Condition::kPneumonia, Condition::kCardiomegaly});
    CHECK(indication_mentions("", lex()).empty());
    CHECK(indication_mentions("evaluate for pneumothorax", lex()) == ConditionSet{Condition::kPneumothorax});
    CHECK(indication_mentions("?pneumothorax", lex()) == ConditionSet{Condition::kPneumothorax});
    CHECK(indication_mentions("rule out pneumonia, no acute process", lex()) ==
          ConditionSet{Condition::kPneumonia});
  }

  TEST_CASE("labeler agrees with planted labels") {
    const auto planted = testing::planted_corpus(300, 5);
    const auto labels = label_corpus(testing::corpus_of(planted), lex(), 3);
    for (std::size_t i = 0; i < planted.size(); ++i) {
      CHECK(labels[i].study_id == planted[i].report.study_id);
      CHECK(labels[i].labels == planted[i].labels);
      CHECK(indication_mentions(planted[i].report.indication, lex()) == planted[i].indication);
    }
  }
}

TEST_SUITE("properties") {
  std::string random_sentence(std::mt19937& rng) {
    static const std::vector<std::string> words = {
        "no", "possible", "pneumonia", "edema", "effusion", "but", "small", "left", "without",
        "concern", "for", "tube", "is", "there", "?", "mild", "not", "atelectasis", "may", "be"};
    std::string s;
    const int n = 1 + static_cast<int>(rng() % 12);
    for (int i = 0; i < n; ++i) s += (i ? " " : "") + words[rng() % words.size()];
    if (s[0] == '?') s = "is " + s;
    s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    return s + ".";
  }

  TEST_CASE("labeling is deterministic") {
    std::mt19937 rng(3);
    for (int i = 0; i < 500; ++i) {
      const auto s = random_sentence(rng);
      CHECK(label_report(s, lex()) == label_report(s, lex()));
    }
  }

  TEST_CASE("aggregate of a concatenation is the precedence maximum") {
    std::mt19937 rng(4);
    for (int i = 0; i < 1000; ++i) {
      const auto a = random_sentence(rng);
      const auto b = random_sentence(rng);
      LabelVector expected = label_report(a, lex());
      expected.merge(label_report(b, lex()));
      const auto got = label_report(a + " " + b, lex());
      for (auto c : finding_conditions()) CHECK(got[c] == expected[c]);
    }
  }

  TEST_CASE("negation cues beyond the window or after the phrase never flip polarity") {
    std::mt19937 rng(5);
    const std::vector<std::string> filler = {"small", "left", "basilar", "mild", "there", "is"};
    for (int i = 0; i < 300; ++i) {
      std::string s = "no";
      const std::size_t gap = lex().scope_window() + 1 + rng() % 4;
      for (std::size_t k = 0; k < gap; ++k) s += " " + filler[rng() % filler.size()];
      s += " edema";
      CHECK(label_sentence(s, lex())[Condition::kEdema] == kPos);
      CHECK(label_sentence("edema " + s.substr(0, s.size() - 6), lex())[Condition::kEdema] == kPos);
    }
  }

  TEST_CASE("No Finding excludes positive and uncertain findings at report level") {
    std::mt19937 rng(6);
    for (int i = 0; i < 1000; ++i) {
      const auto text = random_sentence(rng) + " No acute process. " + random_sentence(rng);
      const auto v = label_report(text, lex());
      if (v[Condition::kNoFinding] == kPos) {
        for (auto c : finding_conditions()) {
          CHECK(v[c] != kPos);
          CHECK(v[c] != kUnc);
        }
      }
    }
  }
}
