#include <doctest.h>

#include <functional>
#include <random>
#include <sstream>

#include "pragrad/corpus_io.hpp"
#include "pragrad/errors.hpp"
#include "support/synthetic.hpp"

using namespace pragrad;

namespace {

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

std::string label_header() {
  std::string h = "study_id";
  for (auto c : kAllConditions) h += "," + std::string(condition_name(c));
  return h;
}

}  // namespace

TEST_SUITE("corpus_io") {
  TEST_CASE("conditions have a fixed canonical order") {
    CHECK(kAllConditions.size() == 14);
    CHECK(condition_name(kAllConditions.front()) == "Atelectasis");
    CHECK(condition_name(Condition::kEnlargedCardiomediastinum) == "Enlarged Cardiomediastinum");
    CHECK(condition_name(kAllConditions.back()) == "No Finding");
    for (auto c : kAllConditions) CHECK(condition_from_name(condition_name(c)) == c);
    CHECK_FALSE(condition_from_name("Lung opacity").has_value());
    CHECK(finding_conditions().size() == 13);
  }

  TEST_CASE("label values serialize to the four CSV cells") {
    CHECK(to_csv_cell(LabelValue::kPositive) == "1.0");
    CHECK(to_csv_cell(LabelValue::kNegative) == "0.0");
    CHECK(to_csv_cell(LabelValue::kUncertain) == "-1.0");
    CHECK(to_csv_cell(LabelValue::kNotMentioned) == "");
    for (auto v : {LabelValue::kPositive, LabelValue::kNegative, LabelValue::kUncertain,
                   LabelValue::kNotMentioned}) {
      CHECK(label_from_csv_cell(to_csv_cell(v)) == v);
    }
    CHECK_FALSE(label_from_csv_cell("2.0").has_value());
  }

  TEST_CASE("No Finding admits only positive or not-mentioned") {
    LabelVector v;
    CHECK_NOTHROW(v.set(Condition::kNoFinding, LabelValue::kPositive));
    CHECK_THROWS_AS(v.set(Condition::kNoFinding, LabelValue::kNegative), std::invalid_argument);
    CHECK_THROWS_AS(v.set(Condition::kNoFinding, LabelValue::kUncertain), std::invalid_argument);
  }

  TEST_CASE("condition set keys") {
    ConditionSet s{Condition::kPleuralEffusion, Condition::kEdema};
    CHECK(s.key() == "Edema|Pleural Effusion");
    CHECK(ConditionSet::from_key(s.key()) == s);
    CHECK(ConditionSet{}.key() == "");
    CHECK(ConditionSet::from_key("") == ConditionSet{});
  }

  TEST_CASE("report JSONL maps fields directly") {
    std::istringstream in(
        R"({"study_id":"s1","indication":"cough","impression":"No acute process."})"
        "\n\n"
        R"({"study_id":"s2","impression":"Edema.","findings":"Mild edema."})"
        "\n");
    const auto corpus = read_report_jsonl(in, "t.jsonl");
    REQUIRE(corpus.size() == 2);
    CHECK(corpus[0] == Report{"s1", "cough", "No acute process.", std::nullopt});
    CHECK(corpus[1].indication == "");
    CHECK(corpus[1].findings == std::optional<std::string>("Mild edema."));
  }

  TEST_CASE("report JSONL errors name the line and field") {
    std::istringstream missing(
        R"({"study_id":"s1","impression":"x"})"
        "\n"
        R"({"study_id":"s2"})"
        "\n");
    CHECK(error_of([&] { read_report_jsonl(missing, "c.jsonl"); }) ==
          "c.jsonl:2: missing field 'impression'");

    std::istringstream malformed("{not json}\n");
    CHECK(error_of([&] { read_report_jsonl(malformed, "c.jsonl"); }).find("c.jsonl:1") == 0);

    std::istringstream dup(
        R"({"study_id":"s1","impression":"x"})"
        "\n"
        R"({"study_id":"s1","impression":"y"})"
        "\n");
    CHECK(error_of([&] { read_report_jsonl(dup, "c.jsonl"); }).find("duplicate") != std::string::npos);
  }

  TEST_CASE("report JSONL round-trips") {
    Corpus corpus = {{"a", "cough", "No acute process.", std::nullopt},
                     {"b", "", "Line \"quoted\" and unicode é.", std::string("Findings.")},
                     {"c", "?ptx", "", std::nullopt}};
    std::stringstream ss;
    write_report_jsonl(corpus, ss);
    CHECK(read_report_jsonl(ss) == corpus);
  }

  TEST_CASE("label CSV round-trips") {
    std::vector<LabeledStudy> rows(3);
    rows[0].study_id = "a";
    rows[0].labels.set(Condition::kNoFinding, LabelValue::kPositive);
    rows[1].study_id = "b,with comma";
    rows[1].labels.set(Condition::kEdema, LabelValue::kUncertain);
    rows[1].labels.set(Condition::kPneumonia, LabelValue::kNegative);
    rows[2].study_id = "c";
    std::stringstream ss;
    write_label_csv(rows, ss);
    CHECK(ss.str().rfind(label_header() + "\n", 0) == 0);
    CHECK(read_label_csv(ss) == rows);
  }

  TEST_CASE("label CSV schema errors") {
    std::string h13 = "study_id";
    for (std::size_t i = 0; i + 1 < kAllConditions.size(); ++i) {
      h13 += "," + std::string(condition_name(kAllConditions[i]));
    }
    std::istringstream missing(h13 + "\n");
    CHECK(error_of([&] { read_label_csv(missing, "l.csv"); }).find("missing condition column") !=
          std::string::npos);

    std::istringstream unknown(label_header() + ",Bogus\n");
    CHECK(error_of([&] { read_label_csv(unknown, "l.csv"); }).find("unknown condition column") !=
          std::string::npos);

    std::istringstream short_row(label_header() + "\ns1,1.0\n");
    CHECK(error_of([&] { read_label_csv(short_row, "l.csv"); }).find("l.csv:2") == 0);

    std::istringstream bad_cell(label_header() + "\ns1,7" + std::string(13, ',') + "\n");
    CHECK(error_of([&] { read_label_csv(bad_cell, "l.csv"); }).find("l.csv:2") == 0);
  }
}

TEST_SUITE("properties") {
  TEST_CASE("corpus round-trip on random synthetic corpora") {
    for (std::uint32_t seed = 1; seed <= 20; ++seed) {
      auto corpus = testing::corpus_of(testing::planted_corpus(30, seed));
      std::mt19937 rng(seed);
      for (auto& r : corpus) {
        if (rng() % 2) r.findings = "F " + r.impression;
        if (rng() % 5 == 0) r.impression += " \"quoted\" \\ back\tslash";
      }
      std::stringstream ss;
      write_report_jsonl(corpus, ss);
      CHECK(read_report_jsonl(ss) == corpus);
    }
  }
}
