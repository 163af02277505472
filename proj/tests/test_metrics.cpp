#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "pragrad/errors.hpp"
#include "pragrad/labeler.hpp"
#include "pragrad/metrics.hpp"
#include "support/synthetic.hpp"

using namespace pragrad;

namespace {

constexpr auto kPos = LabelValue::kPositive;
constexpr auto kNeg = LabelValue::kNegative;
constexpr auto kUnc = LabelValue::kUncertain;

LabelVector with(std::initializer_list<std::pair<Condition, LabelValue>> cells) {
  LabelVector v;
  for (auto [c, val] : cells) v.set(c, val);
  return v;
}

std::vector<LabeledStudy> studies(const std::vector<LabelVector>& labels) {
  std::vector<LabeledStudy> out;
  for (std::size_t i = 0; i < labels.size(); ++i) out.push_back({"m" + std::to_string(i), labels[i]});
  return out;
}

Corpus load_fixture(const std::string& name) {
  std::ifstream in(std::string(PRAGRAD_FIXTURES) + "/evaluate/" + name);
  REQUIRE(in.good());
  return read_report_jsonl(in, name);
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("positive F1 on a hand-counted fixture") {
    // Edema: TP on reports 0 and 1, FP on 2, FN on 3.
    const std::vector<LabelVector> pred = {with({{Condition::kEdema, kPos}}),
                                           with({{Condition::kEdema, kPos}}),
                                           with({{Condition::kEdema, kPos}}), LabelVector{}};
    const std::vector<LabelVector> ref = {with({{Condition::kEdema, kPos}}),
                                          with({{Condition::kEdema, kPos}}), LabelVector{},
                                          with({{Condition::kEdema, kPos}})};
    const auto r = positive_f1(studies(pred), studies(ref), finding_conditions());
    CHECK(r.score == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    const auto& edema = r.per_condition[3];
    CHECK(edema.condition == Condition::kEdema);
    CHECK(edema.true_positives == 2);
    CHECK(edema.false_positives == 1);
    CHECK(edema.false_negatives == 1);
    CHECK(edema.support == 3);
    CHECK(edema.precision == doctest::Approx(2.0 / 3.0));
    CHECK(edema.recall == doctest::Approx(2.0 / 3.0));
  }

  TEST_CASE("negative F1 on a hand-counted fixture") {
    const std::vector<LabelVector> pred = {with({{Condition::kPneumonia, kNeg}}), LabelVector{}};
    const std::vector<LabelVector> ref = {with({{Condition::kPneumonia, kNeg}}),
                                          with({{Condition::kPneumonia, kNeg}})};
    CHECK(negative_f1(studies(pred), studies(ref), finding_conditions()).score ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  }

  TEST_CASE("F1 identity and zero cases") {
    std::vector<LabelVector> ref;
    for (auto c : finding_conditions()) ref.push_back(with({{c, kPos}}));
    CHECK(positive_f1(studies(ref), studies(ref), finding_conditions()).score == 1.0);
    std::vector<LabelVector> silent(ref.size());
    CHECK(positive_f1(studies(silent), studies(ref), finding_conditions()).score == 0.0);

    std::vector<LabelVector> negs;
    for (auto c : finding_conditions()) negs.push_back(with({{c, kNeg}}));
    CHECK(negative_f1(studies(negs), studies(negs), finding_conditions()).score == 1.0);
    CHECK(negative_f1(studies(silent), studies(negs), finding_conditions()).score == 0.0);

    // No condition active at all.
    CHECK(positive_f1(studies(silent), studies(silent), finding_conditions()).score == 0.0);
  }

  TEST_CASE("micro averaging pools counts") {
    // Edema TP=1; Pneumonia FP=1 FN=1.
    const std::vector<LabelVector> pred = {with({{Condition::kEdema, kPos}}),
                                           with({{Condition::kPneumonia, kPos}}), LabelVector{}};
    const std::vector<LabelVector> ref = {with({{Condition::kEdema, kPos}}), LabelVector{},
                                          with({{Condition::kPneumonia, kPos}})};
    const auto macro = label_f1(pred, ref, finding_conditions(), kPos, F1Averaging::kMacro);
    const auto micro = label_f1(pred, ref, finding_conditions(), kPos, F1Averaging::kMicro);
    CHECK(macro.score == doctest::Approx(0.5));
    CHECK(micro.score == doctest::Approx(0.5));  // P = R = 1/2
    const std::vector<LabelVector> pred2 = {with({{Condition::kEdema, kPos}}),
                                            with({{Condition::kEdema, kPos}}), LabelVector{}};
    const std::vector<LabelVector> ref2 = {with({{Condition::kEdema, kPos}}),
                                           with({{Condition::kEdema, kPos}}),
                                           with({{Condition::kPneumonia, kPos}})};
    // Macro: mean(1, 0) = 0.5. Micro: tp 2, fn 1 -> P 1, R 2/3, F1 0.8.
    CHECK(label_f1(pred2, ref2, finding_conditions(), kPos).score == doctest::Approx(0.5));
    CHECK(label_f1(pred2, ref2, finding_conditions(), kPos, F1Averaging::kMicro).score ==
          doctest::Approx(0.8));
  }

  TEST_CASE("misaligned label sets are rejected") {
    auto a = studies({LabelVector{}, LabelVector{}});
    auto b = a;
    b[1].study_id = "other";
    CHECK_THROWS_AS(positive_f1(a, b, finding_conditions()), InputError);
    b.pop_back();
    CHECK_THROWS_AS(negative_f1(a, b, finding_conditions()), InputError);
  }

  TEST_CASE("fixed condition subsets") {
    CHECK(default_positive_five() ==
          std::vector<Condition>{Condition::kAtelectasis, Condition::kCardiomegaly,
                                 Condition::kConsolidation, Condition::kEdema,
                                 Condition::kPleuralEffusion});
    CHECK(negative_five() ==
          std::vector<Condition>{Condition::kConsolidation, Condition::kEdema,
                                 Condition::kPleuralEffusion, Condition::kPneumonia,
                                 Condition::kPneumothorax});
  }

  TEST_CASE("most frequent positives break ties by canonical order") {
    std::vector<LabelVector> ref = {
        with({{Condition::kPneumothorax, kPos}, {Condition::kFracture, kPos}}),
        with({{Condition::kPneumothorax, kPos}, {Condition::kSupportDevices, kPos}}),
        with({{Condition::kLungLesion, kPos}, {Condition::kEdema, kPos}})};
    CHECK(most_frequent_positive(ref) ==
          std::vector<Condition>{Condition::kEdema, Condition::kFracture, Condition::kLungLesion,
                                 Condition::kPneumothorax, Condition::kSupportDevices});
  }

  TEST_CASE("BLEU-2 worked example") {
    const double expected = std::exp(1.0 - 4.0 / 3.0) * std::sqrt(1.0 * 0.5);
    CHECK(bleu2({"no acute process"}, {"no acute cardiopulmonary process"}) ==
          doctest::Approx(expected).epsilon(1e-14));
    CHECK(expected == doctest::Approx(0.5067).epsilon(1e-4));
    const auto s = bleu2_stats({"no acute process"}, {"no acute cardiopulmonary process"});
    CHECK(s.matches[0] == 3);
    CHECK(s.totals[0] == 3);
    CHECK(s.matches[1] == 1);
    CHECK(s.totals[1] == 2);
  }

  TEST_CASE("BLEU-2 edge cases") {
    CHECK(bleu2({"No acute process."}, {"no  acute process"}) == doctest::Approx(1.0));
    CHECK(bleu2({"process acute no"}, {"no acute process"}) == 0.0);
    CHECK(bleu2({}, {}) == 0.0);
    CHECK(bleu2({""}, {"edema"}) == 0.0);
    CHECK_THROWS_AS(bleu2({"a"}, {}), InputError);
    // Clipping: "the the the" against "the cat" has unigram precision 1/3.
    const auto s = bleu2_stats({"the the the"}, {"the cat"});
    CHECK(s.matches[0] == 1);
  }

  TEST_CASE("keyword catalog defaults") {
    const auto& cat = KeywordCatalog::builtin();
    REQUIRE(cat.categories().size() == 5);
    CHECK(cat.categories()[0].stems.size() == 21);
    CHECK(cat.categories()[1].stems == std::vector<std::string>{"status"});
    CHECK(cat.categories()[3].stems == std::vector<std::string>{"ap", "pa", "lateral", "view"});
    CHECK_THROWS_AS(KeywordCatalog::parse("version = x\n[a]\nUpper\n"), InputError);
    CHECK_THROWS_AS(KeywordCatalog::parse("[a]\nstem\n"), InputError);
  }

  TEST_CASE("hallucination examples") {
    const auto& cat = KeywordCatalog::builtin();
    CHECK(flagged_categories("Compared to prior, improved effusion.", cat) ==
          std::vector<std::size_t>{0});
    CHECK(flagged_categories("No pneumothorax.", cat).empty());
    CHECK(flagged_categories("Apical pneumothorax, papillary.", cat).empty());
    CHECK(flagged_categories("AP and PA views.", cat) == std::vector<std::size_t>{3});
    CHECK(flagged_categories("Patient is status post CABG.", cat) == std::vector<std::size_t>{1});
    const auto r = hallucination_rate(
        {"No pneumothorax.", "Edema.", "Recommend CT.", "Small effusion."}, cat);
    CHECK(r.rate == 0.25);
    CHECK(r.per_category[4] == 0.25);
    CHECK(r.flagged == std::vector<bool>{false, false, true, false});
    CHECK(hallucination_rate({}, cat).rate == 0.0);
  }

  TEST_CASE("evaluate_generation identity") {
    const auto corpus = testing::corpus_of(testing::planted_corpus(40, 8));
    const auto m = evaluate_generation(corpus, corpus, corpus, Lexicon::builtin(),
                                       KeywordCatalog::builtin());
    CHECK(m.pos_f1.score == 1.0);
    CHECK(m.neg_f1.score == 1.0);
    CHECK(m.pos_f1_5.score == 1.0);
    CHECK(m.neg_f1_5.score == 1.0);
    CHECK(m.bleu2 == doctest::Approx(1.0));
    CHECK(m.clean_bleu2 == doctest::Approx(1.0));
    std::vector<std::string> texts;
    for (const auto& r : corpus) texts.push_back(r.impression);
    CHECK(m.hallucination.rate == hallucination_rate(texts, KeywordCatalog::builtin()).rate);
  }

  TEST_CASE("evaluate_generation rejects misaligned corpora") {
    auto a = testing::corpus_of(testing::planted_corpus(3, 1));
    auto b = a;
    std::swap(b[0], b[1]);
    CHECK_THROWS_AS(evaluate_generation(a, b, a, Lexicon::builtin(), KeywordCatalog::builtin()),
                    InputError);
  }

  TEST_CASE("evaluate_generation matches the independent fixture oracle") {
    const auto gen = load_fixture("generated.jsonl");
    const auto orig = load_fixture("ref_original.jsonl");
    const auto clean = load_fixture("ref_clean.jsonl");
    std::ifstream in(std::string(PRAGRAD_FIXTURES) + "/evaluate/expected.json");
    const auto expected = nlohmann::json::parse(in);
    const auto m = evaluate_generation(gen, orig, clean, Lexicon::builtin(), KeywordCatalog::builtin());
    CHECK(m.reports == expected["reports"].get<std::size_t>());
    for (const auto& [key, got] :
         std::vector<std::pair<std::string, double>>{{"pos_f1", m.pos_f1.score},
                                                     {"pos_f1_5", m.pos_f1_5.score},
                                                     {"neg_f1", m.neg_f1.score},
                                                     {"neg_f1_5", m.neg_f1_5.score},
                                                     {"bleu2", m.bleu2},
                                                     {"clean_bleu2", m.clean_bleu2},
                                                     {"hallucination_rate", m.hallucination.rate}}) {
      CAPTURE(key);
      CHECK(std::fabs(got - expected[key].get<double>()) < 1e-12);
    }
    for (std::size_t i = 0; i < m.hallucination_categories.size(); ++i) {
      CHECK(m.hallucination.per_category[i] ==
            expected["hallucination_per_category"][m.hallucination_categories[i]].get<double>());
    }
  }

  TEST_CASE("metrics CSV row") {
    MetricsReport m;
    m.pos_f1.score = 0.3071;
    m.neg_f1.score = 0.05;
    m.hallucination.rate = 0.158;
    std::ostringstream out;
    write_metrics_csv_row(m, "retrieval", out);
    CHECK(out.str() ==
          "model,pos_f1,pos_f1_5,bleu2,clean_bleu2,neg_f1,neg_f1_5,hallucination\n"
          "retrieval,0.307,0.000,0.000,0.000,0.050,0.000,0.158\n");
  }
}

TEST_SUITE("properties") {
  LabelValue random_value(std::mt19937& rng) {
    static const LabelValue values[] = {kPos, kNeg, kUnc, LabelValue::kNotMentioned};
    return values[rng() % 4];
  }

  std::vector<LabelVector> random_labels(std::mt19937& rng, std::size_t n) {
    std::vector<LabelVector> out(n);
    for (auto& v : out) {
      for (auto c : finding_conditions()) v.set(c, random_value(rng));
    }
    return out;
  }

  TEST_CASE("F1 scores lie in the unit interval and identity gives 1") {
    std::mt19937 rng(31);
    for (int i = 0; i < 200; ++i) {
      const auto a = random_labels(rng, 12), b = random_labels(rng, 12);
      for (auto target : {kPos, kNeg}) {
        for (auto avg : {F1Averaging::kMacro, F1Averaging::kMicro}) {
          const double s = label_f1(a, b, finding_conditions(), target, avg).score;
          CHECK(s >= 0.0);
          CHECK(s <= 1.0);
          CHECK(label_f1(a, a, finding_conditions(), target, avg).score == 1.0);
        }
      }
    }
  }

  TEST_CASE("negative F1 ignores positive and uncertain swaps") {
    std::mt19937 rng(32);
    for (int i = 0; i < 200; ++i) {
      const auto pred = random_labels(rng, 15), ref = random_labels(rng, 15);
      auto swapped = pred;
      for (auto& v : swapped) {
        for (auto c : finding_conditions()) {
          if (rng() % 2 == 0) continue;
          if (v[c] == kPos) v.set(c, kUnc);
          else if (v[c] == kUnc) v.set(c, kPos);
        }
      }
      CHECK(label_f1(pred, ref, finding_conditions(), kNeg).score ==
            label_f1(swapped, ref, finding_conditions(), kNeg).score);
    }
  }

  TEST_CASE("BLEU-2 is invariant to corpus order") {
    std::mt19937 rng(33);
    static const std::vector<std::string> words = {"no", "acute", "process", "edema", "small",
                                                   "right", "effusion", "is", "there"};
    auto text = [&] {
      std::string s;
      for (int k = 0, n = 1 + static_cast<int>(rng() % 8); k < n; ++k) s += words[rng() % words.size()] + " ";
      return s;
    };
    for (int i = 0; i < 100; ++i) {
      std::vector<std::string> h, r;
      for (int k = 0; k < 10; ++k) {
        h.push_back(text());
        r.push_back(text());
      }
      const double before = bleu2(h, r);
      CHECK(before >= 0.0);
      CHECK(before <= 1.0);
      std::vector<std::size_t> perm(h.size());
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      std::vector<std::string> hp, rp;
      for (auto p : perm) {
        hp.push_back(h[p]);
        rp.push_back(r[p]);
      }
      CHECK(bleu2(hp, rp) == before);
    }
  }

  TEST_CASE("hallucination rate is monotone") {
    const auto& full = KeywordCatalog::builtin();
    std::vector<KeywordCategory> fewer(full.categories().begin(), full.categories().begin() + 2);
    const KeywordCatalog subset("subset", fewer);
    std::mt19937 rng(34);
    static const std::vector<std::string> pool = {
        "No pneumothorax.", "Compared to prior, edema.", "Recommend CT.", "AP view.",
        "Status post CABG.", "Small effusion.", "Findings were conveyed.", "Heart size normal."};
    for (int i = 0; i < 200; ++i) {
      std::vector<std::string> reports;
      for (int k = 0, n = static_cast<int>(rng() % 10); k < n; ++k) reports.push_back(pool[rng() % pool.size()]);
      const double base = hallucination_rate(reports, full).rate;
      CHECK(hallucination_rate(reports, subset).rate <= base);
      auto more = reports;
      more.push_back("Recommend follow up.");
      CHECK(hallucination_rate(more, full).rate >= base);
    }
  }

  TEST_CASE("clean BLEU of a cleaned corpus against itself is 1") {
    const auto corpus = testing::corpus_of(testing::planted_corpus(30, 35));
    const auto m = evaluate_generation(corpus, corpus, corpus, Lexicon::builtin(),
                                       KeywordCatalog::builtin());
    CHECK(m.clean_bleu2 == doctest::Approx(1.0).epsilon(1e-15));
  }
}
