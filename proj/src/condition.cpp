#include "pragrad/condition.hpp"

#include <algorithm>
#include <stdexcept>

namespace pragrad {

namespace {

constexpr std::array<std::string_view, kNumConditions> kNames = {
    "Atelectasis",      "Cardiomegaly",     "Consolidation",
    "Edema",            "Enlarged Cardiomediastinum",
    "Fracture",         "Lung Lesion",      "Lung Opacity",
    "Pleural Effusion", "Pleural Other",    "Pneumonia",
    "Pneumothorax",     "Support Devices",  "No Finding",
};

}  // namespace

std::string_view condition_name(Condition c) { return kNames[index_of(c)]; }

std::optional<Condition> condition_from_name(std::string_view name) {
  for (auto c : kAllConditions) {
    if (kNames[index_of(c)] == name) return c;
  }
  return std::nullopt;
}

const std::vector<Condition>& finding_conditions() {
  static const std::vector<Condition> conditions(kAllConditions.begin(),
                                                 kAllConditions.end() - 1);
  return conditions;
}

int precedence(LabelValue v) {
  switch (v) {
    case LabelValue::kPositive: return 3;
    case LabelValue::kUncertain: return 2;
    case LabelValue::kNegative: return 1;
    case LabelValue::kNotMentioned: return 0;
  }
  return 0;
}

LabelValue max_precedence(LabelValue a, LabelValue b) {
  return precedence(a) >= precedence(b) ? a : b;
}

bool is_mention(LabelValue v) { return v != LabelValue::kNotMentioned; }

std::string_view to_csv_cell(LabelValue v) {
  switch (v) {
    case LabelValue::kPositive: return "1.0";
    case LabelValue::kNegative: return "0.0";
    case LabelValue::kUncertain: return "-1.0";
    case LabelValue::kNotMentioned: return "";
  }
  return "";
}

std::optional<LabelValue> label_from_csv_cell(std::string_view cell) {
  if (cell.empty()) return LabelValue::kNotMentioned;
  if (cell == "1.0" || cell == "1") return LabelValue::kPositive;
  if (cell == "0.0" || cell == "0") return LabelValue::kNegative;
  if (cell == "-1.0" || cell == "-1") return LabelValue::kUncertain;
  return std::nullopt;
}

void LabelVector::set(Condition c, LabelValue v) {
  if (c == Condition::kNoFinding &&
      (v == LabelValue::kNegative || v == LabelValue::kUncertain)) {
    throw std::invalid_argument("No Finding admits only positive or not-mentioned");
  }
  values_[index_of(c)] = v;
}

void LabelVector::merge(const LabelVector& other) {
  for (std::size_t i = 0; i < kNumConditions; ++i) {
    values_[i] = max_precedence(values_[i], other.values_[i]);
  }
}

bool LabelVector::all_not_mentioned() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](LabelValue v) { return v == LabelValue::kNotMentioned; });
}

ConditionSet::ConditionSet(std::initializer_list<Condition> items) {
  for (auto c : items) insert(c);
}

std::vector<Condition> ConditionSet::members() const {
  std::vector<Condition> out;
  for (auto c : kAllConditions) {
    if (contains(c)) out.push_back(c);
  }
  return out;
}

std::string ConditionSet::key() const {
  std::string out;
  for (auto c : members()) {
    if (!out.empty()) out += '|';
    out += condition_name(c);
  }
  return out;
}

ConditionSet ConditionSet::from_key(std::string_view key) {
  ConditionSet set;
  while (!key.empty()) {
    auto bar = key.find('|');
    auto name = key.substr(0, bar);
    auto c = condition_from_name(name);
    if (!c) throw std::invalid_argument("unknown condition in key: " + std::string(name));
    set.insert(*c);
    if (bar == std::string_view::npos) break;
    key.remove_prefix(bar + 1);
  }
  return set;
}

bool ConditionSet::lexicographically_less(const ConditionSet& other) const {
  auto a = members();
  auto b = other.members();
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

ConditionSet positive_set(const LabelVector& labels, bool include_no_finding) {
  ConditionSet set;
  for (auto c : kAllConditions) {
    if (c == Condition::kNoFinding && !include_no_finding) continue;
    if (labels[c] == LabelValue::kPositive) set.insert(c);
  }
  return set;
}

}  // namespace pragrad
