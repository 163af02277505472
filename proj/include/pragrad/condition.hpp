#pragma once

#include <array>
#include <bitset>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pragrad {

// The fourteen labeled conditions. The enumerator order is the canonical
// order used for CSV columns, prompt rendering and set keys.
enum class Condition : std::size_t {
  kAtelectasis,
  kCardiomegaly,
  kConsolidation,
  kEdema,
  kEnlargedCardiomediastinum,
  kFracture,
  kLungLesion,
  kLungOpacity,
  kPleuralEffusion,
  kPleuralOther,
  kPneumonia,
  kPneumothorax,
  kSupportDevices,
  kNoFinding,
};

inline constexpr std::size_t kNumConditions = 14;

inline constexpr std::array<Condition, kNumConditions> kAllConditions = {
    Condition::kAtelectasis,      Condition::kCardiomegaly,
    Condition::kConsolidation,    Condition::kEdema,
    Condition::kEnlargedCardiomediastinum,
    Condition::kFracture,         Condition::kLungLesion,
    Condition::kLungOpacity,      Condition::kPleuralEffusion,
    Condition::kPleuralOther,     Condition::kPneumonia,
    Condition::kPneumothorax,     Condition::kSupportDevices,
    Condition::kNoFinding,
};

constexpr std::size_t index_of(Condition c) { return static_cast<std::size_t>(c); }

std::string_view condition_name(Condition c);
std::optional<Condition> condition_from_name(std::string_view name);

// Every condition except No Finding, in canonical order.
const std::vector<Condition>& finding_conditions();

// Four-valued mention status. Precedence for aggregation is
// positive > uncertain > negative > not-mentioned.
enum class LabelValue { kNotMentioned, kNegative, kUncertain, kPositive };

int precedence(LabelValue v);
LabelValue max_precedence(LabelValue a, LabelValue b);
bool is_mention(LabelValue v);

// CSV cell: "1.0", "0.0", "-1.0" or "".
std::string_view to_csv_cell(LabelValue v);
std::optional<LabelValue> label_from_csv_cell(std::string_view cell);

class LabelVector {
 public:
  LabelVector() { values_.fill(LabelValue::kNotMentioned); }

  LabelValue operator[](Condition c) const { return values_[index_of(c)]; }
  // Setting No Finding to negative or uncertain throws std::invalid_argument.
  void set(Condition c, LabelValue v);

  // Raises each entry to the higher-precedence value of the two vectors.
  void merge(const LabelVector& other);

  bool all_not_mentioned() const;
  bool operator==(const LabelVector&) const = default;

 private:
  std::array<LabelValue, kNumConditions> values_;
};

// Set of conditions in canonical order.
class ConditionSet {
 public:
  ConditionSet() = default;
  ConditionSet(std::initializer_list<Condition> items);

  void insert(Condition c) { bits_.set(index_of(c)); }
  void erase(Condition c) { bits_.reset(index_of(c)); }
  bool contains(Condition c) const { return bits_.test(index_of(c)); }
  bool empty() const { return bits_.none(); }
  std::size_t size() const { return bits_.count(); }
  std::vector<Condition> members() const;

  std::size_t intersection_size(const ConditionSet& other) const {
    return (bits_ & other.bits_).count();
  }
  std::size_t union_size(const ConditionSet& other) const {
    return (bits_ | other.bits_).count();
  }

  // Canonical textual key: member names joined by '|', "" for the empty set.
  std::string key() const;
  static ConditionSet from_key(std::string_view key);

  // Lexicographic comparison of the member index sequences.
  bool lexicographically_less(const ConditionSet& other) const;

  bool operator==(const ConditionSet&) const = default;

 private:
  std::bitset<kNumConditions> bits_;
};

ConditionSet positive_set(const LabelVector& labels, bool include_no_finding);

}  // namespace pragrad
