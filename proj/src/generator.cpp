#include "pragrad/generator.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>
#include <tuple>

#include "pragrad/errors.hpp"
#include "pragrad/labeler.hpp"
#include "pragrad/text.hpp"

namespace pragrad {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::uint64_t fnv1a(std::uint64_t hash, std::string_view bytes) {
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

// The single condition a sentence negates, if its labels are exactly one
// negative mention.
std::optional<Condition> sole_negative(const LabelVector& labels) {
  std::optional<Condition> found;
  for (auto c : kAllConditions) {
    if (labels[c] == LabelValue::kNotMentioned) continue;
    if (labels[c] != LabelValue::kNegative || found) return std::nullopt;
    found = c;
  }
  return found;
}

template <typename T>
T field(const json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end()) throw InputError(std::string("index: missing field '") + name + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw InputError(std::string("index: field '") + name + "' has the wrong type");
  }
}

}  // namespace

void validate_request(const GenerationRequest& request) {
  if (request.predicted_positives.contains(Condition::kNoFinding) &&
      request.predicted_positives.size() > 1) {
    throw InputError("request '" + request.study_id +
                     "': No Finding cannot be combined with other positives");
  }
}

ConditionSet retrieval_key_set(const ConditionSet& positives) {
  ConditionSet s = positives;
  s.erase(Condition::kNoFinding);
  return s;
}

RetrievalIndex RetrievalIndex::build(const Corpus& cleaned, const Lexicon& lexicon) {
  if (cleaned.empty()) throw InputError("cannot build a retrieval index from an empty corpus");
  RetrievalIndex index;
  index.lexicon_version_ = lexicon.version();
  index.corpus_size_ = cleaned.size();
  std::uint64_t hash = 14695981039346656037ULL;

  for (const auto& report : cleaned) {
    hash = fnv1a(hash, report_to_json_line(report));
    hash = fnv1a(hash, "\n");
    const std::string impression = normalize_text(report.impression);
    const auto labels = label_report(impression, lexicon);
    index.by_key_[positive_set(labels, false).key()].push_back(report.study_id);
    index.impressions_[report.study_id] = impression;

    for (const auto& sentence : segment_sentences(impression)) {
      if (auto c = sole_negative(label_sentence(sentence.text, lexicon))) {
        index.pools_[index_of(*c)].push_back(
            PooledSentence{capitalize(sentence.text), report.study_id, sentence.index});
      }
    }
  }
  index.corpus_hash_ = hash;

  for (auto& [key, ids] : index.by_key_) {
    std::sort(ids.begin(), ids.end(), [&](const std::string& x, const std::string& y) {
      return std::make_tuple(index.impressions_[x].size(), x) <
             std::make_tuple(index.impressions_[y].size(), y);
    });
  }
  for (auto c : finding_conditions()) {
    auto& pool = index.pools_[index_of(c)];
    std::sort(pool.begin(), pool.end(), [](const PooledSentence& x, const PooledSentence& y) {
      return std::make_tuple(x.text.size(), x.study_id, x.sentence_index) <
             std::make_tuple(y.text.size(), y.study_id, y.sentence_index);
    });
    if (pool.empty()) {
      index.warnings_.push_back("empty negative pool: " + std::string(condition_name(c)));
    }
  }
  return index;
}

const std::string& RetrievalIndex::impression(const std::string& study_id) const {
  auto it = impressions_.find(study_id);
  if (it == impressions_.end()) throw InputError("index has no report '" + study_id + "'");
  return it->second;
}

ordered_json RetrievalIndex::to_json() const {
  ordered_json j;
  j["format_version"] = kFormatVersion;
  j["lexicon_version"] = lexicon_version_;
  j["corpus"] = {{"hash", hex64(corpus_hash_)}, {"reports", corpus_size_}};
  j["keys"] = ordered_json::object();
  for (const auto& [key, ids] : by_key_) j["keys"][key] = ids;
  j["pools"] = ordered_json::object();
  for (auto c : finding_conditions()) {
    auto& arr = j["pools"][std::string(condition_name(c))] = ordered_json::array();
    for (const auto& p : pools_[index_of(c)]) {
      arr.push_back({{"text", p.text}, {"study_id", p.study_id}, {"sentence_index", p.sentence_index}});
    }
  }
  j["impressions"] = ordered_json::object();
  for (const auto& [id, text] : impressions_) j["impressions"][id] = text;
  j["warnings"] = warnings_;
  return j;
}

RetrievalIndex RetrievalIndex::from_json(const json& j, const Lexicon& lexicon) {
  if (!j.is_object()) throw InputError("index: expected a JSON object");
  if (field<int>(j, "format_version") != kFormatVersion) {
    throw InputError("index: unsupported format_version");
  }
  RetrievalIndex index;
  index.lexicon_version_ = field<std::string>(j, "lexicon_version");
  if (index.lexicon_version_ != lexicon.version()) {
    throw InputError("index was built with lexicon '" + index.lexicon_version_ +
                     "' but the current lexicon is '" + lexicon.version() + "'");
  }
  const auto corpus = field<json>(j, "corpus");
  const auto hash = field<std::string>(corpus, "hash");
  try {
    index.corpus_hash_ = std::stoull(hash, nullptr, 16);
  } catch (const std::exception&) {
    throw InputError("index: bad corpus hash '" + hash + "'");
  }
  index.corpus_size_ = field<std::size_t>(corpus, "reports");
  index.by_key_ = field<std::map<std::string, std::vector<std::string>>>(j, "keys");
  index.impressions_ = field<std::map<std::string, std::string>>(j, "impressions");
  for (const auto& [key, ids] : index.by_key_) {
    for (const auto& id : ids) {
      if (!index.impressions_.count(id)) {
        throw InputError("index: key '" + key + "' lists unknown report '" + id + "'");
      }
    }
  }
  const auto pools = field<json>(j, "pools");
  for (auto it = pools.begin(); it != pools.end(); ++it) {
    auto c = condition_from_name(it.key());
    if (!c) throw InputError("index: unknown pool condition '" + it.key() + "'");
    for (const auto& p : it.value()) {
      index.pools_[index_of(*c)].push_back(PooledSentence{
          field<std::string>(p, "text"), field<std::string>(p, "study_id"),
          field<std::size_t>(p, "sentence_index")});
    }
  }
  index.warnings_ = field<std::vector<std::string>>(j, "warnings");
  return index;
}

RetrievalIndex RetrievalIndex::load(const std::filesystem::path& path, const Lexicon& lexicon) {
  std::ifstream in(path);
  if (!in) throw InputError(path.string() + ": cannot open file");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path.string() + ": malformed index: " + e.what());
  }
  try {
    return from_json(j, lexicon);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

GenerationResult generate_retrieval(const GenerationRequest& request, const RetrievalIndex& index,
                                    const Lexicon& lexicon, const RetrievalOptions& options) {
  if (index.empty()) throw InputError("retrieval index is empty");
  validate_request(request);
  GenerationResult result;

  std::vector<std::string> negatives;
  if (options.use_indication) {
    const auto mentioned = indication_mentions(request.indication, lexicon);
    for (auto c : mentioned.members()) {
      if (c == Condition::kNoFinding || request.predicted_positives.contains(c)) continue;
      const auto& pool = index.pool(c);
      if (pool.empty()) {
        result.empty_pools.push_back(c);
      } else {
        negatives.push_back(pool.front().text);
        result.negated.push_back(c);
      }
    }
  }

  const ConditionSet target = retrieval_key_set(request.predicted_positives);
  const std::string target_key = target.key();
  auto exact = index.by_key().find(target_key);
  if (exact != index.by_key().end()) {
    result.exact_key = true;
    result.retrieved_key = target_key;
  } else {
    // Jaccard compared as exact fractions; the map is already in key order,
    // so only strictly better candidates replace the current best.
    std::size_t best_inter = 0, best_union = 0;
    bool have_best = false;
    for (const auto& [key, ids] : index.by_key()) {
      const auto candidate = ConditionSet::from_key(key);
      std::size_t inter = candidate.intersection_size(target);
      std::size_t uni = candidate.union_size(target);
      if (uni == 0) inter = uni = 1;
      bool better = !have_best;
      if (have_best) {
        const auto lhs = inter * best_union;
        const auto rhs = best_inter * uni;
        better = lhs > rhs || (lhs == rhs && uni - inter < best_union - best_inter);
      }
      if (better) {
        have_best = true;
        best_inter = inter;
        best_union = uni;
        result.retrieved_key = key;
      }
    }
  }
  result.retrieved_study_id = index.by_key().at(result.retrieved_key).front();

  std::string text = index.impression(result.retrieved_study_id);
  if (!text.empty() && !ends_with_terminal_punctuation(text)) text += '.';
  for (const auto& sentence : negatives) {
    if (!text.empty()) text += ' ';
    text += sentence;
  }
  result.text = std::move(text);
  return result;
}

std::string build_generation_prompt(const GenerationRequest& request) {
  std::string labels;
  for (auto c : request.predicted_positives.members()) {
    if (!labels.empty()) labels += ", ";
    labels += c == Condition::kNoFinding ? std::string("no finding") : std::string(condition_name(c));
  }
  if (labels.empty()) labels = "no finding";
  return "Below is an instruction that describes a task, paired with an input that provides "
         "further context.\n"
         "Write a response that appropriately completes the request.\n"
         "\n"
         "### Instruction:\n"
         "Write a radiology report responding to the indication. Include all given positive "
         "labels.\n"
         "\n"
         "### Input:\n"
         "Indication: " +
         request.indication +
         "\n"
         "Positive labels: " +
         labels +
         "\n"
         "\n"
         "### Response:\n";
}

ordered_json generation_audit(const GenerationRequest& request, const GenerationResult& result) {
  auto names = [](const std::vector<Condition>& cs) {
    std::vector<std::string> out;
    for (auto c : cs) out.emplace_back(condition_name(c));
    return out;
  };
  ordered_json j;
  j["study_id"] = request.study_id;
  j["requested_key"] = request.predicted_positives.key();
  j["retrieved_key"] = result.retrieved_key;
  j["exact_key"] = result.exact_key;
  j["retrieved_study_id"] = result.retrieved_study_id;
  j["negated"] = names(result.negated);
  j["empty_pools"] = names(result.empty_pools);
  return j;
}

std::vector<GenerationRequest> read_generation_requests(std::istream& in,
                                                        const std::string& source) {
  std::vector<GenerationRequest> out;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (normalize_text(line).empty()) continue;
    const std::string loc = source + ":" + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error&) {
      throw InputError(loc + ": malformed JSON");
    }
    if (!j.is_object()) throw InputError(loc + ": expected a JSON object");
    GenerationRequest r;
    if (!j.contains("study_id") || !j["study_id"].is_string()) {
      throw InputError(loc + ": missing field 'study_id'");
    }
    r.study_id = j["study_id"].get<std::string>();
    if (j.contains("indication")) {
      if (!j["indication"].is_string()) throw InputError(loc + ": field 'indication' must be a string");
      r.indication = j["indication"].get<std::string>();
    }
    if (j.contains("positives")) {
      if (!j["positives"].is_array()) throw InputError(loc + ": field 'positives' must be an array");
      for (const auto& name : j["positives"]) {
        auto c = name.is_string() ? condition_from_name(name.get<std::string>()) : std::nullopt;
        if (!c) throw InputError(loc + ": unknown condition in 'positives'");
        r.predicted_positives.insert(*c);
      }
    }
    if (!seen.insert(r.study_id).second) {
      throw InputError(loc + ": duplicate study_id '" + r.study_id + "'");
    }
    try {
      validate_request(r);
    } catch (const InputError& e) {
      throw InputError(loc + ": " + e.what());
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<GenerationRequest> read_generation_requests(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path.string() + ": cannot open file");
  return read_generation_requests(in, path.string());
}

void apply_predictions(std::vector<GenerationRequest>& requests,
                       const std::vector<LabeledStudy>& predictions) {
  const auto by_id = index_by_study(predictions);
  for (auto& r : requests) {
    auto it = by_id.find(r.study_id);
    if (it == by_id.end()) throw InputError("no prediction row for study_id '" + r.study_id + "'");
    r.predicted_positives = positive_set(it->second, true);
    validate_request(r);
  }
}

}  // namespace pragrad
