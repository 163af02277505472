#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "pragrad/condition.hpp"
#include "pragrad/corpus_io.hpp"
#include "pragrad/lexicon.hpp"

namespace pragrad {

struct GenerationRequest {
  std::string study_id;
  std::string indication;
  // No Finding may only appear alone.
  ConditionSet predicted_positives;
};

// Throws InputError when No Finding is combined with another condition.
void validate_request(const GenerationRequest& request);

// Positive set used for retrieval keys: No Finding is dropped, so {No Finding}
// and {} both select reports without positive findings.
ConditionSet retrieval_key_set(const ConditionSet& positives);

struct PooledSentence {
  std::string text;
  std::string study_id;
  std::size_t sentence_index = 0;

  bool operator==(const PooledSentence&) const = default;
};

class RetrievalIndex {
 public:
  static constexpr int kFormatVersion = 1;

  // Keys every report by the positive set of its impression (No Finding
  // excluded) and pools sentences whose labels are exactly one negative
  // mention. Throws InputError on an empty corpus.
  static RetrievalIndex build(const Corpus& cleaned, const Lexicon& lexicon);

  // Throws InputError when the stored lexicon version differs from `lexicon`.
  static RetrievalIndex from_json(const nlohmann::json& j, const Lexicon& lexicon);
  static RetrievalIndex load(const std::filesystem::path& path, const Lexicon& lexicon);
  nlohmann::ordered_json to_json() const;

  bool empty() const { return by_key_.empty(); }
  const std::map<std::string, std::vector<std::string>>& by_key() const { return by_key_; }
  const std::vector<PooledSentence>& pool(Condition c) const { return pools_[index_of(c)]; }
  const std::string& impression(const std::string& study_id) const;

  const std::string& lexicon_version() const { return lexicon_version_; }
  std::uint64_t corpus_hash() const { return corpus_hash_; }
  std::size_t corpus_size() const { return corpus_size_; }
  // Build-time notes such as empty negative pools.
  const std::vector<std::string>& warnings() const { return warnings_; }

  bool operator==(const RetrievalIndex&) const = default;

 private:
  std::map<std::string, std::vector<std::string>> by_key_;
  std::map<std::string, std::string> impressions_;
  std::array<std::vector<PooledSentence>, kNumConditions> pools_;
  std::string lexicon_version_;
  std::uint64_t corpus_hash_ = 0;
  std::size_t corpus_size_ = 0;
  std::vector<std::string> warnings_;
};

struct GenerationResult {
  std::string text;
  std::string retrieved_study_id;
  std::string retrieved_key;
  bool exact_key = false;
  // Conditions covered by an appended negative sentence, canonical order.
  std::vector<Condition> negated;
  // Indication conditions skipped because their pool was empty.
  std::vector<Condition> empty_pools;
};

struct RetrievalOptions {
  // When false the indication is ignored and no negative sentences are added.
  bool use_indication = true;
};

// Retrieves the first report under the request's positive set (or the
// nearest key by Jaccard overlap, then smaller symmetric difference, then
// key order) and appends the first pooled negative sentence for every
// indication condition that is not predicted positive.
GenerationResult generate_retrieval(const GenerationRequest& request, const RetrievalIndex& index,
                                    const Lexicon& lexicon, const RetrievalOptions& options = {});

// Instruction prompt for a fine-tuned generation model.
std::string build_generation_prompt(const GenerationRequest& request);

nlohmann::ordered_json generation_audit(const GenerationRequest& request,
                                        const GenerationResult& result);

// Requests file: JSONL objects with study_id, indication (default "") and an
// optional "positives" array of condition names.
std::vector<GenerationRequest> read_generation_requests(const std::filesystem::path& path);
std::vector<GenerationRequest> read_generation_requests(std::istream& in,
                                                        const std::string& source = "<stream>");

// Replaces each request's positives with the 1.0 cells of a prediction CSV.
// Every request must have a row.
void apply_predictions(std::vector<GenerationRequest>& requests,
                       const std::vector<LabeledStudy>& predictions);

}  // namespace pragrad
