#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pragrad/condition.hpp"

namespace pragrad {

struct Report {
  std::string study_id;
  std::string indication;
  std::string impression;
  std::optional<std::string> findings;

  bool operator==(const Report&) const = default;
};

using Corpus = std::vector<Report>;

struct LabeledStudy {
  std::string study_id;
  LabelVector labels;

  bool operator==(const LabeledStudy&) const = default;
};

// report-jsonl: one object per line with study_id and impression required,
// indication defaulting to "" and findings optional. Blank lines are skipped.
// Duplicate study ids are rejected.
Corpus read_report_jsonl(std::istream& in, const std::string& source = "<stream>");
Corpus read_report_jsonl(const std::filesystem::path& path);
void write_report_jsonl(const Corpus& corpus, std::ostream& out);
std::string report_to_json_line(const Report& report);

// label-csv: header "study_id,<14 condition names>" in canonical order.
std::vector<LabeledStudy> read_label_csv(std::istream& in, const std::string& source = "<stream>");
std::vector<LabeledStudy> read_label_csv(const std::filesystem::path& path);
void write_label_csv(const std::vector<LabeledStudy>& rows, std::ostream& out);

std::map<std::string, LabelVector> index_by_study(const std::vector<LabeledStudy>& rows);

// Whole-file helpers over the two formats.
enum class CorpusFormat { kReportJsonl, kLabelCsv };
std::optional<CorpusFormat> corpus_format_from_name(std::string_view name);

}  // namespace pragrad
