#include "pragrad/corpus_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "pragrad/errors.hpp"

namespace pragrad {

namespace {

using nlohmann::json;

std::string where(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line);
}

std::string required_string(const json& obj, const char* field, const std::string& loc) {
  auto it = obj.find(field);
  if (it == obj.end()) throw InputError(loc + ": missing field '" + field + "'");
  if (!it->is_string()) throw InputError(loc + ": field '" + std::string(field) + "' must be a string");
  return it->get<std::string>();
}

std::vector<std::string> split_csv_line(const std::string& line, const std::string& loc) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else {
      cell += c;
    }
  }
  if (quoted) throw InputError(loc + ": unterminated quoted field");
  cells.push_back(std::move(cell));
  return cells;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path.string() + ": cannot open file");
  return in;
}

}  // namespace

Corpus read_report_jsonl(std::istream& in, const std::string& source) {
  Corpus corpus;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    auto loc = where(source, line_no);
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw InputError(loc + ": malformed JSON (" + e.what() + ")");
    }
    if (!obj.is_object()) throw InputError(loc + ": expected a JSON object");
    Report r;
    r.study_id = required_string(obj, "study_id", loc);
    r.impression = required_string(obj, "impression", loc);
    if (obj.contains("indication")) {
      if (!obj["indication"].is_string()) throw InputError(loc + ": field 'indication' must be a string");
      r.indication = obj["indication"].get<std::string>();
    }
    if (obj.contains("findings") && !obj["findings"].is_null()) {
      if (!obj["findings"].is_string()) throw InputError(loc + ": field 'findings' must be a string");
      r.findings = obj["findings"].get<std::string>();
    }
    if (!seen.insert(r.study_id).second) {
      throw InputError(loc + ": field 'study_id' duplicates '" + r.study_id + "'");
    }
    corpus.push_back(std::move(r));
  }
  return corpus;
}

Corpus read_report_jsonl(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_report_jsonl(in, path.string());
}

std::string report_to_json_line(const Report& report) {
  // ordered_json keeps the documented field order in the output.
  nlohmann::ordered_json obj;
  obj["study_id"] = report.study_id;
  obj["indication"] = report.indication;
  obj["impression"] = report.impression;
  if (report.findings) obj["findings"] = *report.findings;
  return obj.dump();
}

void write_report_jsonl(const Corpus& corpus, std::ostream& out) {
  for (const auto& r : corpus) out << report_to_json_line(r) << '\n';
}

std::vector<LabeledStudy> read_label_csv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw InputError(source + ": empty label file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = split_csv_line(line, where(source, 1));
  if (header.empty() || header[0] != "study_id") {
    throw InputError(where(source, 1) + ": first column must be 'study_id'");
  }
  std::vector<Condition> columns;
  for (std::size_t i = 1; i < header.size(); ++i) {
    auto c = condition_from_name(header[i]);
    if (!c) throw InputError(where(source, 1) + ": unknown condition column '" + header[i] + "'");
    columns.push_back(*c);
  }
  for (auto c : kAllConditions) {
    if (std::find(columns.begin(), columns.end(), c) == columns.end()) {
      throw InputError(where(source, 1) + ": missing condition column '" +
                       std::string(condition_name(c)) + "'");
    }
  }
  if (columns.size() != kNumConditions) {
    throw InputError(where(source, 1) + ": duplicate condition column");
  }

  std::vector<LabeledStudy> rows;
  std::set<std::string> seen;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto loc = where(source, line_no);
    auto cells = split_csv_line(line, loc);
    if (cells.size() != header.size()) {
      throw InputError(loc + ": expected " + std::to_string(header.size()) + " columns, got " +
                       std::to_string(cells.size()));
    }
    LabeledStudy row;
    row.study_id = cells[0];
    for (std::size_t i = 0; i < columns.size(); ++i) {
      auto v = label_from_csv_cell(cells[i + 1]);
      if (!v) {
        throw InputError(loc + ": field '" + std::string(condition_name(columns[i])) +
                         "' has invalid label '" + cells[i + 1] + "'");
      }
      try {
        row.labels.set(columns[i], *v);
      } catch (const std::invalid_argument& e) {
        throw InputError(loc + ": field 'No Finding': " + e.what());
      }
    }
    if (!seen.insert(row.study_id).second) {
      throw InputError(loc + ": field 'study_id' duplicates '" + row.study_id + "'");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<LabeledStudy> read_label_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_label_csv(in, path.string());
}

void write_label_csv(const std::vector<LabeledStudy>& rows, std::ostream& out) {
  out << "study_id";
  for (auto c : kAllConditions) out << ',' << condition_name(c);
  out << '\n';
  for (const auto& row : rows) {
    out << csv_escape(row.study_id);
    for (auto c : kAllConditions) out << ',' << to_csv_cell(row.labels[c]);
    out << '\n';
  }
}

std::map<std::string, LabelVector> index_by_study(const std::vector<LabeledStudy>& rows) {
  std::map<std::string, LabelVector> out;
  for (const auto& row : rows) out.emplace(row.study_id, row.labels);
  return out;
}

std::optional<CorpusFormat> corpus_format_from_name(std::string_view name) {
  if (name == "report-jsonl") return CorpusFormat::kReportJsonl;
  if (name == "label-csv") return CorpusFormat::kLabelCsv;
  return std::nullopt;
}

}  // namespace pragrad
