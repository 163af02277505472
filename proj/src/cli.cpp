#include "pragrad/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "pragrad/atomic_file.hpp"
#include "pragrad/cleaning.hpp"
#include "pragrad/corpus_io.hpp"
#include "pragrad/corpus_stats.hpp"
#include "pragrad/errors.hpp"
#include "pragrad/generator.hpp"
#include "pragrad/labeler.hpp"
#include "pragrad/parallel.hpp"
#include "pragrad/text.hpp"

namespace pragrad {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

F1Averaging averaging_from_name(const std::string& name) {
  if (name == "macro") return F1Averaging::kMacro;
  if (name == "micro") return F1Averaging::kMicro;
  throw InputError("unknown F1 averaging '" + name + "' (expected macro or micro)");
}

std::string averaging_name(F1Averaging a) { return a == F1Averaging::kMacro ? "macro" : "micro"; }

template <typename T>
T typed(const json& j, const std::string& key, const std::string& source) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw InputError(source + ": config key '" + key + "' has the wrong type");
  }
}

void apply_endpoint_json(EndpointConfig& e, const json& j, const std::string& source,
                         const std::string& prefix) {
  if (!j.is_object()) throw InputError(source + ": '" + prefix + "' must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& key = it.key();
    if (key == "url") e.url = typed<std::string>(j, key, source);
    else if (key == "token") e.token = typed<std::string>(j, key, source);
    else if (key == "timeout_seconds") e.timeout_seconds = typed<double>(j, key, source);
    else if (key == "retries") e.retries = typed<int>(j, key, source);
    else if (key == "max_in_flight") e.max_in_flight = typed<int>(j, key, source);
    else throw InputError(source + ": unknown config key '" + prefix + "." + key + "'");
  }
}

ordered_json endpoint_json(const EndpointConfig& e) {
  return {{"url", e.url},
          {"token", e.token.empty() ? "" : "<redacted>"},
          {"timeout_seconds", e.timeout_seconds},
          {"retries", e.retries},
          {"max_in_flight", e.max_in_flight}};
}

std::size_t parse_jobs(const std::string& value, const std::string& source) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(value, &pos);
    if (pos == value.size() && v >= 1) return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
  }
  throw InputError(source + ": jobs must be a positive integer, got '" + value + "'");
}

// Flags shared by every subcommand.
struct CommonFlags {
  std::optional<std::string> config;
  std::optional<std::string> lexicon;
  std::optional<std::string> keywords;
  std::optional<std::size_t> jobs;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
};

void add_common(CLI::App& app, CommonFlags& f) {
  app.add_option("--config", f.config, "JSON config file");
  app.add_option("--lexicon", f.lexicon, "Labeler lexicon file (default: built-in)");
  app.add_option("--keywords", f.keywords, "Keyword catalog file (default: built-in)");
  app.add_option("--jobs", f.jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed", f.seed, "Recorded in the resolved config; results do not depend on it");
  app.add_option("--output-dir", f.output_dir, "Directory for relative output paths");
}

struct EndpointFlags {
  std::optional<std::string> url;
  std::optional<std::string> token;
  std::optional<double> timeout;
  std::optional<int> retries;
  std::optional<int> max_in_flight;
};

void add_endpoint_flags(CLI::App& app, EndpointFlags& f) {
  app.add_option("--endpoint", f.url, "Remote endpoint URL (http://host:port/path)");
  app.add_option("--token", f.token, "Bearer token for the remote endpoint");
  app.add_option("--timeout", f.timeout, "Request timeout in seconds");
  app.add_option("--retries", f.retries, "Retries after a failed request");
  app.add_option("--max-in-flight", f.max_in_flight, "Concurrent remote requests");
}

void apply_endpoint_flags(EndpointConfig& e, const EndpointFlags& f) {
  if (f.url) e.url = *f.url;
  if (f.token) e.token = *f.token;
  if (f.timeout) e.timeout_seconds = *f.timeout;
  if (f.retries) e.retries = *f.retries;
  if (f.max_in_flight) e.max_in_flight = *f.max_in_flight;
}

class Session {
 public:
  Session(std::string command, const RunContext& ctx) : command_(std::move(command)), ctx_(ctx) {}

  void resolve(const CommonFlags& flags) {
    std::optional<std::string> config_path = flags.config;
    if (!config_path && ctx_.env) config_path = ctx_.env("PRAGRAD_CONFIG");
    if (config_path) {
      std::ifstream in(*config_path);
      if (!in) throw InputError(*config_path + ": cannot open file");
      json j;
      try {
        j = json::parse(in);
      } catch (const json::parse_error& e) {
        throw InputError(*config_path + ": malformed JSON: " + e.what());
      }
      apply_config_json(config_, j, *config_path);
    }
    if (ctx_.env) apply_environment(config_, ctx_.env);
    if (flags.lexicon) config_.lexicon_path = *flags.lexicon;
    if (flags.keywords) config_.keywords_path = *flags.keywords;
    if (flags.jobs) config_.jobs = *flags.jobs;
    if (flags.seed) config_.seed = *flags.seed;
    if (flags.output_dir) config_.output_dir = *flags.output_dir;
  }

  Config& config() { return config_; }

  const Lexicon& lexicon() {
    if (!config_.lexicon_path) return Lexicon::builtin();
    if (!lexicon_) lexicon_ = Lexicon::load(*config_.lexicon_path);
    return *lexicon_;
  }

  const KeywordCatalog& catalog() {
    if (!config_.keywords_path) return KeywordCatalog::builtin();
    if (!catalog_) catalog_ = KeywordCatalog::load(*config_.keywords_path);
    return *catalog_;
  }

  fs::path output_path(const std::string& path) const {
    fs::path p(path);
    if (config_.output_dir && p.is_relative()) return *config_.output_dir / p;
    return p;
  }

  void write(const std::string& path, const std::function<void(std::ostream&)>& fill) {
    const auto p = output_path(path);
    write_file_atomically(p, fill);
    if (!config_written_) {
      config_written_ = true;
      ordered_json j;
      j["command"] = command_;
      j["config"] = config_to_json(config_);
      j["lexicon_version"] = lexicon().version();
      j["keywords_version"] = catalog().version();
      write_file_atomically(p.string() + ".config.json", j.dump(2) + "\n");
    }
  }

  std::ostream& out() { return ctx_.out; }
  std::ostream& err() { return ctx_.err; }

 private:
  std::string command_;
  const RunContext& ctx_;
  Config config_;
  std::optional<Lexicon> lexicon_;
  std::optional<KeywordCatalog> catalog_;
  bool config_written_ = false;
};

Corpus read_corpus(const std::string& path) { return read_report_jsonl(fs::path(path)); }

LabelsByStudy labels_for(const Corpus& corpus, const std::optional<std::string>& labels_path,
                         Session& s) {
  if (labels_path) return index_by_study(read_label_csv(fs::path(*labels_path)));
  return index_by_study(label_corpus(corpus, s.lexicon(), s.config().jobs));
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path + ": cannot open file");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

// ---------------------------------------------------------------------------
// Subcommands. Each builds its parser, parses `args` and runs.

int cmd_label(CLI::App& app, std::vector<std::string>& args, Session& s, CommonFlags& common) {
  std::string in, out, field = "impression";
  app.add_option("--in", in, "Report JSONL")->required();
  app.add_option("--out", out, "Label CSV")->required();
  app.add_option("--field", field, "Text to label")->check(CLI::IsMember({"impression", "indication"}));
  app.parse(args);
  s.resolve(common);

  const auto corpus = read_corpus(in);
  std::vector<LabeledStudy> rows;
  if (field == "impression") {
    rows = label_corpus(corpus, s.lexicon(), s.config().jobs);
  } else {
    rows.resize(corpus.size());
    parallel_for(corpus.size(), s.config().jobs, [&](std::size_t i) {
      rows[i] = LabeledStudy{corpus[i].study_id, label_report(corpus[i].indication, s.lexicon())};
    });
  }
  s.write(out, [&](std::ostream& os) { write_label_csv(rows, os); });
  s.out() << "labeled " << rows.size() << " reports\n";
  return 0;
}

int cmd_stats(CLI::App& app, std::vector<std::string>& args, Session& s, CommonFlags& common) {
  std::string in;
  std::optional<std::string> labels, out;
  app.add_option("--in", in, "Report JSONL")->required();
  app.add_option("--labels", labels, "Precomputed impression labels (label CSV)");
  app.add_option("--out", out, "Summary CSV");
  app.parse(args);
  s.resolve(common);

  const auto corpus = read_corpus(in);
  const auto summary = summarize(corpus, labels_for(corpus, labels, s),
                                 indication_mentions_by_study(corpus, s.lexicon(), s.config().jobs));
  write_summary_table(summary, s.out());
  if (out) s.write(*out, [&](std::ostream& os) { write_summary_csv(summary, os); });
  return 0;
}

ContingencyTable2x2 parse_table(const std::string& text) {
  ContingencyTable2x2 t;
  std::uint64_t* cells[] = {&t.a, &t.b, &t.c, &t.d};
  std::stringstream ss(text);
  std::string item;
  std::size_t i = 0;
  while (std::getline(ss, item, ',')) {
    if (i >= 4) break;
    try {
      std::size_t pos = 0;
      const long long v = std::stoll(item, &pos);
      if (pos != item.size() || v < 0) throw std::invalid_argument("cell");
      *cells[i++] = static_cast<std::uint64_t>(v);
    } catch (const std::exception&) {
      throw InputError("--table: invalid cell '" + item + "'");
    }
  }
  if (i != 4 || std::getline(ss, item, ',')) throw InputError("--table expects four counts a,b,c,d");
  return t;
}

int cmd_chi2(CLI::App& app, std::vector<std::string>& args, Session& s, CommonFlags& common) {
  std::optional<std::string> in, labels, condition, table, out;
  bool all = false;
  app.add_option("--in", in, "Report JSONL");
  app.add_option("--labels", labels, "Precomputed impression labels (label CSV)");
  auto* cond_opt = app.add_option("--condition", condition, "Condition name");
  auto* all_opt = app.add_flag("--all", all, "Every condition except No Finding");
  auto* table_opt = app.add_option("--table", table, "Test a literal table a,b,c,d");
  cond_opt->excludes(all_opt);
  table_opt->excludes(cond_opt)->excludes(all_opt);
  app.add_option("--out", out, "CSV output (default: stdout)");
  app.parse(args);
  s.resolve(common);

  std::function<void(std::ostream&)> emit;
  if (table) {
    const auto t = parse_table(*table);
    const auto result = chi_square_test(t);
    emit = [t, result](std::ostream& os) {
      ChiSquareRow row{Condition::kAtelectasis, rates_from_table(t), result};
      std::ostringstream tmp;
      write_chi_square_csv({row}, tmp);
      // Same columns as the per-condition output, with the condition cell blank.
      std::string csv = tmp.str();
      const auto line2 = csv.find('\n') + 1;
      os << csv.substr(0, line2) << csv.substr(csv.find(',', line2));
    };
  } else {
    if (!in) throw InputError("chi2 needs --in (or --table)");
    if (!condition && !all) throw InputError("chi2 needs --condition or --all");
    std::vector<Condition> conditions;
    if (all) {
      conditions = finding_conditions();
    } else {
      auto c = condition_from_name(*condition);
      if (!c) throw InputError("unknown condition '" + *condition + "'");
      if (*c == Condition::kNoFinding) throw InputError("chi2 is undefined for No Finding");
      conditions.push_back(*c);
    }
    const auto corpus = read_corpus(*in);
    const auto label_map = labels_for(corpus, labels, s);
    const auto mentions = indication_mentions_by_study(corpus, s.lexicon(), s.config().jobs);
    std::vector<ChiSquareRow> rows;
    for (auto c : conditions) {
      ChiSquareRow row{c, conditional_negative_rates(corpus, label_map, mentions, c), std::nullopt};
      try {
        row.test = chi_square_test(row.rates.table);
      } catch (const InputError&) {
      }
      rows.push_back(row);
    }
    emit = [rows](std::ostream& os) { write_chi_square_csv(rows, os); };
  }
  if (out) {
    s.write(*out, emit);
  } else {
    emit(s.out());
  }
  return 0;
}

int cmd_shift(CLI::App& app, std::vector<std::string>& args, Session& s, CommonFlags& common) {
  std::string a, b;
  std::optional<std::string> labels_a, labels_b, out;
  std::optional<double> threshold;
  app.add_option("--a", a, "First corpus (report JSONL)")->required();
  app.add_option("--b", b, "Second corpus (report JSONL)")->required();
  app.add_option("--labels-a", labels_a, "Precomputed labels for --a");
  app.add_option("--labels-b", labels_b, "Precomputed labels for --b");
  app.add_option("--threshold", threshold, "Relative delta that flags a field (fraction)");
  app.add_option("--out", out, "CSV output (default: stdout)");
  app.parse(args);
  s.resolve(common);
  if (threshold) s.config().shift_threshold = *threshold;

  auto summary_of = [&](const std::string& path, const std::optional<std::string>& labels) {
    const auto corpus = read_corpus(path);
    return summarize(corpus, labels_for(corpus, labels, s),
                     indication_mentions_by_study(corpus, s.lexicon(), s.config().jobs));
  };
  const auto deltas = shift_report(summary_of(a, labels_a), summary_of(b, labels_b),
                                   s.config().shift_threshold);
  auto emit = [&](std::ostream& os) { write_shift_csv(deltas, os); };
  if (out) {
    s.write(*out, emit);
    std::size_t flagged = 0;
    for (const auto& d : deltas) flagged += d.flagged;
    s.out() << flagged << " fields flagged\n";
  } else {
    emit(s.out());
  }
  return 0;
}

std::vector<CleaningRule> select_rules(const std::vector<int>& ids) {
  if (ids.empty()) return cleaning_rules();
  std::vector<int> sorted = ids;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<CleaningRule> rules;
  for (int id : sorted) {
    if (id < 1 || id > 7) throw InputError("unknown cleaning rule " + std::to_string(id));
    rules.push_back(cleaning_rule(id));
  }
  return rules;
}

int cmd_clean(CLI::App& app, std::vector<std::string>& args, Session& s, CommonFlags& common) {
  std::string in, out, backend_name = "pattern";
  std::optional<std::string> audit;
  std::vector<int> rule_ids;
  EndpointFlags ep;
  app.add_option("--in", in, "Report JSONL")->required();
  app.add_option("--out", out, "Cleaned report JSONL")->required();
  app.add_option("--backend", backend_name, "Rewrite backend")
      ->check(CLI::IsMember({"pattern", "remote"}));
  app.add_option("--audit", audit, "Per-sentence audit log (JSONL)");
  app.add_option("--rules", rule_ids, "Subset of rule ids to apply (default: all)")->delimiter(',');
  add_endpoint_flags(app, ep);
  app.parse(args);
  s.resolve(common);
  apply_endpoint_flags(s.config().clean_endpoint, ep);

  const auto corpus = read_corpus(in);
  const auto rules = select_rules(rule_ids);
  std::unique_ptr<RewriteBackend> backend;
  if (backend_name == "pattern") {
    backend = std::make_unique<PatternBackend>();
  } else {
    if (s.config().clean_endpoint.url.empty()) {
      throw InputError("remote backend needs --endpoint or PRAGRAD_CLEAN_ENDPOINT");
    }
    backend = std::make_unique<RemoteRewriteBackend>(s.config().clean_endpoint);
  }
  const auto results = clean_corpus(corpus, rules, *backend, s.lexicon(), s.config().jobs);

  Corpus cleaned;
  cleaned.reserve(results.size());
  for (const auto& r : results) cleaned.push_back(r.cleaned);
  s.write(out, [&](std::ostream& os) { write_report_jsonl(cleaned, os); });
  if (audit) {
    s.write(*audit, [&](std::ostream& os) {
      for (std::size_t i = 0; i < results.size(); ++i) {
        for (std::size_t k = 0; k < results[i].sentences.size(); ++k) {
          os << audit_record(corpus[i].study_id, k, results[i].sentences[k]).dump() << '\n';
        }
      }
    });
  }
  s.out() << "cleaned " << cleaned.size() << " reports with the " << backend->name()
          << " backend\n";
  return 0;
}

int cmd_clean_eval(CLI::App& app, std::vector<std::string>& args, Session& s, CommonFlags& common) {
  std::string machine, manual, original;
  std::optional<std::string> out;
  app.add_option("--machine", machine, "Machine-cleaned sentences, one per line")->required();
  app.add_option("--manual", manual, "Manually cleaned sentences, one per line")->required();
  app.add_option("--original", original, "Original sentences, one per line")->required();
  app.add_option("--out", out, "JSON output (default: stdout)");
  app.parse(args);
  s.resolve(common);

  const auto eval =
      evaluate_cleaning(read_lines(machine), read_lines(manual), read_lines(original), s.lexicon());
  ordered_json j;
  j["pos_f1"] = eval.pos_f1;
  j["neg_f1"] = eval.neg_f1;
  j["em_accuracy"] = eval.em_accuracy;
  j["bleu2"] = eval.bleu2;
  const std::string text = j.dump(2) + "\n";
  if (out) {
    s.write(*out, [&](std::ostream& os) { os << text; });
  } else {
    s.out() << text;
  }
  return 0;
}

int cmd_index(CLI::App& app, std::vector<std::string>& args, Session& s, CommonFlags& common) {
  std::string in, out;
  app.add_option("--in", in, "Cleaned report JSONL")->required();
  app.add_option("--out", out, "Index file (JSON)")->required();
  app.parse(args);
  s.resolve(common);

  const auto index = RetrievalIndex::build(read_corpus(in), s.lexicon());
  s.write(out, [&](std::ostream& os) { os << index.to_json().dump(1) << '\n'; });
  for (const auto& w : index.warnings()) s.err() << "warning: " << w << '\n';
  s.out() << "indexed " << index.corpus_size() << " reports under " << index.by_key().size()
          << " label sets\n";
  return 0;
}

int cmd_generate(CLI::App& app, std::vector<std::string>& args, Session& s, CommonFlags& common) {
  std::string requests_path, out, mode = "retrieval";
  std::optional<std::string> predictions, index_path, audit;
  bool no_indication = false;
  EndpointFlags ep;
  app.add_option("--requests", requests_path, "Requests JSONL (study_id, indication, positives)")
      ->required();
  app.add_option("--predictions", predictions, "Predicted labels (label CSV, 1.0 = positive)");
  app.add_option("--index", index_path, "Retrieval index");
  app.add_option("--mode", mode, "Generation mode")->check(CLI::IsMember({"retrieval", "remote"}));
  app.add_option("--out", out, "Generated report JSONL")->required();
  app.add_option("--audit", audit, "Per-request audit log (JSONL)");
  app.add_flag("--no-indication", no_indication, "Retrieval without indication negatives");
  add_endpoint_flags(app, ep);
  app.parse(args);
  s.resolve(common);
  apply_endpoint_flags(s.config().generate_endpoint, ep);

  auto requests = read_generation_requests(fs::path(requests_path));
  if (predictions) apply_predictions(requests, read_label_csv(fs::path(*predictions)));

  Corpus generated(requests.size());
  std::vector<ordered_json> audits(requests.size());
  if (mode == "retrieval") {
    if (!index_path) throw InputError("retrieval mode needs --index");
    const auto index = RetrievalIndex::load(*index_path, s.lexicon());
    RetrievalOptions options;
    options.use_indication = !no_indication;
    parallel_for(requests.size(), s.config().jobs, [&](std::size_t i) {
      const auto result = generate_retrieval(requests[i], index, s.lexicon(), options);
      generated[i] = Report{requests[i].study_id, requests[i].indication, result.text, std::nullopt};
      audits[i] = generation_audit(requests[i], result);
    });
  } else {
    const auto& endpoint = s.config().generate_endpoint;
    if (endpoint.url.empty()) {
      throw InputError("remote mode needs --endpoint or PRAGRAD_GENERATE_ENDPOINT");
    }
    const auto workers = std::min<std::size_t>(s.config().jobs,
                                               static_cast<std::size_t>(std::max(1, endpoint.max_in_flight)));
    parallel_for(requests.size(), workers, [&](std::size_t i) {
      const auto result = generate_remote(requests[i], endpoint);
      generated[i] = Report{requests[i].study_id, requests[i].indication, result.text, std::nullopt};
      ordered_json a;
      a["study_id"] = requests[i].study_id;
      a["prompt"] = result.prompt;
      a["latency_ms"] = result.latency_ms;
      audits[i] = std::move(a);
    });
  }
  s.write(out, [&](std::ostream& os) { write_report_jsonl(generated, os); });
  if (audit) {
    s.write(*audit, [&](std::ostream& os) {
      for (const auto& a : audits) os << a.dump() << '\n';
    });
  }
  s.out() << "generated " << generated.size() << " reports (" << mode << ")\n";
  return 0;
}

int cmd_evaluate(CLI::App& app, std::vector<std::string>& args, Session& s, CommonFlags& common) {
  std::string generated, ref_original, ref_clean, positive_five = "fixed", model = "model";
  std::optional<std::string> ref_labels, averaging, out, csv;
  app.add_option("--generated", generated, "Generated report JSONL")->required();
  app.add_option("--ref-original", ref_original, "Original reference JSONL")->required();
  app.add_option("--ref-clean", ref_clean, "Cleaned reference JSONL")->required();
  app.add_option("--ref-labels", ref_labels, "Precomputed labels of the original references");
  app.add_option("--averaging", averaging, "F1 averaging: macro or micro");
  app.add_option("--positive-five", positive_five, "Positive F1-5 set: fixed or reference")
      ->check(CLI::IsMember({"fixed", "reference"}));
  app.add_option("--model", model, "Model name for the CSV row");
  app.add_option("--out", out, "MetricsReport JSON (default: stdout)");
  app.add_option("--csv", csv, "One-row CSV summary");
  app.parse(args);
  s.resolve(common);
  if (averaging) s.config().averaging = averaging_from_name(*averaging);

  MetricsOptions options;
  options.averaging = s.config().averaging;
  options.positive_five_from_reference = positive_five == "reference";
  if (ref_labels) options.reference_labels = read_label_csv(fs::path(*ref_labels));
  const auto report = evaluate_generation(read_corpus(generated), read_corpus(ref_original),
                                          read_corpus(ref_clean), s.lexicon(), s.catalog(), options);
  const std::string text = metrics_to_json(report).dump(2) + "\n";
  if (out) {
    s.write(*out, [&](std::ostream& os) { os << text; });
  } else {
    s.out() << text;
  }
  if (csv) s.write(*csv, [&](std::ostream& os) { write_metrics_csv_row(report, model, os); });
  std::string five;
  for (auto c : report.positive_five) five += (five.empty() ? "" : ", ") + std::string(condition_name(c));
  s.err() << "positive F1-5 conditions: " << five << '\n';
  return 0;
}

using Handler = int (*)(CLI::App&, std::vector<std::string>&, Session&, CommonFlags&);

Handler handler_for(const std::string& command) {
  if (command == "label") return cmd_label;
  if (command == "stats") return cmd_stats;
  if (command == "chi2") return cmd_chi2;
  if (command == "shift") return cmd_shift;
  if (command == "clean") return cmd_clean;
  if (command == "clean-eval") return cmd_clean_eval;
  if (command == "index") return cmd_index;
  if (command == "generate") return cmd_generate;
  if (command == "evaluate") return cmd_evaluate;
  return nullptr;
}

const char* kPrecedence =
    "Configuration precedence (highest first): command-line flags, environment variables\n"
    "(PRAGRAD_CONFIG, PRAGRAD_LEXICON, PRAGRAD_KEYWORDS, PRAGRAD_JOBS, PRAGRAD_CLEAN_ENDPOINT,\n"
    "PRAGRAD_CLEAN_TOKEN, PRAGRAD_GENERATE_ENDPOINT, PRAGRAD_GENERATE_TOKEN), the --config JSON\n"
    "file, built-in defaults.\n";

}  // namespace

EnvLookup process_environment() {
  return [](const std::string& name) -> std::optional<std::string> {
    if (const char* v = std::getenv(name.c_str()); v && *v) return std::string(v);
    return std::nullopt;
  };
}

void apply_config_json(Config& config, const json& j, const std::string& source) {
  if (!j.is_object()) throw InputError(source + ": config must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& key = it.key();
    if (key == "lexicon") config.lexicon_path = typed<std::string>(j, key, source);
    else if (key == "keywords") config.keywords_path = typed<std::string>(j, key, source);
    else if (key == "clean_endpoint") apply_endpoint_json(config.clean_endpoint, it.value(), source, key);
    else if (key == "generate_endpoint") apply_endpoint_json(config.generate_endpoint, it.value(), source, key);
    else if (key == "shift_threshold") config.shift_threshold = typed<double>(j, key, source);
    else if (key == "averaging") config.averaging = averaging_from_name(typed<std::string>(j, key, source));
    else if (key == "output_dir") config.output_dir = typed<std::string>(j, key, source);
    else if (key == "jobs") config.jobs = parse_jobs(std::to_string(typed<long>(j, key, source)), source);
    else if (key == "seed") config.seed = typed<std::uint64_t>(j, key, source);
    else throw InputError(source + ": unknown config key '" + key + "'");
  }
}

void apply_environment(Config& config, const EnvLookup& env) {
  if (auto v = env("PRAGRAD_LEXICON")) config.lexicon_path = *v;
  if (auto v = env("PRAGRAD_KEYWORDS")) config.keywords_path = *v;
  if (auto v = env("PRAGRAD_JOBS")) config.jobs = parse_jobs(*v, "PRAGRAD_JOBS");
  if (auto v = env("PRAGRAD_CLEAN_ENDPOINT")) config.clean_endpoint.url = *v;
  if (auto v = env("PRAGRAD_CLEAN_TOKEN")) config.clean_endpoint.token = *v;
  if (auto v = env("PRAGRAD_GENERATE_ENDPOINT")) config.generate_endpoint.url = *v;
  if (auto v = env("PRAGRAD_GENERATE_TOKEN")) config.generate_endpoint.token = *v;
}

ordered_json config_to_json(const Config& c) {
  ordered_json j;
  j["lexicon"] = c.lexicon_path ? c.lexicon_path->string() : "<builtin>";
  j["keywords"] = c.keywords_path ? c.keywords_path->string() : "<builtin>";
  j["clean_endpoint"] = endpoint_json(c.clean_endpoint);
  j["generate_endpoint"] = endpoint_json(c.generate_endpoint);
  j["shift_threshold"] = c.shift_threshold;
  j["averaging"] = averaging_name(c.averaging);
  j["output_dir"] = c.output_dir ? c.output_dir->string() : "";
  j["jobs"] = c.jobs;
  j["seed"] = c.seed;
  return j;
}

std::string usage() {
  std::string u =
      "usage: pragrad <command> [options]\n\n"
      "commands:\n"
      "  label       label report impressions (or indications) into a label CSV\n"
      "  stats       corpus summary: mention averages and negatives given indication\n"
      "  chi2        negative-mention rates and chi-square test per condition\n"
      "  shift       compare the summaries of two corpora\n"
      "  clean       apply the seven cleaning rules with the label guard\n"
      "  clean-eval  score machine cleaning against manual cleaning\n"
      "  index       build a retrieval index from a cleaned corpus\n"
      "  generate    generate reports by retrieval or through a remote model\n"
      "  evaluate    score generated reports against references\n\n"
      "Run 'pragrad <command> --help' for the options of a command.\n\n";
  return u + kPrecedence;
}

int run(const std::string& command, const std::vector<std::string>& args, const RunContext& ctx) {
  if (command == "--help" || command == "-h" || command == "help") {
    ctx.out << usage();
    return 0;
  }
  const Handler handler = handler_for(command);
  if (!handler) {
    ctx.err << "unknown command '" << command << "'\n\n" << usage();
    return 1;
  }
  CLI::App app("pragrad " + command, "pragrad " + command);
  app.footer(kPrecedence);
  CommonFlags common;
  add_common(app, common);
  Session session(command, ctx);
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    return handler(app, reversed, session, common);
  } catch (const CLI::CallForHelp&) {
    ctx.out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    ctx.err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  } catch (const RemoteError& e) {
    ctx.err << "remote error: " << e.what() << '\n';
    return 2;
  } catch (const InputError& e) {
    ctx.err << "input error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    ctx.err << "error: " << e.what() << '\n';
    return 1;
  }
}

int run_main(int argc, const char* const* argv) {
  if (argc < 2) {
    std::cerr << usage();
    return 1;
  }
  std::vector<std::string> args(argv + 2, argv + argc);
  return run(argv[1], args, RunContext{std::cout, std::cerr, process_environment()});
}

}  // namespace pragrad
