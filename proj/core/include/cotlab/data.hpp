#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cotlab/endpoint.hpp"
#include "json.hpp"

namespace cotlab::data {

using ojson = nlohmann::ordered_json;

// One benchmark item. Options are a contiguous prefix of A..J.
struct Example {
  std::string id;
  std::string dataset;
  std::string question;
  std::vector<std::pair<char, std::string>> options;
  char answer_letter = 'A';
  std::optional<std::string> answer_value;

  std::vector<char> letters() const;
  const std::string* option_text(char letter) const;
};

// Validates a single example object; `where` prefixes error messages.
Example example_from_json(const nlohmann::json& j, const std::string& where);
ojson example_to_json(const Example& e);

// JSONL, one example per line. Throws ConfigError naming the offending line.
std::vector<Example> load_examples(const std::string& path);

// Sorts the pool by id, applies a seeded Fisher-Yates permutation and keeps
// the first k, in permuted order. Throws ConfigError when k exceeds the pool.
std::vector<Example> sample_without_replacement(std::vector<Example> pool, std::uint64_t seed,
                                                std::size_t k);

// One (example, condition, seed) probe outcome.
struct ConditionRecord {
  std::string example_id;
  std::string dataset;
  std::string condition_label;
  std::string condition_family;
  ojson condition_params = ojson::object();
  std::uint64_t seed = 0;
  std::string injected_digest;  // empty when nothing was injected
  std::optional<char> predicted;
  bool correct = false;
  bool abstain = false;
  bool error = false;
  std::string error_kind;
  std::map<char, double> option_probabilities;
  std::optional<char> swapped_letter;  // set by the answer-swap condition
  int top_logprob_count = 0;

  ojson to_json() const;
  static ConditionRecord from_json(const nlohmann::json& j, const std::string& where);
};

struct RecordFile {
  std::vector<ConditionRecord> records;
  ojson header;                   // first header line, if any
  std::size_t skipped_lines = 0;  // partial/unfinished trailing lines
};

// JSONL with an optional leading header object ({"kind":"header",...}).
// Every line is assembled in memory and written with a single call, so
// concurrent appenders interleave whole lines.
void persist_records(const std::vector<ConditionRecord>& records, const std::string& path,
                     const ojson& header);
void append_records(const std::vector<ConditionRecord>& records, const std::string& path);
RecordFile load_records(const std::string& path);

struct DatasetSpec {
  std::string name;
  std::string path;
};

struct MockParams {
  double base_rate = 0.05;
  double gain = 0.25;
};

struct Bm25Settings {
  double k1 = 1.2;
  double b = 0.75;
  bool query_includes_options = true;
};

// The reproducibility root: everything a run needs, hashed into config_digest.
struct RunConfig {
  std::string config_id;
  std::vector<DatasetSpec> datasets;
  probe::EndpointConfig generator;
  probe::EndpointConfig probe_endpoint;
  std::vector<std::uint64_t> seeds{300, 500, 700};
  std::size_t sample_per_seed = 500;
  std::vector<std::string> conditions;  // labels; empty selects the default grid
  std::vector<std::size_t> ngram_grid{1, 2, 3, 5, 8, 12, 20};
  std::vector<double> tail_fractions{1.0, 0.8, 0.6, 0.4, 0.2, 0.0};
  std::vector<double> mask_rates{0.3, 0.5};
  std::optional<std::string> declaration_patterns_path;
  std::optional<std::string> wiki_corpus_path;
  Bm25Settings bm25;
  MockParams mock;
  std::string output_dir;
  std::string cache_path;  // defaults to <output_dir>/cache.jsonl

  std::string config_digest;  // digest of the raw config bytes
};

RunConfig run_config_from_json(const nlohmann::json& j, const std::string& where);
RunConfig load_run_config(const std::string& path);

}  // namespace cotlab::data
