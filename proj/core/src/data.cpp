#include "cotlab/data.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include "cotlab/digest.hpp"
#include "cotlab/error.hpp"
#include "cotlab/rng.hpp"

namespace cotlab::data {

namespace {

std::string letter_str(char c) { return std::string(1, c); }

char parse_letter(const nlohmann::json& j, const std::string& where) {
  if (!j.is_string() || j.get<std::string>().size() != 1) {
    throw ConfigError(where + ": expected a single option letter");
  }
  const char c = j.get<std::string>()[0];
  if (c < 'A' || c > 'J') throw ConfigError(where + ": option letter must be in A..J");
  return c;
}

}  // namespace

std::vector<char> Example::letters() const {
  std::vector<char> out;
  out.reserve(options.size());
  for (const auto& [letter, _] : options) out.push_back(letter);
  return out;
}

const std::string* Example::option_text(char letter) const {
  for (const auto& [l, text] : options) {
    if (l == letter) return &text;
  }
  return nullptr;
}

Example example_from_json(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
  Example e;
  try {
    e.id = j.at("id").get<std::string>();
    e.dataset = j.value("dataset", std::string{});
    e.question = j.at("question").get<std::string>();
    const auto& opts = j.at("options");
    if (!opts.is_object() || opts.empty()) {
      throw ConfigError(where + ": options must be a non-empty object");
    }
    std::map<char, std::string> sorted;
    for (const auto& [key, value] : opts.items()) {
      if (key.size() != 1 || key[0] < 'A' || key[0] > 'J') {
        throw ConfigError(where + ": option key '" + key + "' outside A..J");
      }
      sorted[key[0]] = value.get<std::string>();
    }
    char expect = 'A';
    for (const auto& [letter, text] : sorted) {
      if (letter != expect) {
        throw ConfigError(where + ": option letters must be a contiguous prefix of A..J");
      }
      e.options.emplace_back(letter, text);
      ++expect;
    }
    e.answer_letter = parse_letter(j.at("answer_letter"), where);
    if (!e.option_text(e.answer_letter)) {
      throw ConfigError(where + ": answer_letter '" + letter_str(e.answer_letter) +
                        "' is not among the options");
    }
    if (j.contains("answer_value") && !j.at("answer_value").is_null()) {
      e.answer_value = j.at("answer_value").get<std::string>();
    }
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(where + ": " + ex.what());
  }
  return e;
}

ojson example_to_json(const Example& e) {
  ojson j;
  j["id"] = e.id;
  j["dataset"] = e.dataset;
  j["question"] = e.question;
  ojson opts = ojson::object();
  for (const auto& [letter, text] : e.options) opts[letter_str(letter)] = text;
  j["options"] = std::move(opts);
  j["answer_letter"] = letter_str(e.answer_letter);
  if (e.answer_value) j["answer_value"] = *e.answer_value;
  return j;
}

std::vector<Example> load_examples(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open examples file: " + path);
  std::vector<Example> out;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& ex) {
      throw ConfigError(where + ": invalid JSON: " + ex.what());
    }
    Example e = example_from_json(j, where);
    if (!seen.insert(e.id).second) {
      throw ConfigError(where + ": duplicate example id '" + e.id + "'");
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<Example> sample_without_replacement(std::vector<Example> pool, std::uint64_t seed,
                                                std::size_t k) {
  if (k > pool.size()) {
    throw ConfigError("sample size " + std::to_string(k) + " exceeds pool of " +
                      std::to_string(pool.size()));
  }
  std::sort(pool.begin(), pool.end(),
            [](const Example& a, const Example& b) { return a.id < b.id; });
  SplitMix64 rng(seed);
  fisher_yates(pool, rng);
  pool.resize(k);
  return pool;
}

ojson ConditionRecord::to_json() const {
  ojson j;
  j["example_id"] = example_id;
  j["dataset"] = dataset;
  j["condition"] = condition_label;
  j["family"] = condition_family;
  j["params"] = condition_params;
  j["seed"] = seed;
  j["injected_digest"] = injected_digest;
  j["predicted"] = predicted ? ojson(letter_str(*predicted)) : ojson(nullptr);
  j["correct"] = correct;
  j["abstain"] = abstain;
  j["error"] = error;
  if (!error_kind.empty()) j["error_kind"] = error_kind;
  ojson probs = ojson::object();
  for (const auto& [letter, p] : option_probabilities) probs[letter_str(letter)] = p;
  j["option_probabilities"] = std::move(probs);
  if (swapped_letter) j["swapped_letter"] = letter_str(*swapped_letter);
  if (top_logprob_count > 0) j["top_logprob_count"] = top_logprob_count;
  return j;
}

ConditionRecord ConditionRecord::from_json(const nlohmann::json& j, const std::string& where) {
  ConditionRecord r;
  try {
    r.example_id = j.at("example_id").get<std::string>();
    r.dataset = j.value("dataset", std::string{});
    r.condition_label = j.at("condition").get<std::string>();
    r.condition_family = j.value("family", std::string{});
    if (j.contains("params")) r.condition_params = j.at("params");
    r.seed = j.at("seed").get<std::uint64_t>();
    r.injected_digest = j.value("injected_digest", std::string{});
    if (j.contains("predicted") && !j.at("predicted").is_null()) {
      r.predicted = parse_letter(j.at("predicted"), where);
    }
    r.correct = j.value("correct", false);
    r.abstain = j.value("abstain", false);
    r.error = j.value("error", false);
    r.error_kind = j.value("error_kind", std::string{});
    if (j.contains("option_probabilities")) {
      for (const auto& [key, value] : j.at("option_probabilities").items()) {
        if (key.size() == 1) r.option_probabilities[key[0]] = value.get<double>();
      }
    }
    if (j.contains("swapped_letter") && !j.at("swapped_letter").is_null()) {
      r.swapped_letter = parse_letter(j.at("swapped_letter"), where);
    }
    r.top_logprob_count = j.value("top_logprob_count", 0);
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(where + ": " + ex.what());
  }
  return r;
}

namespace {

void write_lines(const std::vector<std::string>& lines, const std::string& path, bool append) {
  std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  for (const auto& line : lines) {
    out.write(line.data(), static_cast<std::streamsize>(line.size()));  // one line per write
  }
  out.flush();
  if (!out) throw ConfigError("write failed: " + path);
}

}  // namespace

void persist_records(const std::vector<ConditionRecord>& records, const std::string& path,
                     const ojson& header) {
  std::vector<std::string> lines;
  lines.reserve(records.size() + 1);
  if (!header.is_null()) {
    ojson h = header;
    h["kind"] = "header";
    lines.push_back(h.dump() + "\n");
  }
  for (const auto& r : records) lines.push_back(r.to_json().dump() + "\n");
  write_lines(lines, path, /*append=*/false);
}

void append_records(const std::vector<ConditionRecord>& records, const std::string& path) {
  std::vector<std::string> lines;
  lines.reserve(records.size());
  for (const auto& r : records) lines.push_back(r.to_json().dump() + "\n");
  write_lines(lines, path, /*append=*/true);
}

RecordFile load_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open records file: " + path);
  RecordFile out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    const bool terminated = !in.eof();  // eofbit here means no trailing newline
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      if (!terminated) {
        ++out.skipped_lines;  // torn trailing line from an interrupted append
        break;
      }
      throw ConfigError(where + ": invalid JSON record");
    }
    if (j.is_object() && j.value("kind", std::string{}) == "header") {
      out.header = j;
      continue;
    }
    out.records.push_back(ConditionRecord::from_json(j, where));
  }
  return out;
}

namespace {

probe::EndpointConfig endpoint_from_json(const nlohmann::json& j, const std::string& where,
                                         const probe::EndpointConfig& defaults) {
  probe::EndpointConfig cfg = defaults;
  if (j.is_null()) return cfg;
  try {
    cfg.base_url = j.value("base_url", cfg.base_url);
    cfg.model = j.value("model", cfg.model);
    cfg.api_key_env = j.value("api_key_env", cfg.api_key_env);
    cfg.temperature = j.value("temperature", cfg.temperature);
    if (cfg.temperature != 0.0) {
      // every run decodes greedily; this is pinned, not tunable
      throw ConfigError(where + ": endpoint temperature must be 0");
    }
    cfg.generation_max_tokens = j.value("generation_max_tokens", cfg.generation_max_tokens);
    cfg.probe_max_tokens = j.value("probe_max_tokens", cfg.probe_max_tokens);
    cfg.top_logprobs = j.value("top_logprobs", cfg.top_logprobs);
    cfg.timeout_ms = j.value("timeout_ms", cfg.timeout_ms);
    cfg.max_retries = j.value("max_retries", cfg.max_retries);
    cfg.retry_backoff_ms = j.value("retry_backoff_ms", cfg.retry_backoff_ms);
    cfg.max_in_flight = j.value("max_in_flight", cfg.max_in_flight);
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(where + ": " + ex.what());
  }
  return cfg;
}

}  // namespace

RunConfig run_config_from_json(const nlohmann::json& j, const std::string& where) {
  RunConfig cfg;
  try {
    cfg.config_id = j.at("config_id").get<std::string>();
    for (const auto& d : j.at("datasets")) {
      cfg.datasets.push_back({d.at("name").get<std::string>(), d.at("path").get<std::string>()});
    }
    if (cfg.datasets.empty()) throw ConfigError(where + ": datasets must be non-empty");
    cfg.generator = endpoint_from_json(j.value("generator", nlohmann::json(nullptr)), where, {});
    cfg.probe_endpoint = endpoint_from_json(j.value("probe", nlohmann::json(nullptr)), where, {});
    if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (cfg.seeds.empty()) throw ConfigError(where + ": seeds must be non-empty");
    {
      std::unordered_set<std::uint64_t> uniq(cfg.seeds.begin(), cfg.seeds.end());
      if (uniq.size() != cfg.seeds.size()) throw ConfigError(where + ": seeds must be distinct");
    }
    cfg.sample_per_seed = j.value("sample_per_seed", cfg.sample_per_seed);
    if (cfg.sample_per_seed == 0) throw ConfigError(where + ": sample_per_seed must be positive");
    if (j.contains("conditions")) {
      cfg.conditions = j.at("conditions").get<std::vector<std::string>>();
    }
    if (j.contains("ngram_grid")) {
      cfg.ngram_grid = j.at("ngram_grid").get<std::vector<std::size_t>>();
    }
    if (j.contains("tail_fractions")) {
      cfg.tail_fractions = j.at("tail_fractions").get<std::vector<double>>();
    }
    if (j.contains("mask_rates")) cfg.mask_rates = j.at("mask_rates").get<std::vector<double>>();
    if (j.contains("declaration_patterns_path")) {
      cfg.declaration_patterns_path = j.at("declaration_patterns_path").get<std::string>();
    }
    if (j.contains("wiki_corpus_path")) {
      cfg.wiki_corpus_path = j.at("wiki_corpus_path").get<std::string>();
    }
    if (j.contains("bm25")) {
      const auto& b = j.at("bm25");
      cfg.bm25.k1 = b.value("k1", cfg.bm25.k1);
      cfg.bm25.b = b.value("b", cfg.bm25.b);
      cfg.bm25.query_includes_options =
          b.value("query_includes_options", cfg.bm25.query_includes_options);
    }
    if (j.contains("mock")) {
      const auto& m = j.at("mock");
      cfg.mock.base_rate = m.value("base_rate", cfg.mock.base_rate);
      cfg.mock.gain = m.value("gain", cfg.mock.gain);
    }
    cfg.output_dir = j.at("output_dir").get<std::string>();
    cfg.cache_path = j.value("cache_path", cfg.output_dir + "/cache.jsonl");
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(where + ": " + ex.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open run config: " + path);
  std::string raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(path + ": invalid JSON: " + ex.what());
  }
  RunConfig cfg = run_config_from_json(j, path);
  cfg.config_digest = digest_hex(raw);
  return cfg;
}

}  // namespace cotlab::data
