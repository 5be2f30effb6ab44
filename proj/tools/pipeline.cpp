#include "pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <set>
#include <thread>

#include "cotlab/client.hpp"
#include "cotlab/interventions.hpp"
#include "cotlab/probe.hpp"
#include "cotlab/retrieval.hpp"
#include "cotlab/rng.hpp"
#include "cotlab/textops.hpp"
#include "mockgen.hpp"
#include "pipeline_common.hpp"

namespace cotlab::pipeline {

using namespace detail;
namespace iv = cotlab::interventions;
namespace pb = cotlab::probe;

std::string ConditionSpec::seed_key() const {
  if (family == "ws") return "ngram:1";
  if (family == "ngram") return "ngram:" + std::to_string(params.value("n", 1));
  if (family == "ss" || family == "stripped_ss" || family == "raw_ss") return "ss";
  if (family == "mask") return "mask:" + percent_label(params.value("rate", 0.0));
  if (family == "tail") {
    return "tail:" + params.value("direction", std::string{}) + ":" +
           percent_label(params.value("keep", 0.0));
  }
  if (family == "qstem") return "qstem:" + std::to_string(params.value("n", 1));
  return family;
}

std::vector<ConditionSpec> default_condition_grid(const data::RunConfig& cfg) {
  std::vector<ConditionSpec> grid;
  const auto add = [&grid](std::string label, std::string family, ojson params) {
    grid.push_back({std::move(label), std::move(family), std::move(params)});
  };
  add("io", "io", ojson::object());
  add("cot", "cot", ojson::object());
  add("ss", "ss", ojson::object());
  add("ws", "ws", ojson::object());
  for (const std::size_t n : cfg.ngram_grid) {
    add("ngram_" + std::to_string(n), "ngram", ojson{{"n", n}});
  }
  add("stripped", "stripped", ojson::object());
  add("stripped_ss", "stripped_ss", ojson::object());
  add("value_removed", "value_removed", ojson::object());
  add("value_swapped", "value_swapped", ojson::object());
  add("option_letters", "option_letters", ojson::object());
  for (const double rate : cfg.mask_rates) {
    add("mask_" + percent_label(rate), "mask", ojson{{"rate", rate}});
  }
  for (const char* direction : {"from_start", "from_end"}) {
    for (const double keep : cfg.tail_fractions) {
      const std::string dir_label = std::string(direction) == "from_start" ? "start" : "end";
      add("tail_" + dir_label + "_" + percent_label(keep), "tail",
          ojson{{"direction", direction}, {"keep", keep}});
    }
  }
  add("concept", "concept", ojson::object());
  add("concept_ss", "concept_ss", ojson::object());
  add("concept_intra", "concept_intra", ojson::object());
  add("concept_ws", "concept_ws", ojson::object());
  add("wiki", "wiki", ojson::object());
  for (const std::size_t n : cfg.ngram_grid) {
    add("qstem_" + std::to_string(n), "qstem", ojson{{"n", n}});
  }
  return grid;
}

namespace {

// optional extras selectable by name in the config's condition list
std::vector<ConditionSpec> extra_conditions() {
  return {
      {"raw_cot", "raw_cot", ojson::object()},
      {"raw_ss", "raw_ss", ojson::object()},
  };
}

std::vector<std::uint64_t> selected_seeds(const data::RunConfig& cfg, const Filters& filters) {
  if (!filters.seeds) return cfg.seeds;
  std::vector<std::uint64_t> out;
  for (const auto seed : cfg.seeds) {
    if (std::find(filters.seeds->begin(), filters.seeds->end(), seed) != filters.seeds->end()) {
      out.push_back(seed);
    }
  }
  if (out.empty()) throw ConfigError("--seed-set selects none of the configured seeds");
  return out;
}

std::vector<data::DatasetSpec> selected_datasets(const data::RunConfig& cfg,
                                                 const Filters& filters) {
  if (!filters.datasets) return cfg.datasets;
  std::vector<data::DatasetSpec> out;
  for (const auto& ds : cfg.datasets) {
    if (std::find(filters.datasets->begin(), filters.datasets->end(), ds.name) !=
        filters.datasets->end()) {
      out.push_back(ds);
    }
  }
  if (out.empty()) throw ConfigError("--datasets selects none of the configured datasets");
  return out;
}

}  // namespace

std::vector<ConditionSpec> selected_conditions(const data::RunConfig& cfg,
                                               const Filters& filters) {
  std::vector<ConditionSpec> all = default_condition_grid(cfg);
  for (auto& extra : extra_conditions()) all.push_back(std::move(extra));

  std::vector<ConditionSpec> pool;
  if (cfg.conditions.empty()) {
    pool = default_condition_grid(cfg);
  } else {
    for (const auto& wanted : cfg.conditions) {
      const auto it = std::find_if(all.begin(), all.end(), [&](const ConditionSpec& spec) {
        return spec.label == wanted;
      });
      if (it == all.end()) throw ConfigError("unknown condition label in config: " + wanted);
      pool.push_back(*it);
    }
  }
  if (!filters.conditions) return pool;
  std::vector<ConditionSpec> out;
  for (const auto& spec : pool) {
    const bool keep = std::any_of(
        filters.conditions->begin(), filters.conditions->end(),
        [&](const std::string& f) { return f == spec.label || f == spec.family; });
    if (keep) out.push_back(spec);
  }
  if (out.empty()) throw ConfigError("--conditions selects no conditions");
  return out;
}

// -------------------------------------------------------------------------
// generate
// -------------------------------------------------------------------------

namespace {

struct FromFileStore {
  // (dataset, example_id, seed or none) -> rationale text
  std::map<std::tuple<std::string, std::string, std::int64_t>, std::string> exact;

  std::optional<std::string> find(const std::string& dataset, const std::string& id,
                                  std::uint64_t seed) const {
    const auto try_key = [this](const std::string& d, const std::string& i, std::int64_t s)
        -> std::optional<std::string> {
      const auto it = exact.find({d, i, s});
      if (it == exact.end()) return std::nullopt;
      return it->second;
    };
    if (auto hit = try_key(dataset, id, static_cast<std::int64_t>(seed))) return hit;
    if (auto hit = try_key(dataset, id, -1)) return hit;
    if (auto hit = try_key("", id, static_cast<std::int64_t>(seed))) return hit;
    return try_key("", id, -1);
  }
};

FromFileStore load_from_file(const std::string& path) {
  FromFileStore store;
  const auto file = read_jsonl(path);
  for (const auto& row : file.rows) {
    const std::string id = row.at("example_id").get<std::string>();
    const std::string dataset = row.value("dataset", std::string{});
    const std::int64_t seed =
        row.contains("seed") ? row.at("seed").get<std::int64_t>() : -1;
    store.exact[{dataset, id, seed}] = row.at("text").get<std::string>();
  }
  return store;
}

iv::DeclarationPatterns load_declaration_patterns(const data::RunConfig& cfg) {
  if (cfg.declaration_patterns_path) {
    return iv::load_patterns_file(*cfg.declaration_patterns_path);
  }
  return iv::compile_patterns(iv::default_declaration_sources());
}

}  // namespace

int run_generate(const data::RunConfig& cfg, const Filters& filters, const Options& opts) {
  const auto datasets = selected_datasets(cfg, filters);
  const auto seeds = selected_seeds(cfg, filters);
  const auto patterns = load_declaration_patterns(cfg);

  std::optional<FromFileStore> from_file;
  if (opts.from_file) from_file = load_from_file(*opts.from_file);

  std::unique_ptr<pb::ResponseCache> cache;
  std::unique_ptr<pb::ChatClient> client;
  if (!opts.mock && !from_file) {
    fs::create_directories(out_dir(cfg));
    cache = std::make_unique<pb::ResponseCache>(cfg.cache_path);
    client = std::make_unique<pb::ChatClient>(cfg.generator, cache.get());
  }

  std::vector<ojson> rows;
  std::size_t errored = 0;
  ojson inputs = ojson::object();
  if (cfg.declaration_patterns_path) {
    inputs[*cfg.declaration_patterns_path] = file_digest_hex(*cfg.declaration_patterns_path);
  }
  if (opts.from_file) inputs[*opts.from_file] = file_digest_hex(*opts.from_file);

  for (const auto& dataset : datasets) {
    inputs[dataset.path] = file_digest_hex(dataset.path);
    auto pool = data::load_examples(dataset.path);
    for (auto& example : pool) {
      if (example.dataset.empty()) example.dataset = dataset.name;
    }
    for (const auto seed : seeds) {
      const auto sampled = data::sample_without_replacement(pool, seed, cfg.sample_per_seed);
      for (const auto& example : sampled) {
        ojson row;
        row["dataset"] = dataset.name;
        row["example_id"] = example.id;
        row["seed"] = seed;
        row["example"] = data::example_to_json(example);

        std::string raw;
        std::string error_kind;
        if (opts.mock) {
          raw = mock_rationale(example, seed);
        } else if (from_file) {
          if (auto text = from_file->find(dataset.name, example.id, seed)) {
            raw = *text;
          } else {
            error_kind = "missing_rationale";
          }
        } else {
          const auto response =
              client->complete(pb::build_generation_prompt(example), /*probing=*/false);
          if (response.ok) {
            raw = response.content;
          } else {
            error_kind = response.error_kind.empty() ? "transport" : response.error_kind;
          }
        }

        if (error_kind.empty()) {
          const auto report = iv::strip_answer_declarations(raw, patterns);
          row["raw_text"] = raw;
          row["raw_digest"] = digest_hex(raw);
          row["stripped_text"] = report.cleaned_text;
          row["stripped_digest"] = digest_hex(report.cleaned_text);
          row["removed_sentences"] = report.removed_sentences;
          row["removed_token_fraction"] = report.removed_token_fraction;
          row["error"] = false;
        } else {
          ++errored;
          row["error"] = true;
          row["error_kind"] = error_kind;
        }
        rows.push_back(std::move(row));
      }
    }
  }

  std::sort(rows.begin(), rows.end(), [](const ojson& a, const ojson& b) {
    const auto key = [](const ojson& r) {
      return std::make_tuple(r.at("dataset").get<std::string>(), r.at("seed").get<std::uint64_t>(),
                             r.at("example_id").get<std::string>());
    };
    return key(a) < key(b);
  });

  const fs::path out_path = out_dir(cfg) / "rationales.jsonl";
  write_jsonl(out_path, run_header(cfg, "cotlab-rationales-v1"), rows);

  ojson outputs = ojson::object();
  outputs["rationales.jsonl"] = file_digest_hex(out_path.string());
  ojson counts;
  counts["rationales"] = rows.size();
  counts["errored"] = errored;
  write_manifest(cfg, "generate", inputs, outputs, counts);
  log_line(cfg, "generate",
           "wrote " + std::to_string(rows.size()) + " rationales, errored " +
               std::to_string(errored));
  return errored == 0 ? kExitOk : kExitPartial;
}

// -------------------------------------------------------------------------
// perturb
// -------------------------------------------------------------------------

namespace {

data::Example example_from_row(const ojson& row) {
  return data::example_from_json(row.at("example"), "conditions row");
}

struct Materialized {
  std::optional<std::string> injected;
  std::optional<std::string> question_override;
  std::optional<char> swapped_letter;
  bool skipped = false;
};

Materialized materialize(const ConditionSpec& spec, const data::Example& example,
                         const std::string& raw, const std::string& stripped,
                         const iv::CompressionResult* compression, std::uint64_t derived,
                         const retrieval::Bm25Index* wiki_index, const data::RunConfig& cfg) {
  using textops::Direction;
  Materialized out;
  const auto& family = spec.family;

  if (family == "io") return out;
  if (family == "cot" || family == "stripped") {
    out.injected = stripped;
    return out;
  }
  if (family == "raw_cot") {
    out.injected = raw;
    return out;
  }
  if (family == "ss" || family == "stripped_ss" || family == "raw_ss") {
    const std::string& source = family == "raw_ss" ? raw : stripped;
    out.injected =
        textops::join_sentences(textops::shuffle_sentences(textops::split_sentences(source),
                                                           derived));
    return out;
  }
  if (family == "ws" || family == "ngram") {
    const std::size_t n = family == "ws" ? 1 : spec.params.value("n", 1);
    out.injected = textops::detokenize(
        textops::ngram_block_shuffle(textops::tokenize(stripped), n, derived));
    return out;
  }
  if (family == "value_removed" || family == "value_swapped") {
    if (!example.answer_value || example.answer_value->empty()) {
      out.skipped = true;
      return out;
    }
    if (family == "value_removed") {
      out.injected =
          iv::edit_answer_value(stripped, *example.answer_value, std::nullopt).edited_text;
      return out;
    }
    // pick a distractor option whose value actually differs
    const std::string gold_norm = iv::normalize_numeric(*example.answer_value);
    std::vector<std::pair<char, std::string>> candidates;
    for (const auto& [letter, text] : example.options) {
      if (letter == example.answer_letter || text.empty()) continue;
      const std::string norm = iv::normalize_numeric(text);
      const bool same = norm.empty() ? text == *example.answer_value : norm == gold_norm;
      if (!same) candidates.emplace_back(letter, text);
    }
    if (candidates.empty()) {
      out.skipped = true;
      return out;
    }
    SplitMix64 rng(derived);
    const auto& [letter, text] = candidates[rng.below(candidates.size())];
    out.injected =
        iv::edit_answer_value(stripped, *example.answer_value, text).edited_text;
    out.swapped_letter = letter;
    return out;
  }
  if (family == "option_letters") {
    out.injected = iv::remove_option_letters(stripped, example.letters());
    return out;
  }
  if (family == "mask") {
    out.injected = textops::detokenize(
        iv::mask_tokens(textops::tokenize(stripped), spec.params.value("rate", 0.0), derived));
    return out;
  }
  if (family == "tail") {
    const auto direction = spec.params.value("direction", std::string{"from_start"});
    out.injected = textops::detokenize(textops::truncate_fraction(
        textops::tokenize(stripped), spec.params.value("keep", 1.0),
        direction == "from_end" ? Direction::FromEnd : Direction::FromStart));
    return out;
  }
  if (family == "concept" || family == "concept_ss" || family == "concept_intra" ||
      family == "concept_ws") {
    if (compression == nullptr) {
      out.skipped = true;
      return out;
    }
    if (family == "concept") {
      out.injected = compression->text;
    } else if (family == "concept_ss") {
      std::vector<std::string> phrases;
      for (const auto& phrase : compression->phrases) phrases.push_back(phrase.text);
      SplitMix64 rng(derived);
      fisher_yates(phrases, rng);
      std::string joined;
      for (std::size_t i = 0; i < phrases.size(); ++i) {
        if (i > 0) joined.push_back(' ');
        joined += phrases[i];
      }
      out.injected = joined;
    } else if (family == "concept_intra") {
      std::string joined;
      for (std::size_t i = 0; i < compression->phrases.size(); ++i) {
        const auto sub = derive_seed(derived, {"phrase", std::to_string(i)});
        const auto shuffled = textops::ngram_block_shuffle(
            textops::tokenize(compression->phrases[i].text), 1, sub);
        if (i > 0) joined.push_back(' ');
        joined += textops::detokenize(shuffled);
      }
      out.injected = joined;
    } else {
      out.injected = textops::detokenize(
          textops::ngram_block_shuffle(textops::tokenize(compression->text), 1, derived));
    }
    return out;
  }
  if (family == "wiki") {
    if (wiki_index == nullptr) {
      out.skipped = true;
      return out;
    }
    const std::string query =
        cfg.bm25.query_includes_options ? pb::render_question(example) : example.question;
    const auto passage = retrieval::control_passage(
        query, textops::tokenize(stripped).size(), *wiki_index);
    out.injected = passage.text;
    return out;
  }
  if (family == "qstem") {
    const auto perturbed =
        iv::perturb_question_stem(example, spec.params.value("n", 1), derived);
    out.question_override = perturbed.question;
    return out;
  }
  throw ConfigError("unknown condition family: " + family);
}

}  // namespace

int run_perturb(const data::RunConfig& cfg, const Filters& filters, const Options& opts) {
  check_stage_input(cfg, "generate", "rationales.jsonl");
  const auto rationales = read_jsonl(out_dir(cfg) / "rationales.jsonl");
  const auto specs = selected_conditions(cfg, filters);
  const auto seeds = selected_seeds(cfg, filters);
  const auto datasets = selected_datasets(cfg, filters);

  const bool wants_wiki = std::any_of(specs.begin(), specs.end(), [](const ConditionSpec& s) {
    return s.family == "wiki";
  });
  const bool wants_concept = std::any_of(specs.begin(), specs.end(), [](const ConditionSpec& s) {
    return s.family.rfind("concept", 0) == 0;
  });

  std::optional<retrieval::Bm25Index> wiki_index;
  ojson inputs = ojson::object();
  inputs["rationales.jsonl"] = file_digest_hex((out_dir(cfg) / "rationales.jsonl").string());
  if (wants_wiki) {
    if (!cfg.wiki_corpus_path) {
      throw ConfigError("the wiki condition needs wiki_corpus_path in the config");
    }
    inputs[*cfg.wiki_corpus_path] = file_digest_hex(*cfg.wiki_corpus_path);
    wiki_index = retrieval::Bm25Index::build(retrieval::load_corpus_jsonl(*cfg.wiki_corpus_path),
                                             {cfg.bm25.k1, cfg.bm25.b});
  }

  // Compression runs once per rationale and is shared by the concept variants.
  std::unique_ptr<pb::ResponseCache> cache;
  std::unique_ptr<pb::ChatClient> client;
  std::function<std::optional<std::string>(const std::string&)> compress_one;
  if (wants_concept) {
    if (opts.mock) {
      compress_one = [](const std::string& sentence) -> std::optional<std::string> {
        return mock_compress_sentence(sentence);
      };
    } else {
      cache = std::make_unique<pb::ResponseCache>(cfg.cache_path);
      client = std::make_unique<pb::ChatClient>(cfg.generator, cache.get());
      compress_one = [&client](const std::string& sentence) -> std::optional<std::string> {
        const std::vector<pb::ChatTurn> turns{
            {pb::Role::System, "You are a helpful assistant."},
            {pb::Role::User, iv::render_compression_prompt(sentence)},
        };
        const auto response = client->complete(turns, /*probing=*/false);
        if (!response.ok || response.content.empty()) return std::nullopt;
        return response.content;
      };
    }
  }

  std::vector<ojson> rows;
  std::map<std::string, std::size_t> skipped;
  std::set<std::string> dataset_names;
  for (const auto& ds : datasets) dataset_names.insert(ds.name);
  std::set<std::uint64_t> seed_set(seeds.begin(), seeds.end());

  for (const auto& rationale : rationales.rows) {
    if (rationale.value("error", false)) continue;
    const std::string dataset = rationale.at("dataset").get<std::string>();
    const auto seed = rationale.at("seed").get<std::uint64_t>();
    if (!dataset_names.count(dataset) || !seed_set.count(seed)) continue;

    const auto example = example_from_row(rationale);
    const std::string raw = rationale.at("raw_text").get<std::string>();
    const std::string stripped = rationale.at("stripped_text").get<std::string>();

    std::optional<iv::CompressionResult> compression;
    if (wants_concept) {
      compression = iv::compress_concepts(textops::split_sentences(stripped), compress_one);
    }

    for (const auto& spec : specs) {
      const std::uint64_t derived = derive_seed(seed, {dataset, example.id, spec.seed_key()});
      const auto mat = materialize(spec, example, raw, stripped,
                                   compression ? &*compression : nullptr, derived,
                                   wiki_index ? &*wiki_index : nullptr, cfg);
      if (mat.skipped) {
        ++skipped[spec.label];
        continue;
      }
      ojson row;
      row["dataset"] = dataset;
      row["example_id"] = example.id;
      row["seed"] = seed;
      row["condition"] = spec.label;
      row["family"] = spec.family;
      row["params"] = spec.params;
      ojson ex = rationale.at("example");
      if (mat.question_override) ex["question"] = *mat.question_override;
      row["example"] = std::move(ex);
      row["injected"] = mat.injected ? ojson(*mat.injected) : ojson(nullptr);
      row["injected_digest"] = digest_hex(mat.injected ? *mat.injected : "");
      row["reference"] = stripped;
      if (mat.swapped_letter) row["swapped_letter"] = std::string(1, *mat.swapped_letter);
      rows.push_back(std::move(row));
    }
  }

  std::sort(rows.begin(), rows.end(), [](const ojson& a, const ojson& b) {
    const auto key = [](const ojson& r) {
      return std::make_tuple(r.at("dataset").get<std::string>(),
                             r.at("condition").get<std::string>(),
                             r.at("seed").get<std::uint64_t>(),
                             r.at("example_id").get<std::string>());
    };
    return key(a) < key(b);
  });

  const fs::path out_path = out_dir(cfg) / "conditions.jsonl";
  write_jsonl(out_path, run_header(cfg, "cotlab-conditions-v1"), rows);

  ojson outputs = ojson::object();
  outputs["conditions.jsonl"] = file_digest_hex(out_path.string());
  ojson counts;
  counts["rows"] = rows.size();
  ojson skips = ojson::object();
  for (const auto& [label, count] : skipped) skips[label] = count;
  counts["skipped"] = std::move(skips);
  write_manifest(cfg, "perturb", inputs, outputs, counts);
  std::string skip_note;
  for (const auto& [label, count] : skipped) {
    skip_note += " " + label + "=" + std::to_string(count);
  }
  log_line(cfg, "perturb",
           "wrote " + std::to_string(rows.size()) + " condition rows; skipped" +
               (skip_note.empty() ? " none" : skip_note));
  return kExitOk;
}

// -------------------------------------------------------------------------
// probe
// -------------------------------------------------------------------------

int run_probe(const data::RunConfig& cfg, const Filters& filters, const Options& opts) {
  check_stage_input(cfg, "perturb", "conditions.jsonl");
  const auto conditions = read_jsonl(out_dir(cfg) / "conditions.jsonl");

  const auto seeds = selected_seeds(cfg, filters);
  const auto datasets = selected_datasets(cfg, filters);
  std::set<std::string> dataset_names;
  for (const auto& ds : datasets) dataset_names.insert(ds.name);
  std::set<std::uint64_t> seed_set(seeds.begin(), seeds.end());
  std::optional<std::set<std::string>> condition_filter;
  if (filters.conditions) {
    condition_filter.emplace(filters.conditions->begin(), filters.conditions->end());
  }

  std::vector<const ojson*> rows;
  for (const auto& row : conditions.rows) {
    if (!dataset_names.count(row.at("dataset").get<std::string>())) continue;
    if (!seed_set.count(row.at("seed").get<std::uint64_t>())) continue;
    if (condition_filter &&
        !condition_filter->count(row.at("condition").get<std::string>()) &&
        !condition_filter->count(row.at("family").get<std::string>())) {
      continue;
    }
    rows.push_back(&row);
  }

  std::unique_ptr<pb::ResponseCache> cache;
  std::unique_ptr<pb::ChatClient> client;
  if (!opts.mock) {
    cache = std::make_unique<pb::ResponseCache>(cfg.cache_path);
    client = std::make_unique<pb::ChatClient>(cfg.probe_endpoint, cache.get());
  }

  const auto probe_row = [&](const ojson& row) {
    const auto example = example_from_row(row);
    std::optional<std::string> injected;
    if (!row.at("injected").is_null()) injected = row.at("injected").get<std::string>();

    data::ConditionRecord record;
    record.example_id = example.id;
    record.dataset = row.at("dataset").get<std::string>();
    record.condition_label = row.at("condition").get<std::string>();
    record.condition_family = row.at("family").get<std::string>();
    record.condition_params = row.at("params");
    record.seed = row.at("seed").get<std::uint64_t>();
    record.injected_digest = row.at("injected_digest").get<std::string>();
    if (row.contains("swapped_letter")) {
      record.swapped_letter = row.at("swapped_letter").get<std::string>()[0];
    }

    if (opts.mock) {
      const auto outcome = pb::mock_probe(example, injected,
                                          row.at("reference").get<std::string>(),
                                          cfg.mock.base_rate, cfg.mock.gain);
      record.predicted = outcome.predicted;
      record.correct = outcome.correct;
      record.option_probabilities = outcome.option_probabilities;
      return record;
    }

    const auto response = client->complete(pb::build_probe_prompt(example, injected), true);
    if (!response.ok) {
      record.error = true;
      record.error_kind = response.error_kind;
      return record;
    }
    const auto scored = pb::score_options(response.top_logprobs, example.letters());
    record.predicted = scored.predicted;
    record.abstain = !scored.predicted.has_value();
    record.correct = scored.predicted && *scored.predicted == example.answer_letter;
    record.option_probabilities = scored.probabilities;
    record.top_logprob_count = response.top_logprob_count;
    return record;
  };

  std::vector<data::ConditionRecord> records(rows.size());
  if (opts.mock) {
    for (std::size_t i = 0; i < rows.size(); ++i) records[i] = probe_row(*rows[i]);
  } else {
    std::atomic<std::size_t> cursor{0};
    const int workers = std::max(1, cfg.probe_endpoint.max_in_flight);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t i = cursor.fetch_add(1);
          if (i >= rows.size()) break;
          records[i] = probe_row(*rows[i]);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  // results attach to examples by key, never by completion order
  std::sort(records.begin(), records.end(),
            [](const data::ConditionRecord& a, const data::ConditionRecord& b) {
              return std::make_tuple(a.dataset, a.condition_label, a.seed, a.example_id) <
                     std::make_tuple(b.dataset, b.condition_label, b.seed, b.example_id);
            });

  std::size_t errored = 0;
  std::size_t abstained = 0;
  for (const auto& r : records) {
    if (r.error) ++errored;
    if (r.abstain) ++abstained;
  }

  const fs::path out_path = out_dir(cfg) / "records.jsonl";
  ojson header = run_header(cfg, "cotlab-records-v1");
  header["probe_mode"] = opts.mock ? "mock" : "live";
  data::persist_records(records, out_path.string(), header);

  ojson inputs = ojson::object();
  inputs["conditions.jsonl"] = file_digest_hex((out_dir(cfg) / "conditions.jsonl").string());
  ojson outputs = ojson::object();
  outputs["records.jsonl"] = file_digest_hex(out_path.string());
  ojson counts;
  counts["records"] = records.size();
  counts["errored"] = errored;
  counts["abstained"] = abstained;
  write_manifest(cfg, "probe", inputs, outputs, counts);
  log_line(cfg, "probe",
           "wrote " + std::to_string(records.size()) + " records, errored " +
               std::to_string(errored) + ", abstained " + std::to_string(abstained));
  return errored == 0 ? kExitOk : kExitPartial;
}

int run_all(const data::RunConfig& cfg, const Filters& filters, const Options& opts) {
  int worst = kExitOk;
  const auto fold = [&worst](int code) { worst = std::max(worst, code); };
  fold(run_generate(cfg, filters, opts));
  fold(run_perturb(cfg, filters, opts));
  fold(run_probe(cfg, filters, opts));
  fold(run_analyze(cfg, filters));
  fold(run_plot(cfg, filters));
  return worst;
}

}  // namespace cotlab::pipeline
