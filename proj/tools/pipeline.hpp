#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cotlab/data.hpp"

namespace cotlab::pipeline {

// CLI filters narrowing a run without touching the config file.
struct Filters {
  std::optional<std::vector<std::uint64_t>> seeds;
  std::optional<std::vector<std::string>> datasets;
  std::optional<std::vector<std::string>> conditions;  // labels or family names
};

struct Options {
  bool mock = false;
  std::optional<std::string> from_file;  // generate: ingest pre-made rationales
};

// One condition cell of the grid.
struct ConditionSpec {
  std::string label;
  std::string family;
  data::ojson params = data::ojson::object();

  // Conditions that must produce identical bytes (ws vs ngram n=1, ss vs
  // stripped+ss) share this key, which drives per-example seed derivation.
  std::string seed_key() const;
};

// The full default grid for a config: io, cot, ss, ws, the n-gram sweep,
// stripping aliases, answer-value edits, option-letter removal, masking, the
// tail sweep, concept compression variants, the retrieval control and the
// question-stem sweep.
std::vector<ConditionSpec> default_condition_grid(const data::RunConfig& cfg);

// Grid after config condition list and CLI filters are applied.
std::vector<ConditionSpec> selected_conditions(const data::RunConfig& cfg,
                                               const Filters& filters);

// Exit codes shared with the CLI: 0 ok, 1 configuration error, 2 completed
// with per-example errors.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitPartial = 2;

int run_generate(const data::RunConfig& cfg, const Filters& filters, const Options& opts);
int run_perturb(const data::RunConfig& cfg, const Filters& filters, const Options& opts);
int run_probe(const data::RunConfig& cfg, const Filters& filters, const Options& opts);
int run_analyze(const data::RunConfig& cfg, const Filters& filters);
int run_plot(const data::RunConfig& cfg, const Filters& filters);
int run_index_wiki(const data::RunConfig& cfg);
int run_all(const data::RunConfig& cfg, const Filters& filters, const Options& opts);

}  // namespace cotlab::pipeline
