#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cotlab/data.hpp"
#include "cotlab/error.hpp"
#include "pipeline.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  bool mock = false;
  std::string from_file;
  std::vector<std::uint64_t> seed_set;
  std::vector<std::string> datasets;
  std::vector<std::string> conditions;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_from_file = false) {
  cmd->add_option("--config", args.config_path, "Run config JSON")->required();
  cmd->add_flag("--mock", args.mock, "Use the deterministic mock endpoints");
  cmd->add_option("--seed-set", args.seed_set, "Restrict to these seeds")->delimiter(',');
  cmd->add_option("--datasets", args.datasets, "Restrict to these datasets")->delimiter(',');
  cmd->add_option("--conditions", args.conditions,
                  "Restrict to these condition labels or families")
      ->delimiter(',');
  if (with_from_file) {
    cmd->add_option("--from-file", args.from_file,
                    "Ingest pre-generated rationales from JSONL instead of calling the endpoint");
  }
}

cotlab::pipeline::Filters filters_of(const CommonArgs& args) {
  cotlab::pipeline::Filters f;
  if (!args.seed_set.empty()) f.seeds = args.seed_set;
  if (!args.datasets.empty()) f.datasets = args.datasets;
  if (!args.conditions.empty()) f.conditions = args.conditions;
  return f;
}

cotlab::pipeline::Options options_of(const CommonArgs& args) {
  cotlab::pipeline::Options o;
  o.mock = args.mock;
  if (!args.from_file.empty()) o.from_file = args.from_file;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cotlab: probe-time rationale perturbation harness"};
  app.require_subcommand(1);

  CommonArgs args;
  auto* generate = app.add_subcommand("generate", "Produce and strip rationales");
  add_common(generate, args, /*with_from_file=*/true);
  auto* perturb = app.add_subcommand("perturb", "Materialize the condition grid");
  add_common(perturb, args);
  auto* probe = app.add_subcommand("probe", "Probe the endpoint over all conditions");
  add_common(probe, args);
  auto* analyze = app.add_subcommand("analyze", "Compute accuracies, GR curves and tests");
  add_common(analyze, args);
  auto* plot = app.add_subcommand("plot", "Emit figure CSVs and SVGs");
  add_common(plot, args);
  auto* run_all = app.add_subcommand("run-all", "Run every stage in order");
  add_common(run_all, args, /*with_from_file=*/true);
  auto* index_wiki = app.add_subcommand("index-wiki", "Build and summarize the BM25 corpus");
  index_wiki->add_option("--config", args.config_path, "Run config JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const auto cfg = cotlab::data::load_run_config(args.config_path);
    const auto filters = filters_of(args);
    const auto options = options_of(args);
    if (generate->parsed()) return cotlab::pipeline::run_generate(cfg, filters, options);
    if (perturb->parsed()) return cotlab::pipeline::run_perturb(cfg, filters, options);
    if (probe->parsed()) return cotlab::pipeline::run_probe(cfg, filters, options);
    if (analyze->parsed()) return cotlab::pipeline::run_analyze(cfg, filters);
    if (plot->parsed()) return cotlab::pipeline::run_plot(cfg, filters);
    if (run_all->parsed()) return cotlab::pipeline::run_all(cfg, filters, options);
    if (index_wiki->parsed()) return cotlab::pipeline::run_index_wiki(cfg);
  } catch (const cotlab::ConfigError& ex) {
    std::fprintf(stderr, "configuration error: %s\n", ex.what());
    return cotlab::pipeline::kExitConfig;
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return cotlab::pipeline::kExitConfig;
  }
  return cotlab::pipeline::kExitConfig;
}
