#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "cotlab/data.hpp"
#include "cotlab/digest.hpp"
#include "cotlab/error.hpp"
#include "pipeline.hpp"

// Internals shared by the stage implementations.
namespace cotlab::pipeline::detail {

namespace fs = std::filesystem;
using data::ojson;

inline fs::path out_dir(const data::RunConfig& cfg) { return fs::path(cfg.output_dir); }

inline fs::path stage_manifest_path(const data::RunConfig& cfg, const std::string& stage) {
  return out_dir(cfg) / "manifests" / (stage + ".json");
}

// Timestamps are allowed here and nowhere else.
void log_line(const data::RunConfig& cfg, const std::string& stage, const std::string& message);

struct JsonlFile {
  ojson header;  // null when absent
  std::vector<ojson> rows;
  std::size_t skipped_lines = 0;
};

JsonlFile read_jsonl(const fs::path& path);
void write_jsonl(const fs::path& path, const ojson& header, const std::vector<ojson>& rows);
void write_text(const fs::path& path, const std::string& content);
std::string read_text(const fs::path& path);

ojson run_header(const data::RunConfig& cfg, const std::string& schema);

// Stage manifest: config digest, input digests, output digests, counters.
void write_manifest(const data::RunConfig& cfg, const std::string& stage, const ojson& inputs,
                    const ojson& outputs, const ojson& counts);

// Verifies that `relative_output` still matches what `producer_stage`
// recorded. Throws ConfigError naming the stage to rerun.
void check_stage_input(const data::RunConfig& cfg, const std::string& producer_stage,
                       const std::string& relative_output);

std::string percent_label(double fraction);  // 0.8 -> "80"

}  // namespace cotlab::pipeline::detail
