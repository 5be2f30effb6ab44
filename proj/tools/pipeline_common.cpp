#include "pipeline_common.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "cotlab/rng.hpp"

namespace cotlab::pipeline::detail {

void log_line(const data::RunConfig& cfg, const std::string& stage, const std::string& message) {
  fs::create_directories(out_dir(cfg));
  std::ofstream out(out_dir(cfg) / "log.txt", std::ios::app);
  const auto now = std::chrono::system_clock::now();
  const auto t = std::chrono::system_clock::to_time_t(now);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%S", std::gmtime(&t));
  out << "[" << stamp << "Z] " << stage << ": " << message << "\n";
}

JsonlFile read_jsonl(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open: " + path.string());
  JsonlFile file;
  file.header = ojson(nullptr);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    const bool terminated = !in.eof();
    ++line_no;
    if (line.empty()) continue;
    ojson j = ojson::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) {
      if (!terminated) {
        ++file.skipped_lines;
        break;
      }
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": invalid JSON");
    }
    if (j.is_object() && j.value("kind", std::string{}) == "header") {
      file.header = std::move(j);
      continue;
    }
    file.rows.push_back(std::move(j));
  }
  return file;
}

void write_jsonl(const fs::path& path, const ojson& header, const std::vector<ojson>& rows) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot write: " + path.string());
  if (!header.is_null()) {
    ojson h = header;
    h["kind"] = "header";
    const std::string line = h.dump() + "\n";
    out.write(line.data(), static_cast<std::streamsize>(line.size()));
  }
  for (const auto& row : rows) {
    const std::string line = row.dump() + "\n";
    out.write(line.data(), static_cast<std::streamsize>(line.size()));
  }
  out.flush();
  if (!out) throw ConfigError("write failed: " + path.string());
}

void write_text(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw ConfigError("cannot write: " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw ConfigError("write failed: " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

ojson run_header(const data::RunConfig& cfg, const std::string& schema) {
  ojson h;
  h["schema"] = schema;
  h["config_id"] = cfg.config_id;
  h["config_digest"] = cfg.config_digest;
  h["rng"] = std::string(kRngIdentity);
  h["sampling"] = "sort-by-id+fisher-yates";
  return h;
}

void write_manifest(const data::RunConfig& cfg, const std::string& stage, const ojson& inputs,
                    const ojson& outputs, const ojson& counts) {
  ojson m;
  m["stage"] = stage;
  m["config_id"] = cfg.config_id;
  m["config_digest"] = cfg.config_digest;
  m["inputs"] = inputs;
  m["outputs"] = outputs;
  m["counts"] = counts;
  write_text(stage_manifest_path(cfg, stage), m.dump(2) + "\n");
}

void check_stage_input(const data::RunConfig& cfg, const std::string& producer_stage,
                       const std::string& relative_output) {
  const fs::path manifest_path = stage_manifest_path(cfg, producer_stage);
  if (!fs::exists(manifest_path)) {
    throw ConfigError("missing input for this stage: run '" + producer_stage + "' first (no " +
                      manifest_path.string() + ")");
  }
  const ojson manifest = ojson::parse(read_text(manifest_path));
  const auto& outputs = manifest.at("outputs");
  if (!outputs.contains(relative_output)) {
    throw ConfigError("stage '" + producer_stage + "' did not record output '" +
                      relative_output + "'; rerun " + producer_stage);
  }
  const fs::path file = out_dir(cfg) / relative_output;
  if (!fs::exists(file)) {
    throw ConfigError("missing input file " + file.string() + "; rerun " + producer_stage);
  }
  const std::string expected = outputs.at(relative_output).get<std::string>();
  const std::string actual = file_digest_hex(file.string());
  if (actual != expected) {
    throw ConfigError("digest mismatch for " + relative_output + " (expected " + expected +
                      ", found " + actual + "); rerun " + producer_stage);
  }
  if (manifest.value("config_digest", std::string{}) != cfg.config_digest) {
    throw ConfigError("stage '" + producer_stage +
                      "' ran under a different config; rerun it with this config");
  }
}

std::string percent_label(double fraction) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%lld", std::llround(fraction * 100.0));
  return std::string(buf);
}

}  // namespace cotlab::pipeline::detail
