#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "charts.hpp"
#include "cotlab/probe.hpp"
#include "cotlab/rng.hpp"
#include "cotlab/retrieval.hpp"
#include "cotlab/stats.hpp"
#include "cotlab/textops.hpp"
#include "pipeline.hpp"
#include "pipeline_common.hpp"

namespace cotlab::pipeline {

using namespace detail;
namespace st = cotlab::stats;

namespace {

std::string csv_escape(const std::string& value) {
  if (value.find_first_of(",\"\n") == std::string::npos) return value;
  std::string out = "\"";
  for (const char c : value) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i > 0) out.push_back(',');
    out += csv_escape(header[i]);
  }
  out.push_back('\n');
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out.push_back(',');
      out += csv_escape(row[i]);
    }
    out.push_back('\n');
  }
  write_text(path, out);
}

std::string num(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  return std::string(buf);
}

using Records = std::vector<data::ConditionRecord>;

struct McNemarRow {
  std::string a;
  std::string b_label;
  st::McNemarResult result;
  std::size_t excluded = 0;      // pairs dropped for per-example errors
  std::size_t dropped_keys = 0;  // keys absent from one side (condition skips)
};

McNemarRow mcnemar_between(const std::string& label_a, const Records& a,
                           const std::string& label_b, const Records& b) {
  using Key = std::pair<std::string, std::uint64_t>;
  std::map<Key, const data::ConditionRecord*> bx;
  for (const auto& r : b) bx[{r.example_id, r.seed}] = &r;

  McNemarRow row;
  row.a = label_a;
  row.b_label = label_b;
  std::size_t bcount = 0;
  std::size_t ccount = 0;
  std::size_t joined = 0;
  for (const auto& r : a) {
    const auto it = bx.find({r.example_id, r.seed});
    if (it == bx.end()) continue;
    ++joined;
    if (r.error || it->second->error) {
      ++row.excluded;
      continue;
    }
    if (r.correct && !it->second->correct) ++bcount;
    if (!r.correct && it->second->correct) ++ccount;
  }
  row.dropped_keys = (a.size() - joined) + (b.size() - joined);
  row.result = st::mcnemar_counts(bcount, ccount);
  return row;
}

struct DatasetAnalysis {
  std::map<std::string, Records> by_label;
  std::map<std::string, st::AccuracySummary> summaries;
  std::map<std::size_t, double> ngram_accuracy;
  std::optional<st::GrCurve> curve_cot;
  std::optional<st::GrCurve> curve_ss;
  std::vector<McNemarRow> tests;
  std::optional<double> follow_swap;
};

DatasetAnalysis analyze_dataset(const std::string& dataset, const std::string& config_id,
                                const Records& records) {
  DatasetAnalysis a;
  for (const auto& r : records) a.by_label[r.condition_label].push_back(r);

  for (const auto& [label, recs] : a.by_label) {
    st::pool_seeds({recs});  // (example, seed) uniqueness within each condition
    a.summaries[label] = st::summarize(recs);
    if (recs.front().condition_family == "ngram") {
      const std::size_t n = recs.front().condition_params.value("n", 1);
      a.ngram_accuracy[n] = a.summaries[label].accuracy();
    }
  }

  const auto acc_of = [&](const std::string& label) -> std::optional<double> {
    const auto it = a.summaries.find(label);
    if (it == a.summaries.end() || it->second.total == 0) return std::nullopt;
    return it->second.accuracy();
  };

  const auto acc_ws = acc_of("ws") ? acc_of("ws") : acc_of("ngram_1");
  if (acc_ws && !a.ngram_accuracy.empty()) {
    if (const auto ceiling = acc_of("cot")) {
      a.curve_cot = st::build_gr_curve(dataset, config_id, *acc_ws, *ceiling,
                                       st::CeilingKind::CoT, a.ngram_accuracy);
    }
    if (const auto ceiling = acc_of("ss")) {
      a.curve_ss = st::build_gr_curve(dataset, config_id, *acc_ws, *ceiling,
                                      st::CeilingKind::SS, a.ngram_accuracy);
    }
  }

  for (const char* baseline : {"cot", "io"}) {
    const auto base_it = a.by_label.find(baseline);
    if (base_it == a.by_label.end()) continue;
    for (const auto& [label, recs] : a.by_label) {
      if (label == baseline) continue;
      a.tests.push_back(mcnemar_between(label, recs, baseline, base_it->second));
    }
  }

  if (const auto it = a.by_label.find("value_swapped"); it != a.by_label.end()) {
    Records with_letter;
    for (const auto& r : it->second) {
      if (r.swapped_letter) with_letter.push_back(r);
    }
    if (!with_letter.empty()) a.follow_swap = st::follow_swap_rate(with_letter);
  }
  return a;
}

ojson curve_json(const st::GrCurve& curve) {
  ojson j;
  j["ceiling"] = curve.ceiling == st::CeilingKind::CoT ? "cot" : "ss";
  j["acc_ws"] = curve.acc_ws;
  j["acc_ceiling"] = curve.acc_ceiling;
  ojson points = ojson::object();
  for (const auto& [n, point] : curve.points) {
    ojson p;
    p["accuracy"] = point.accuracy;
    p["gr"] = point.gr ? ojson(*point.gr) : ojson(nullptr);
    points[std::to_string(n)] = std::move(p);
  }
  j["points"] = std::move(points);
  const auto n_star = st::critical_window(curve);
  j["critical_window"] = n_star ? ojson(*n_star) : ojson(nullptr);
  return j;
}

}  // namespace

int run_analyze(const data::RunConfig& cfg, const Filters& filters) {
  check_stage_input(cfg, "probe", "records.jsonl");
  const fs::path records_path = out_dir(cfg) / "records.jsonl";
  const auto record_file = data::load_records(records_path.string());

  const auto keep = [&](const data::ConditionRecord& r) {
    if (filters.datasets &&
        std::find(filters.datasets->begin(), filters.datasets->end(), r.dataset) ==
            filters.datasets->end()) {
      return false;
    }
    if (filters.seeds && std::find(filters.seeds->begin(), filters.seeds->end(), r.seed) ==
                             filters.seeds->end()) {
      return false;
    }
    if (filters.conditions) {
      const bool match = std::any_of(filters.conditions->begin(), filters.conditions->end(),
                                     [&](const std::string& f) {
                                       return f == r.condition_label || f == r.condition_family;
                                     });
      if (!match) return false;
    }
    return true;
  };

  std::map<std::string, Records> by_dataset;
  for (const auto& r : record_file.records) {
    if (keep(r)) by_dataset[r.dataset].push_back(r);
  }
  std::map<std::string, DatasetAnalysis> analyses;
  for (const auto& [dataset, records] : by_dataset) {
    analyses.emplace(dataset, analyze_dataset(dataset, cfg.config_id, records));
  }

  ojson report;
  report["schema"] = "cotlab-report-v1";
  report["config_id"] = cfg.config_id;
  report["config_digest"] = cfg.config_digest;
  report["rng"] = std::string(kRngIdentity);
  report["sampling"] = "sort-by-id+fisher-yates";
  report["probe_mode"] = record_file.header.is_null()
                             ? ojson(nullptr)
                             : record_file.header.value("probe_mode", ojson(nullptr));
  ojson bm25;
  bm25["k1"] = cfg.bm25.k1;
  bm25["b"] = cfg.bm25.b;
  bm25["query_includes_options"] = cfg.bm25.query_includes_options;
  report["bm25"] = std::move(bm25);
  report["skipped_record_lines"] = record_file.skipped_lines;

  std::vector<std::vector<std::string>> accuracy_rows;
  std::vector<std::vector<std::string>> gr_rows;
  std::vector<std::vector<std::string>> mcnemar_rows;
  std::set<std::size_t> all_ns;

  ojson datasets_json = ojson::object();
  for (const auto& [dataset, records] : by_dataset) {
    const auto& analysis = analyses.at(dataset);
    ojson d;
    d["records"] = records.size();

    ojson conditions = ojson::object();
    for (const auto& [label, summary] : analysis.summaries) {
      const auto& recs = analysis.by_label.at(label);
      ojson c;
      c["family"] = recs.front().condition_family;
      c["params"] = recs.front().condition_params;
      c["records"] = summary.total;
      c["correct"] = summary.correct;
      c["accuracy"] = summary.accuracy();
      c["accuracy_pct"] = st::format_percent(summary.accuracy());
      c["abstained"] = summary.abstained;
      c["errored"] = summary.errored;
      conditions[label] = std::move(c);

      accuracy_rows.push_back({dataset, cfg.config_id, label, recs.front().condition_family,
                               recs.front().condition_params.dump(),
                               std::to_string(summary.total), std::to_string(summary.correct),
                               num(summary.accuracy()), st::format_percent(summary.accuracy()),
                               std::to_string(summary.abstained),
                               std::to_string(summary.errored)});
    }
    d["conditions"] = std::move(conditions);

    ojson curves = ojson::object();
    for (const auto* curve : {&analysis.curve_cot, &analysis.curve_ss}) {
      if (!curve->has_value()) continue;
      const auto& c = curve->value();
      const std::string key = c.ceiling == st::CeilingKind::CoT ? "cot_ceiling" : "ss_ceiling";
      curves[key] = curve_json(c);
      for (const auto& [n, point] : c.points) all_ns.insert(n);
    }
    d["gr_curves"] = std::move(curves);

    ojson tests = ojson::array();
    for (const auto& row : analysis.tests) {
      ojson t;
      t["condition"] = row.a;
      t["baseline"] = row.b_label;
      t["b"] = row.result.b;
      t["c"] = row.result.c;
      t["p_value"] = row.result.p_value;
      t["method"] = row.result.method == st::McNemarMethod::Exact ? "exact" : "chi-square-cc";
      t["significant"] = row.result.significant;
      t["excluded_pairs"] = row.excluded;
      t["dropped_keys"] = row.dropped_keys;
      tests.push_back(std::move(t));
      mcnemar_rows.push_back({dataset, cfg.config_id, row.a, row.b_label,
                              std::to_string(row.result.b), std::to_string(row.result.c),
                              num(row.result.p_value),
                              row.result.method == st::McNemarMethod::Exact ? "exact"
                                                                            : "chi-square-cc",
                              row.result.significant ? "true" : "false",
                              std::to_string(row.excluded), std::to_string(row.dropped_keys)});
    }
    d["mcnemar"] = std::move(tests);
    d["follow_swap_rate"] =
        analysis.follow_swap ? ojson(*analysis.follow_swap) : ojson(nullptr);
    datasets_json[dataset] = std::move(d);
  }
  report["datasets"] = std::move(datasets_json);

  // wide GR table mirroring the curve grid
  {
    std::vector<std::string> header{"dataset", "config", "ceiling", "acc_ws", "acc_ceiling"};
    for (const auto n : all_ns) header.push_back("gr_n" + std::to_string(n));
    header.push_back("gr_ss");
    header.push_back("critical_window");
    for (const auto& [dataset, records] : by_dataset) {
      const auto& analysis = analyses.at(dataset);
      for (const auto* curve_opt : {&analysis.curve_cot, &analysis.curve_ss}) {
        if (!curve_opt->has_value()) continue;
        const auto& curve = curve_opt->value();
        std::vector<std::string> row{dataset, cfg.config_id,
                                     curve.ceiling == st::CeilingKind::CoT ? "cot" : "ss",
                                     num(curve.acc_ws), num(curve.acc_ceiling)};
        for (const auto n : all_ns) {
          const auto it = curve.points.find(n);
          row.push_back(it != curve.points.end() && it->second.gr ? num(*it->second.gr) : "");
        }
        const auto ss_it = analysis.summaries.find("ss");
        if (ss_it != analysis.summaries.end()) {
          const auto gr_ss = st::gap_recovery(ss_it->second.accuracy(), curve.acc_ws,
                                              curve.acc_ceiling);
          row.push_back(gr_ss ? num(*gr_ss) : "");
        } else {
          row.push_back("");
        }
        const auto n_star = st::critical_window(curve);
        row.push_back(n_star ? std::to_string(*n_star) : "");
        gr_rows.push_back(std::move(row));
      }
    }
    write_csv(out_dir(cfg) / "gr_table.csv", header, gr_rows);
  }

  write_csv(out_dir(cfg) / "accuracy_table.csv",
            {"dataset", "config", "condition", "family", "params", "records", "correct",
             "accuracy", "accuracy_pct", "abstained", "errored"},
            accuracy_rows);
  write_csv(out_dir(cfg) / "mcnemar_table.csv",
            {"dataset", "config", "condition", "baseline", "b", "c", "p_value", "method",
             "significant", "excluded_pairs", "dropped_keys"},
            mcnemar_rows);
  write_text(out_dir(cfg) / "report.json", report.dump(2) + "\n");

  ojson inputs = ojson::object();
  inputs["records.jsonl"] = file_digest_hex(records_path.string());
  ojson outputs = ojson::object();
  for (const char* name : {"report.json", "accuracy_table.csv", "gr_table.csv",
                           "mcnemar_table.csv"}) {
    outputs[name] = file_digest_hex((out_dir(cfg) / name).string());
  }
  std::size_t analyzed = 0;
  for (const auto& [dataset, records] : by_dataset) analyzed += records.size();
  ojson counts;
  counts["records_loaded"] = record_file.records.size();
  counts["records_analyzed"] = analyzed;
  counts["datasets"] = by_dataset.size();
  write_manifest(cfg, "analyze", inputs, outputs, counts);
  log_line(cfg, "analyze", "report over " + std::to_string(analyzed) + " records across " +
                               std::to_string(by_dataset.size()) + " datasets");
  return kExitOk;
}

int run_plot(const data::RunConfig& cfg, const Filters& filters) {
  check_stage_input(cfg, "analyze", "report.json");
  const ojson report = ojson::parse(read_text(out_dir(cfg) / "report.json"));
  const auto dataset_selected = [&](const std::string& name) {
    return !filters.datasets || std::find(filters.datasets->begin(), filters.datasets->end(),
                                          name) != filters.datasets->end();
  };

  std::vector<std::vector<std::string>> accuracy_rows;
  std::vector<BarGroup> bar_groups;
  std::vector<std::vector<std::string>> gr_rows;
  std::vector<GrSeries> gr_series;

  static const char* kBarConditions[] = {"io", "cot", "ss", "ws", "ngram_2"};

  for (const auto& [dataset, d] : report.at("datasets").items()) {
    if (!dataset_selected(dataset)) continue;
    BarGroup group;
    group.label = dataset;
    for (const auto& [label, c] : d.at("conditions").items()) {
      accuracy_rows.push_back({dataset, report.at("config_id").get<std::string>(), label,
                               c.at("family").get<std::string>(), c.at("params").dump(),
                               num(c.at("accuracy").get<double>())});
    }
    for (const char* name : kBarConditions) {
      if (d.at("conditions").contains(name)) {
        group.bars.push_back({name, d.at("conditions").at(name).at("accuracy").get<double>()});
      }
    }
    if (!group.bars.empty()) bar_groups.push_back(std::move(group));

    if (d.at("gr_curves").contains("cot_ceiling")) {
      const auto& curve = d.at("gr_curves").at("cot_ceiling");
      GrSeries series;
      series.label = dataset;
      for (const auto& [n_str, point] : curve.at("points").items()) {
        if (point.at("gr").is_null()) continue;
        const double n = std::stod(n_str);
        const double gr = point.at("gr").get<double>();
        series.points.emplace_back(n, gr);
        gr_rows.push_back({dataset, report.at("config_id").get<std::string>(), "cot", n_str,
                           num(point.at("accuracy").get<double>()), num(gr),
                           !curve.at("critical_window").is_null() &&
                                   curve.at("critical_window").get<std::size_t>() ==
                                       static_cast<std::size_t>(n)
                               ? "true"
                               : "false"});
      }
      std::sort(series.points.begin(), series.points.end());
      if (!curve.at("critical_window").is_null()) {
        series.critical_x = curve.at("critical_window").get<double>();
      }
      if (!series.points.empty()) gr_series.push_back(std::move(series));
    }
  }

  const std::string config_id = report.at("config_id").get<std::string>();
  write_csv(out_dir(cfg) / "figure_accuracy.csv",
            {"dataset", "config", "condition", "family", "params", "accuracy"}, accuracy_rows);
  write_csv(out_dir(cfg) / "figure_gr.csv",
            {"dataset", "config", "ceiling", "n", "accuracy", "gr", "is_critical_window"},
            gr_rows);
  write_text(out_dir(cfg) / "figure_accuracy.svg",
             render_bar_chart("Probe accuracy by condition (config " + config_id + ")",
                              bar_groups));
  write_text(out_dir(cfg) / "figure_gr.svg",
             render_gr_chart("Gap recovery by block size (config " + config_id + ")",
                             gr_series));

  ojson inputs = ojson::object();
  inputs["report.json"] = file_digest_hex((out_dir(cfg) / "report.json").string());
  ojson outputs = ojson::object();
  for (const char* name : {"figure_accuracy.csv", "figure_gr.csv", "figure_accuracy.svg",
                           "figure_gr.svg"}) {
    outputs[name] = file_digest_hex((out_dir(cfg) / name).string());
  }
  ojson counts;
  counts["figure_accuracy_rows"] = accuracy_rows.size();
  counts["figure_gr_rows"] = gr_rows.size();
  write_manifest(cfg, "plot", inputs, outputs, counts);
  log_line(cfg, "plot", "figures and plot CSVs written");
  return kExitOk;
}

int run_index_wiki(const data::RunConfig& cfg) {
  if (!cfg.wiki_corpus_path) {
    throw ConfigError("index-wiki needs wiki_corpus_path in the config");
  }
  const auto corpus = retrieval::load_corpus_jsonl(*cfg.wiki_corpus_path);
  const auto index =
      retrieval::Bm25Index::build(corpus, {cfg.bm25.k1, cfg.bm25.b});

  ojson summary;
  summary["corpus_path"] = *cfg.wiki_corpus_path;
  summary["corpus_digest"] = file_digest_hex(*cfg.wiki_corpus_path);
  summary["passages"] = index.size();
  summary["terms"] = index.term_count();
  summary["average_doc_length"] = index.average_doc_length();
  summary["k1"] = cfg.bm25.k1;
  summary["b"] = cfg.bm25.b;
  summary["query_includes_options"] = cfg.bm25.query_includes_options;
  write_text(out_dir(cfg) / "wiki_index_summary.json", summary.dump(2) + "\n");

  ojson inputs = ojson::object();
  inputs[*cfg.wiki_corpus_path] = summary["corpus_digest"];
  ojson outputs = ojson::object();
  outputs["wiki_index_summary.json"] =
      file_digest_hex((out_dir(cfg) / "wiki_index_summary.json").string());
  ojson counts;
  counts["passages"] = index.size();
  write_manifest(cfg, "index-wiki", inputs, outputs, counts);
  log_line(cfg, "index-wiki",
           "indexed " + std::to_string(index.size()) + " passages, " +
               std::to_string(index.term_count()) + " terms");
  return kExitOk;
}

}  // namespace cotlab::pipeline
