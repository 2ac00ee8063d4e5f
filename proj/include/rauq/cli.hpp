#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include <CLI11.hpp>

#include "rauq/analysis.hpp"
#include "rauq/baselines.hpp"
#include "rauq/config.hpp"
#include "rauq/core.hpp"
#include "rauq/csv.hpp"
#include "rauq/error.hpp"
#include "rauq/evaluation.hpp"
#include "rauq/format.hpp"
#include "rauq/synthetic.hpp"
#include "rauq/trace_io.hpp"

namespace rauq::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFindings = 1;
inline constexpr int kExitError = 2;

// Flags shared by every subcommand that scores traces.
struct ScoringFlags {
  double alpha = 0.2;
  std::string layers = "middle-third";
  std::string token_agg = "mean_log";
  std::string layer_agg = "max";
  std::string recurrence = "rauq";
  double log_floor = 1e-12;

  RauqConfig to_config() const {
    RauqConfig cfg;
    cfg.alpha = alpha;
    cfg.layers = LayerPolicy::parse(layers);
    cfg.token_agg = parse_token_agg(token_agg);
    cfg.layer_agg = parse_layer_agg(layer_agg);
    cfg.recurrence = parse_recurrence(recurrence);
    cfg.log_floor = log_floor;
    cfg.validate();
    return cfg;
  }
};

struct RunConfig {
  std::string traces;
  std::string out;
  std::string methods = "rauq";
  std::string metrics = "prr";
  double threshold = 0.5;
  std::string scores;
  std::string quality;
  std::string curves_dir;
  unsigned jobs = 1;
  ScoringFlags scoring;

  // ablate
  std::string alphas = "0.2";
  std::string token_aggs = "mean_log";
  std::string layer_aggs = "max";
  std::string recurrences = "rauq";

  // analyze
  std::string mode;
  std::optional<std::size_t> layer;
  std::string head_mode = "both";
  std::size_t k_max = 2;
  double lo = 0.1;
  double hi = 0.9;

  // synth
  std::size_t n = 100;
  std::uint64_t seed = 0;
  double signal = 0.9;
  std::optional<std::int64_t> prompt_len;
  double prob_slope = 0.05;
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(text);
  while (std::getline(in, cur, ',')) {
    cur.erase(0, cur.find_first_not_of(" \t"));
    cur.erase(cur.find_last_not_of(" \t") + 1);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

inline double parse_double(const std::string& s, const std::string& what) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw ConfigError("bad " + what + " \"" + s + "\"");
  return v;
}

// Output target: the named file, or the fallback stream when empty.
class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw IoError("cannot open " + path + " for writing");
      stream_ = file_.get();
    }
  }

  std::ostream& stream() { return *stream_; }

  void finish() {
    stream_->flush();
    if (!*stream_) throw IoError("write failure");
  }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return in;
}

// Runs body(i) for i in [0, n) on up to `jobs` threads. Rethrows the error
// of the lowest failing index so diagnostics do not depend on scheduling.
template <typename Body>
void parallel_for(std::size_t n, unsigned jobs, Body&& body) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, jobs), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t failed_at = n;
  std::exception_ptr failure;
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < failed_at) {
          failed_at = i;
          failure = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

inline std::vector<Method> parse_methods(const std::string& text) {
  std::vector<Method> methods;
  for (const auto& name : split_list(text)) methods.push_back(Method::parse(name));
  if (methods.empty()) throw ConfigError("at least one method is required");
  return methods;
}

inline std::unordered_map<std::string, double> read_quality_csv(const std::string& path) {
  auto in = open_input(path);
  const auto table = csv::Table::read(in, path);
  const auto id_col = table.column("trace_id");
  const auto q_col = table.column("quality");
  std::unordered_map<std::string, double> out;
  for (std::size_t r = 0; r < table.rows().size(); ++r) {
    const auto& row = table.rows()[r];
    double q = 0.0;
    try {
      q = parse_double(row[q_col], "quality");
    } catch (const ConfigError& e) {
      throw FormatError(table.line_of(r), path + ": " + e.what());
    }
    if (!out.emplace(row[id_col], q).second) {
      throw FormatError(table.line_of(r), path + ": duplicate trace_id \"" + row[id_col] + "\"");
    }
  }
  return out;
}

inline std::unordered_map<std::string, double> qualities_from_traces(std::span<const GenerationTrace> traces) {
  std::unordered_map<std::string, double> out;
  for (const auto& t : traces) {
    if (t.quality) out.emplace(t.id, *t.quality);
  }
  return out;
}

inline double lookup_quality(const std::unordered_map<std::string, double>& qualities, const std::string& id) {
  auto it = qualities.find(id);
  if (it == qualities.end()) throw ContractError("missing quality for trace_id \"" + id + "\"");
  return it->second;
}

inline std::string number(double v) { return std::isnan(v) ? std::string("nan") : format_number(v); }

inline std::string safe_file_name(const std::string& s) {
  std::string out = s;
  for (char& c : out) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) c = '_';
  }
  return out;
}

}  // namespace detail

inline int cmd_validate(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  auto in = detail::open_input(rc.traces);
  TraceReader reader(in);
  std::size_t valid = 0, invalid = 0;
  std::vector<std::string> diagnostics;
  for (;;) {
    try {
      if (!reader.next()) break;
      ++valid;
    } catch (const ValidationError& e) {
      ++invalid;
      if (diagnostics.size() < 10) diagnostics.push_back(e.what());
    } catch (const FormatError& e) {
      ++invalid;
      if (diagnostics.size() < 10) diagnostics.push_back(e.what());
    }
  }
  if (invalid == 0) {
    out << "ok n=" << valid << '\n';
    return kExitOk;
  }
  out << "invalid n=" << (valid + invalid) << " valid=" << valid << " invalid=" << invalid << '\n';
  for (const auto& d : diagnostics) out << d << '\n';
  err << "validation found " << invalid << " invalid record(s)\n";
  return kExitFindings;
}

inline int cmd_score(const RunConfig& rc, std::ostream& out, std::ostream&) {
  const RauqConfig cfg = rc.scoring.to_config();
  const auto methods = detail::parse_methods(rc.methods);
  auto in = detail::open_input(rc.traces);
  TraceReader reader(in);
  detail::Output output(rc.out, out);
  auto& os = output.stream();
  csv::write_row(os, {"trace_id", "method", "uncertainty"});

  constexpr std::size_t kBatch = 4096;
  std::vector<GenerationTrace> batch;
  std::vector<double> scores;
  bool done = false;
  while (!done) {
    batch.clear();
    while (batch.size() < kBatch) {
      auto t = reader.next();
      if (!t) {
        done = true;
        break;
      }
      batch.push_back(std::move(*t));
    }
    scores.assign(batch.size() * methods.size(), 0.0);
    detail::parallel_for(batch.size(), rc.jobs, [&](std::size_t i) {
      for (std::size_t m = 0; m < methods.size(); ++m) scores[i * methods.size() + m] = methods[m].score(batch[i], cfg);
    });
    for (std::size_t i = 0; i < batch.size(); ++i) {
      for (std::size_t m = 0; m < methods.size(); ++m) {
        csv::write_field(os, batch[i].id);
        os << ',' << methods[m].name() << ',' << detail::number(scores[i * methods.size() + m]) << '\n';
      }
    }
  }
  output.finish();
  return kExitOk;
}

inline int cmd_eval(const RunConfig& rc, std::ostream& out, std::ostream&) {
  bool want_prr = false, want_roc = false;
  for (const auto& m : detail::split_list(rc.metrics)) {
    if (m == "prr") {
      want_prr = true;
    } else if (m == "roc_auc" || m == "roc-auc") {
      want_roc = true;
    } else {
      throw ConfigError("unknown metric \"" + m + "\" (expected prr, roc_auc)");
    }
  }
  if (rc.quality.empty() && rc.traces.empty()) throw ConfigError("eval needs --quality or --traces for labels");

  auto scores_in = detail::open_input(rc.scores);
  const auto table = csv::Table::read(scores_in, rc.scores);
  const auto id_col = table.column("trace_id");
  const auto method_col = table.column("method");
  const auto u_col = table.column("uncertainty");

  const auto qualities = !rc.quality.empty() ? detail::read_quality_csv(rc.quality)
                                             : detail::qualities_from_traces(read_trace_file(rc.traces));

  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<ScoreRecord>> by_method;
  for (std::size_t r = 0; r < table.rows().size(); ++r) {
    const auto& row = table.rows()[r];
    ScoreRecord rec;
    rec.trace_id = row[id_col];
    rec.method = row[method_col];
    try {
      rec.uncertainty = detail::parse_double(row[u_col], "uncertainty");
    } catch (const ConfigError& e) {
      throw FormatError(table.line_of(r), rc.scores + ": " + e.what());
    }
    rec.quality = detail::lookup_quality(qualities, rec.trace_id);
    auto [it, inserted] = by_method.try_emplace(rec.method);
    if (inserted) order.push_back(rec.method);
    it->second.push_back(std::move(rec));
  }

  detail::Output output(rc.out, out);
  auto& os = output.stream();
  std::vector<std::string> header{"method", "n"};
  if (want_prr) header.push_back("prr");
  if (want_roc) header.push_back("roc_auc");
  csv::write_row(os, header);

  std::filesystem::path curve_base;
  if (!rc.curves_dir.empty()) {
    std::filesystem::create_directories(rc.curves_dir);
    curve_base = rc.curves_dir;
  } else if (!rc.out.empty()) {
    curve_base = std::filesystem::path(rc.out).parent_path();
  }

  for (const auto& method : order) {
    const auto& records = by_method[method];
    const EvalReport report = evaluate(records, want_roc ? std::optional<double>(rc.threshold) : std::nullopt);
    std::vector<std::string> row{method, std::to_string(report.n)};
    if (want_prr) row.push_back(detail::number(report.prr));
    if (want_roc) row.push_back(detail::number(*report.roc_auc));
    csv::write_row(os, row);

    if (rc.curves_dir.empty() && rc.out.empty()) continue;
    std::string name = detail::safe_file_name(method) + ".curve.csv";
    if (rc.curves_dir.empty()) name = std::filesystem::path(rc.out).stem().string() + "." + name;
    detail::Output curve_out((curve_base / name).string(), out);
    auto& cs = curve_out.stream();
    csv::write_row(cs, {"rejection_fraction", "mean_quality"});
    for (const auto& p : report.curve) cs << detail::number(p.rejection_fraction) << ',' << detail::number(p.mean_quality) << '\n';
    curve_out.finish();
  }
  output.finish();
  return kExitOk;
}

inline int cmd_ablate(const RunConfig& rc, std::ostream& out, std::ostream&) {
  const RauqConfig base = rc.scoring.to_config();
  std::vector<double> alphas;
  for (const auto& a : detail::split_list(rc.alphas)) alphas.push_back(detail::parse_double(a, "alpha"));
  std::vector<TokenAgg> token_aggs;
  for (const auto& s : detail::split_list(rc.token_aggs)) token_aggs.push_back(parse_token_agg(s));
  std::vector<LayerAgg> layer_aggs;
  for (const auto& s : detail::split_list(rc.layer_aggs)) layer_aggs.push_back(parse_layer_agg(s));
  std::vector<Recurrence> recurrences;
  for (const auto& s : detail::split_list(rc.recurrences)) recurrences.push_back(parse_recurrence(s));
  if (alphas.empty() || token_aggs.empty() || layer_aggs.empty() || recurrences.empty()) {
    throw ConfigError("ablation grid is empty");
  }
  std::vector<RauqConfig> grid;
  for (double alpha : alphas) {
    for (auto ta : token_aggs) {
      for (auto la : layer_aggs) {
        for (auto rec : recurrences) {
          RauqConfig cfg = base;
          cfg.alpha = alpha;
          cfg.token_agg = ta;
          cfg.layer_agg = la;
          cfg.recurrence = rec;
          cfg.validate();
          grid.push_back(cfg);
        }
      }
    }
  }

  const auto traces = read_trace_file(rc.traces);
  const auto qualities =
      !rc.quality.empty() ? detail::read_quality_csv(rc.quality) : detail::qualities_from_traces(traces);
  std::vector<ScoreRecord> records(traces.size());
  for (std::size_t i = 0; i < traces.size(); ++i) {
    records[i].trace_id = traces[i].id;
    records[i].method = "rauq";
    records[i].quality = detail::lookup_quality(qualities, traces[i].id);
  }

  detail::Output output(rc.out, out);
  auto& os = output.stream();
  csv::write_row(os, {"alpha", "token_agg", "layer_agg", "recurrence", "prr"});
  for (const auto& cfg : grid) {
    detail::parallel_for(traces.size(), rc.jobs,
                         [&](std::size_t i) { records[i].uncertainty = rauq_score(traces[i], cfg); });
    csv::write_row(os, {detail::number(cfg.alpha), to_string(cfg.token_agg), to_string(cfg.layer_agg),
                        to_string(cfg.recurrence), detail::number(prr(records))});
  }
  output.finish();
  return kExitOk;
}

inline int cmd_analyze(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  static const std::vector<std::string> kModes{"head-means", "contrast", "kth", "pairs", "dump"};
  if (std::find(kModes.begin(), kModes.end(), rc.mode) == kModes.end()) {
    throw ConfigError("unknown analysis mode \"" + rc.mode + "\" (expected head-means, contrast, kth, pairs, dump)");
  }
  std::vector<HeadMode> head_modes;
  if (rc.head_mode == "selected" || rc.head_mode == "both") head_modes.push_back(HeadMode::selected);
  if (rc.head_mode == "pooled" || rc.head_mode == "both") head_modes.push_back(HeadMode::pooled);
  if (head_modes.empty()) throw ConfigError("--head-mode must be selected, pooled or both");

  const auto traces = read_trace_file(rc.traces);
  std::size_t num_layers = 0;
  for (const auto& t : traces) num_layers = std::max(num_layers, t.num_layers);
  std::vector<std::size_t> layers;
  if (rc.layer) {
    layers.push_back(*rc.layer);
  } else {
    for (std::size_t l = 0; l < num_layers; ++l) layers.push_back(l);
  }

  detail::Output output(rc.out, out);
  auto& os = output.stream();
  const auto num = detail::number;

  if (rc.mode == "head-means") {
    csv::write_row(os, {"trace_id", "layer", "head", "mean", "token_count"});
    std::size_t skipped = 0;
    for (const auto& t : traces) {
      if (t.length() < 2) {
        ++skipped;
        continue;
      }
      for (auto l : layers) {
        const auto s = head_means(t, l);
        for (std::size_t h = 0; h < s.means.size(); ++h) {
          csv::write_field(os, t.id);
          os << ',' << l << ',' << h << ',' << num(s.means[h]) << ',' << s.token_count << '\n';
        }
      }
    }
    if (skipped) err << "skipped " << skipped << " single-token trace(s)\n";
  } else if (rc.mode == "contrast") {
    csv::write_row(os, {"layer", "head_mode", "mean_correct", "mean_incorrect", "diff", "n_correct", "n_incorrect"});
    for (auto mode : head_modes) {
      for (const auto& c : group_contrast(traces, layers, mode, rc.lo, rc.hi)) {
        os << c.layer << ',' << to_string(c.mode) << ',' << num(c.mean_correct) << ',' << num(c.mean_incorrect) << ','
           << num(c.diff) << ',' << c.n_correct << ',' << c.n_incorrect << '\n';
      }
    }
  } else if (rc.mode == "kth") {
    csv::write_row(os, {"layer", "k", "diff"});
    for (auto l : layers) {
      const auto diffs = kth_preceding_contrast(traces, l, rc.k_max, rc.lo, rc.hi);
      for (std::size_t k = 0; k < diffs.size(); ++k) os << l << ',' << (k + 1) << ',' << num(diffs[k]) << '\n';
    }
  } else if (rc.mode == "pairs") {
    csv::write_row(os, {"trace_id", "layer", "quality", "selected_mean"});
    for (auto l : layers) {
      for (const auto& p : quality_attention_pairs(traces, l)) {
        csv::write_field(os, p.trace_id);
        os << ',' << l << ',' << num(p.quality) << ',' << num(p.selected_mean) << '\n';
      }
    }
  } else {
    csv::write_row(os, {"trace_id", "layer", "head", "token", "offset", "value"});
    for (const auto& t : traces) {
      for (auto l : layers) {
        if (l >= t.num_layers) throw BoundsError("layer " + std::to_string(l) + " out of range");
        for (std::size_t h = 0; h < t.num_heads; ++h) {
          for (std::size_t i = 0; i < t.length(); ++i) {
            for (std::size_t k = 1; k <= t.k_window; ++k) {
              const float a = t.attention(l, h, i, k);
              if (a == kUndefinedAttention) continue;
              csv::write_field(os, t.id);
              os << ',' << l << ',' << h << ',' << i << ',' << k << ',' << num(a) << '\n';
            }
          }
        }
      }
    }
  }
  output.finish();
  return kExitOk;
}

inline int cmd_synth(const RunConfig& rc, std::ostream& out, std::ostream&) {
  SyntheticOptions opts;
  opts.prompt_len = rc.prompt_len;
  opts.prob_slope = rc.prob_slope;
  const auto traces = gen_synthetic(rc.n, rc.seed, rc.signal, opts);
  TraceFileHeader header;
  header.model_name = "synthetic";
  header.notes = "n=" + std::to_string(rc.n) + " seed=" + std::to_string(rc.seed) + " signal=" + format_number(rc.signal);
  if (rc.out.empty()) {
    write_traces(traces, out, header);
  } else {
    write_trace_file(rc.out, traces, header);
  }
  return kExitOk;
}

namespace detail {

inline void add_scoring_flags(CLI::App& cmd, ScoringFlags& f) {
  cmd.add_option("--alpha", f.alpha, "Weight of the token probability in the confidence update")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd.add_option("--layers", f.layers, "middle-third | all | comma-separated layer indices")->capture_default_str();
  cmd.add_option("--token-agg", f.token_agg, "mean_log | mean | median | sum_log")->capture_default_str();
  cmd.add_option("--layer-agg", f.layer_agg, "max | mean | median")->capture_default_str();
  cmd.add_option("--recurrence", f.recurrence, "rauq | no_attention | no_recurrence | prev_prob | prob_times_attn")
      ->capture_default_str();
  cmd.add_option("--log-floor", f.log_floor, "Confidence floor applied before logarithms")->capture_default_str();
}

inline void add_jobs_flag(CLI::App& cmd, unsigned& jobs) {
  cmd.add_option("--jobs", jobs, "Worker threads for scoring")->check(CLI::Range(1u, 1024u))->capture_default_str();
}

}  // namespace detail

// Entry point shared by the rauq binary and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Attention-based uncertainty scoring and rejection evaluation for LLM generation traces", "rauq"};
  app.require_subcommand(1);
  RunConfig rc;

  auto* validate = app.add_subcommand("validate", "Check a trace file against the schema");
  validate->add_option("--traces", rc.traces, "Trace file (NDJSON, optionally gzip)")->required();

  auto* score = app.add_subcommand("score", "Score every trace with the given methods");
  score->add_option("--traces", rc.traces, "Trace file (NDJSON, optionally gzip)")->required();
  score->add_option("--out", rc.out, "Scores CSV (default: stdout)");
  score->add_option("--methods", rc.methods,
                    "Comma list of rauq, msp, perplexity, attn_score_original, attn_score_gen_only, "
                    "attn_score_gen_selected")
      ->capture_default_str();
  detail::add_scoring_flags(*score, rc.scoring);
  detail::add_jobs_flag(*score, rc.jobs);

  auto* eval = app.add_subcommand("eval", "PRR / ROC-AUC of scores against quality labels");
  eval->add_option("--scores", rc.scores, "Scores CSV (trace_id, method, uncertainty)")->required();
  eval->add_option("--quality", rc.quality, "Quality CSV (trace_id, quality)");
  eval->add_option("--traces", rc.traces, "Take quality labels from this trace file instead");
  eval->add_option("--metrics", rc.metrics, "Comma list of prr, roc_auc")->capture_default_str();
  eval->add_option("--threshold", rc.threshold, "ROC-AUC positives are quality < threshold")->capture_default_str();
  eval->add_option("--out", rc.out, "Report CSV (default: stdout)");
  eval->add_option("--curves-dir", rc.curves_dir, "Directory for per-method rejection curve CSVs");

  auto* ablate = app.add_subcommand("ablate", "PRR over a grid of RAUQ configurations");
  ablate->add_option("--traces", rc.traces, "Trace file with quality labels")->required();
  ablate->add_option("--quality", rc.quality, "Quality CSV overriding labels in the traces");
  ablate->add_option("--alphas", rc.alphas, "Comma list of alpha values")->capture_default_str();
  ablate->add_option("--token-aggs", rc.token_aggs, "Comma list of token aggregations")->capture_default_str();
  ablate->add_option("--layer-aggs", rc.layer_aggs, "Comma list of layer aggregations")->capture_default_str();
  ablate->add_option("--recurrences", rc.recurrences, "Comma list of recurrence variants")->capture_default_str();
  ablate->add_option("--out", rc.out, "Ablation CSV (default: stdout)");
  detail::add_scoring_flags(*ablate, rc.scoring);
  detail::add_jobs_flag(*ablate, rc.jobs);

  auto* analyze = app.add_subcommand("analyze", "Attention diagnostics per layer and head");
  analyze->add_option("--traces", rc.traces, "Trace file")->required();
  analyze->add_option("--mode", rc.mode, "head-means | contrast | kth | pairs | dump")->required();
  analyze->add_option("--layer", rc.layer, "Restrict to one layer (default: all layers)");
  analyze->add_option("--head-mode", rc.head_mode, "contrast: selected | pooled | both")->capture_default_str();
  analyze->add_option("--k-max", rc.k_max, "kth: furthest preceding offset")->check(CLI::PositiveNumber)->capture_default_str();
  analyze->add_option("--lo", rc.lo, "Incorrect group: quality < lo")->capture_default_str();
  analyze->add_option("--hi", rc.hi, "Correct group: quality > hi")->capture_default_str();
  analyze->add_option("--out", rc.out, "Output CSV (default: stdout)");

  auto* synth = app.add_subcommand("synth", "Generate synthetic traces with a planted attention signal");
  synth->add_option("--n", rc.n, "Number of traces")->check(CLI::Range(std::size_t{2}, std::size_t{100000000}))->capture_default_str();
  synth->add_option("--seed", rc.seed, "Random seed")->capture_default_str();
  synth->add_option("--signal", rc.signal, "Planted signal strength in [0, 1]")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  synth->add_option("--prompt-len", rc.prompt_len, "Fixed prompt length (default: random 1..4)");
  synth->add_option("--prob-slope", rc.prob_slope, "Dependence of token probability on quality")->capture_default_str();
  synth->add_option("--out", rc.out, "Trace file (.gz compresses; default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (validate->parsed()) return cmd_validate(rc, out, err);
    if (score->parsed()) return cmd_score(rc, out, err);
    if (eval->parsed()) return cmd_eval(rc, out, err);
    if (ablate->parsed()) return cmd_ablate(rc, out, err);
    if (analyze->parsed()) return cmd_analyze(rc, out, err);
    if (synth->parsed()) return cmd_synth(rc, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("rauq");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace rauq::cli
