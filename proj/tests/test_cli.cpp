#include <gtest/gtest.h>

#include "cli_support.hpp"
#include "fixtures.hpp"
#include "rauq/trace_io.hpp"

using namespace rauq;
using namespace rauq::testing;

namespace {

std::string synth(const TempDir& dir, const std::string& name, std::size_t n, const std::string& extra_flag = "",
                  const std::string& extra_value = "") {
  const auto path = dir.file(name);
  std::vector<std::string> args{"synth", "--n", std::to_string(n), "--seed", "7", "--signal", "0.9", "--out", path};
  if (!extra_flag.empty()) {
    args.push_back(extra_flag);
    args.push_back(extra_value);
  }
  const auto r = run_cli(args);
  EXPECT_EQ(r.code, 0) << r.err;
  return path;
}

std::string column(const std::string& csv, std::size_t col) {
  std::string out;
  for (const auto& line : lines(csv)) {
    std::size_t start = 0;
    for (std::size_t c = 0; c < col; ++c) start = line.find(',', start) + 1;
    out += line.substr(start, line.find(',', start) - start) + "\n";
  }
  return out;
}

}  // namespace

TEST(CliScore, RowsPerTraceAndMethod) {
  TempDir dir;
  const auto traces = synth(dir, "t.ndjson", 2);
  const auto r = run_cli({"score", "--traces", traces, "--methods", "rauq,msp,perplexity"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = lines(r.out);
  ASSERT_EQ(rows.size(), 7u);
  EXPECT_EQ(rows[0], "trace_id,method,uncertainty");
  EXPECT_EQ(rows[1].rfind("syn-000000,rauq,", 0), 0u);
  EXPECT_EQ(rows[3].rfind("syn-000000,perplexity,", 0), 0u);
  EXPECT_EQ(rows[4].rfind("syn-000001,rauq,", 0), 0u);
}

TEST(CliScore, EmptyFileGivesHeaderOnly) {
  TempDir dir;
  spit(dir.file("empty.ndjson"), "");
  const auto r = run_cli({"score", "--traces", dir.file("empty.ndjson")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "trace_id,method,uncertainty\n");
}

TEST(CliScore, CorruptLineIsReported) {
  TempDir dir;
  std::vector<GenerationTrace> traces(3, worked_trace());
  for (std::size_t i = 0; i < 3; ++i) traces[i].id = "w" + std::to_string(i);
  std::ostringstream s;
  write_traces(traces, s);
  spit(dir.file("bad.ndjson"), s.str() + "{\"id\": \"broken\", \"tokens\": [\n");
  const auto r = run_cli({"score", "--traces", dir.file("bad.ndjson")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("line 5"), std::string::npos) << r.err;
}

TEST(CliScore, GzipInput) {
  TempDir dir;
  const auto plain = synth(dir, "t.ndjson", 20);
  const auto gz = synth(dir, "t.ndjson.gz", 20);
  const auto a = run_cli({"score", "--traces", plain});
  const auto b = run_cli({"score", "--traces", gz});
  EXPECT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
}

TEST(CliScore, AlphaOneMatchesPerplexity) {
  TempDir dir;
  const auto traces = synth(dir, "t.ndjson", 200);
  const auto a = run_cli({"score", "--traces", traces, "--alpha", "1"});
  const auto b = run_cli({"score", "--traces", traces, "--methods", "perplexity"});
  EXPECT_EQ(column(a.out, 0), column(b.out, 0));
  EXPECT_EQ(column(a.out, 2), column(b.out, 2));
}

TEST(CliEval, OracleScoresGivePrrOne) {
  TempDir dir;
  spit(dir.file("s.csv"), "trace_id,method,uncertainty\na,m,0.1\nb,m,0.9\nc,m,0.2\nd,m,0.8\n");
  spit(dir.file("q.csv"), "trace_id,quality\na,1\nb,0\nc,1\nd,0\n");
  const auto r = run_cli({"eval", "--scores", dir.file("s.csv"), "--quality", dir.file("q.csv"), "--metrics",
                          "prr,roc_auc"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "method,n,prr,roc_auc\nm,4,1,1\n");
}

TEST(CliEval, SingleClassRocIsError) {
  TempDir dir;
  spit(dir.file("s.csv"), "trace_id,method,uncertainty\na,m,0.1\nb,m,0.9\n");
  spit(dir.file("q.csv"), "trace_id,quality\na,1\nb,0.9\n");
  const auto r = run_cli({"eval", "--scores", dir.file("s.csv"), "--quality", dir.file("q.csv"), "--metrics",
                          "roc_auc"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("single class"), std::string::npos) << r.err;
}

TEST(CliEval, MissingQualityNamesTrace) {
  TempDir dir;
  spit(dir.file("s.csv"), "trace_id,method,uncertainty\na,m,0.1\nghost,m,0.9\n");
  spit(dir.file("q.csv"), "trace_id,quality\na,1\n");
  const auto r = run_cli({"eval", "--scores", dir.file("s.csv"), "--quality", dir.file("q.csv")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("ghost"), std::string::npos) << r.err;
}

TEST(CliEval, TwoMethodsFromScoreOutput) {
  TempDir dir;
  const auto traces = synth(dir, "t.ndjson", 100);
  const auto scores = dir.file("scores.csv");
  ASSERT_EQ(run_cli({"score", "--traces", traces, "--methods", "rauq,msp", "--out", scores}).code, 0);
  const auto report = dir.file("report.csv");
  const auto r = run_cli({"eval", "--scores", scores, "--traces", traces, "--out", report});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = lines(slurp(report));
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1].rfind("rauq,100,", 0), 0u);
  EXPECT_EQ(rows[2].rfind("msp,100,", 0), 0u);
  // m = 0..50 plus the header.
  EXPECT_EQ(lines(slurp(dir.file("report.rauq.curve.csv"))).size(), 52u);

  const auto curves = dir.file("curves");
  ASSERT_EQ(run_cli({"eval", "--scores", scores, "--traces", traces, "--curves-dir", curves}).code, 0);
  EXPECT_TRUE(std::filesystem::exists(curves + "/msp.curve.csv"));
}

TEST(CliAblate, AlphaGrid) {
  TempDir dir;
  const auto traces = synth(dir, "t.ndjson", 200);
  const auto r = run_cli({"ablate", "--traces", traces, "--alphas", "0,0.2,1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = lines(r.out);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0], "alpha,token_agg,layer_agg,recurrence,prr");

  const auto scores = dir.file("ppl.csv");
  ASSERT_EQ(run_cli({"score", "--traces", traces, "--methods", "perplexity", "--out", scores}).code, 0);
  const auto e = run_cli({"eval", "--scores", scores, "--traces", traces});
  const auto ppl_prr = lines(e.out)[1].substr(lines(e.out)[1].rfind(',') + 1);
  EXPECT_EQ(rows[3], "1,mean_log,max,rauq," + ppl_prr);
}

TEST(CliAblate, SingletonGridAndFullGrid) {
  TempDir dir;
  const auto traces = synth(dir, "t.ndjson", 50);
  EXPECT_EQ(lines(run_cli({"ablate", "--traces", traces}).out).size(), 2u);
  const auto r = run_cli({"ablate", "--traces", traces, "--alphas", "0.2,0.5", "--token-aggs", "mean_log,median",
                          "--layer-aggs", "max,mean", "--recurrences", "rauq,no_attention,prob_times_attn"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(lines(r.out).size(), 25u);
  EXPECT_EQ(run_cli({"ablate", "--traces", traces, "--alphas", "2"}).code, 2);
}

TEST(CliAnalyze, Modes) {
  TempDir dir;
  const auto worked = dir.file("w.ndjson");
  write_trace_file(worked, std::vector<GenerationTrace>{worked_trace()});
  const auto hm = run_cli({"analyze", "--traces", worked, "--mode", "head-means"});
  ASSERT_EQ(hm.code, 0) << hm.err;
  EXPECT_EQ(lines(hm.out).size(), 3u);
  const double head1 = (double{0.2f} + double{0.9f}) / 2.0;
  EXPECT_EQ(lines(hm.out)[2], "worked,0,1," + format_number(head1) + ",2");

  auto unlabeled = worked_trace();
  unlabeled.quality.reset();
  write_trace_file(dir.file("u.ndjson"), std::vector<GenerationTrace>{unlabeled});
  EXPECT_EQ(run_cli({"analyze", "--traces", dir.file("u.ndjson"), "--mode", "contrast"}).code, 2);

  const auto traces = synth(dir, "t.ndjson", 100);
  EXPECT_EQ(run_cli({"analyze", "--traces", traces, "--mode", "kth", "--k-max", "3"}).code, 2);
  const auto kth = run_cli({"analyze", "--traces", traces, "--mode", "kth", "--k-max", "2"});
  ASSERT_EQ(kth.code, 0) << kth.err;
  EXPECT_EQ(lines(kth.out).size(), 9u);
  const auto contrast = run_cli({"analyze", "--traces", traces, "--mode", "contrast", "--layer", "1"});
  ASSERT_EQ(contrast.code, 0) << contrast.err;
  EXPECT_EQ(lines(contrast.out).size(), 3u);
  EXPECT_EQ(run_cli({"analyze", "--traces", traces, "--mode", "nope"}).code, 2);
}

TEST(CliValidate, Outcomes) {
  TempDir dir;
  const auto traces = synth(dir, "t.ndjson", 5);
  const auto ok = run_cli({"validate", "--traces", traces});
  EXPECT_EQ(ok.code, 0);
  EXPECT_EQ(ok.out, "ok n=5\n");

  spit(dir.file("empty.ndjson"), "");
  EXPECT_EQ(run_cli({"validate", "--traces", dir.file("empty.ndjson")}).out, "ok n=0\n");

  auto text = slurp(traces);
  text += "{\"id\":\"x\",\"tokens\":[\"a\"],\"probs\":[1.5],\"num_layers\":1,\"num_heads\":1,\"attn\":[[[[0.1]]]]}\n";
  spit(dir.file("bad.ndjson"), text);
  const auto bad = run_cli({"validate", "--traces", dir.file("bad.ndjson")});
  EXPECT_EQ(bad.code, 1);
  EXPECT_EQ(lines(bad.out)[0], "invalid n=6 valid=5 invalid=1");
  EXPECT_NE(bad.out.find("probs"), std::string::npos);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run_cli({"score", "--bogus"}).code, 2);
  EXPECT_EQ(run_cli({}).code, 2);
  EXPECT_EQ(run_cli({"score", "--traces", "/nonexistent/x.ndjson"}).code, 2);
  EXPECT_EQ(run_cli({"--help"}).code, 0);
}

TEST(Cli, DeterministicAcrossRunsAndJobs) {
  TempDir dir;
  const auto a = synth(dir, "a.ndjson", 300);
  const auto b = synth(dir, "b.ndjson", 300);
  EXPECT_EQ(slurp(a), slurp(b));
  const std::vector<std::string> score{"score", "--traces", a, "--methods",
                                       "rauq,msp,perplexity,attn_score_original,attn_score_gen_only,attn_score_gen_selected"};
  auto with_jobs = [](std::vector<std::string> v, const char* j) {
    v.push_back("--jobs");
    v.push_back(j);
    return v;
  };
  const auto s1 = run_cli(score).out;
  EXPECT_EQ(s1, run_cli(score).out);
  EXPECT_EQ(s1, run_cli(with_jobs(score, "4")).out);
  const std::vector<std::string> ablate{"ablate", "--traces", a, "--alphas", "0,0.5,1"};
  EXPECT_EQ(run_cli(ablate).out, run_cli(with_jobs(ablate, "3")).out);
}
