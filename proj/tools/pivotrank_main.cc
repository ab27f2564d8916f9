// Copyright 2026 The Pivotrank Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command line front end: ranks TREC runs, runs synthetic experiments and
// evaluates run files.

#include <spdlog/spdlog.h>

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fmt/core.h"
#include "json.hpp"
#include "pivotrank/experiment.h"
#include "pivotrank/metrics.h"
#include "pivotrank/trec.h"

namespace pivotrank {
namespace {

// Flags shared by `rank` and `simulate`. Values are only applied when given
// on the command line so that a --config file supplies the rest.
struct CommonFlags {
  std::string config;
  int k = 10;
  int subset_size = 3;
  double lambda_mix = 2.0 / 3.0;
  double temperature = 4.0;
  double kappa = 1.0;
  double beta = 25.0 / 3.0;
  int max_rounds = 50;
  std::string ablation = "full";
  std::string judge = "sim";
  double gain = 3.0;
  double noise_std = 0.0;
  std::string transcript;
  std::string url;
  int timeout_ms = 60'000;
  std::vector<std::uint64_t> seeds{0};
  int workers = 1;
  int parallelism = 1;
  std::string out_dir;
  std::string transcript_out;
  bool trace = false;
  bool report_latency = false;
  std::string tag = "pivotrank";

  std::vector<CLI::Option*> options;
};

void AddCommonFlags(CLI::App& app, CommonFlags& f) {
  auto add = [&](CLI::Option* o) { f.options.push_back(o); };
  app.add_option("--config", f.config, "JSON experiment config")->check(CLI::ExistingFile);
  add(app.add_option("--k", f.k, "Top-k depth"));
  add(app.add_option("--subset-size", f.subset_size, "Passages per judge call"));
  add(app.add_option("--lambda-mix", f.lambda_mix, "Split mixing weight in [0, 1]"));
  add(app.add_option("--temperature", f.temperature, "Logit temperature"));
  add(app.add_option("--kappa", f.kappa, "Conservative score weight"));
  add(app.add_option("--beta", f.beta, "Performance noise scale"));
  add(app.add_option("--max-rounds", f.max_rounds, "Round cap per query"));
  add(app.add_option("--ablation", f.ablation,
                     "full|no_modeling|no_optimization|no_recursive|quickselect"));
  add(app.add_option("--judge", f.judge, "sim|replay|http"));
  add(app.add_option("--gain", f.gain, "Simulated judge gain"));
  add(app.add_option("--noise-std", f.noise_std, "Simulated judge noise"));
  add(app.add_option("--transcript", f.transcript, "Transcript to replay"));
  add(app.add_option("--url", f.url, "HTTP judge endpoint"));
  add(app.add_option("--timeout-ms", f.timeout_ms, "HTTP judge timeout"));
  add(app.add_option("--seed", f.seeds, "Seed(s); repeat for several"));
  add(app.add_option("--workers", f.workers, "Queries ranked concurrently"));
  add(app.add_option("--parallelism", f.parallelism, "Judge calls per round"));
  add(app.add_option("--out-dir", f.out_dir, "Directory for outputs"));
  add(app.add_option("--transcript-out", f.transcript_out, "Record judgments as JSONL"));
  add(app.add_flag("--trace", f.trace, "Write per-round trace.jsonl"));
  add(app.add_flag("--report-latency", f.report_latency, "Include latency in summary.json"));
  add(app.add_option("--tag", f.tag, "Run tag in run.txt"));
}

bool Given(const CommonFlags& f, const std::string& name) {
  for (const CLI::Option* o : f.options) {
    if (o->check_lname(name.substr(2)) && o->count() > 0) return true;
  }
  return false;
}

void ApplyCommonFlags(const CommonFlags& f, ExperimentConfig& c) {
  SchedulerConfig& s = c.scheduler;
  if (Given(f, "--k")) s.k = f.k;
  if (Given(f, "--subset-size")) s.subset_size = f.subset_size;
  if (Given(f, "--lambda-mix")) s.lambda_mix = f.lambda_mix;
  if (Given(f, "--temperature")) s.rating.temperature = f.temperature;
  if (Given(f, "--kappa")) s.rating.kappa = f.kappa;
  if (Given(f, "--beta")) s.rating.beta = f.beta;
  if (Given(f, "--max-rounds")) s.max_rounds = f.max_rounds;
  if (Given(f, "--parallelism")) s.parallelism = f.parallelism;
  try {
    if (Given(f, "--ablation")) c.ablation = ParseAblationMode(f.ablation);
  } catch (const std::exception& e) {
    throw ConfigError("ablation", e.what());
  }
  try {
    if (Given(f, "--judge")) c.judge.kind = ParseJudgeKind(f.judge);
  } catch (const std::exception& e) {
    throw ConfigError("judge.type", e.what());
  }
  if (Given(f, "--gain")) c.judge.gain = f.gain;
  if (Given(f, "--noise-std")) c.judge.noise_std = f.noise_std;
  if (Given(f, "--transcript")) c.judge.transcript = f.transcript;
  if (Given(f, "--url")) c.judge.url = f.url;
  if (Given(f, "--timeout-ms")) c.judge.timeout_ms = f.timeout_ms;
  if (Given(f, "--seed")) c.seeds = f.seeds;
  if (Given(f, "--workers")) c.workers = f.workers;
  if (Given(f, "--out-dir")) c.output_dir = f.out_dir;
  if (Given(f, "--transcript-out")) c.transcript_out = f.transcript_out;
  if (Given(f, "--trace")) c.trace = f.trace;
  if (Given(f, "--report-latency")) c.report_latency = f.report_latency;
  if (Given(f, "--tag")) c.run_tag = f.tag;
}

ExperimentConfig BaseConfig(const CommonFlags& f) {
  if (f.config.empty()) return ExperimentConfig{};
  return LoadExperimentConfig(f.config);
}

void Report(const ExperimentConfig& config, const ExperimentResult& result) {
  std::cout << SummaryJson(config, result) << "\n";
  if (result.failed > 0) {
    spdlog::warn("{} of {} queries failed", result.failed, result.outcomes.size());
    for (const QueryOutcome& q : result.outcomes) {
      if (!q.ok) spdlog::warn("  {}: {}", q.query_id, q.error);
    }
  }
}

int Finish(const ExperimentConfig& config, const ExperimentResult& result) {
  WriteExperimentOutputs(config, result);
  Report(config, result);
  if (!config.output_dir.empty()) spdlog::info("outputs written to {}", config.output_dir);
  return result.failed == static_cast<int>(result.outcomes.size()) ? 1 : 0;
}

int RunEval(const std::string& run_path, const std::string& qrels_path, int k) {
  const RunFile run = ParseRunFile(run_path);
  for (const ParseIssue& issue : run.issues) {
    spdlog::warn("{}:{}: {}", run_path, issue.line, issue.message);
  }
  const QrelsFile qrels = ParseQrelsFile(qrels_path);
  for (const ParseIssue& issue : qrels.issues) {
    spdlog::warn("{}:{}: {}", qrels_path, issue.line, issue.message);
  }
  nlohmann::ordered_json per_query = nlohmann::ordered_json::object();
  double total = 0.0;
  int evaluated = 0;
  for (const auto& [qid, records] : run.queries) {
    const auto judged = qrels.judgments.find(qid);
    if (judged == qrels.judgments.end()) continue;
    std::vector<std::string> ranking;
    ranking.reserve(records.size());
    for (const RunRecord& r : records) ranking.push_back(r.doc_id);
    const double ndcg = NdcgAtK(ranking, judged->second, k);
    per_query[qid] = ndcg;
    total += ndcg;
    ++evaluated;
  }
  nlohmann::ordered_json out;
  out["queries"] = evaluated;
  out[fmt::format("ndcg@{}", k)] = evaluated > 0 ? total / evaluated : 0.0;
  out["per_query"] = per_query;
  std::cout << out.dump(2) << "\n";
  return evaluated > 0 ? 0 : 1;
}

int Main(int argc, char** argv) {
  CLI::App app{"Uncertainty-aware setwise top-k re-ranking"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off");

  // rank: re-rank a TREC run with passages and queries from TSV files.
  CLI::App* rank = app.add_subcommand("rank", "Re-rank a TREC run");
  CommonFlags rank_flags;
  DataSettings data;
  AddCommonFlags(*rank, rank_flags);
  auto* run_opt = rank->add_option("--run", data.run, "First-stage TREC run");
  rank->add_option("--corpus", data.corpus, "TSV doc_id<TAB>text");
  rank->add_option("--queries", data.queries, "TSV query_id<TAB>text");
  rank->add_option("--qrels", data.qrels, "Optional qrels for scoring");
  rank->add_option("--top-n", data.top_n, "Candidates kept per query");
  rank->add_flag("--retrieval-prior", data.retrieval_prior,
                 "Seed prior means from run scores");

  // simulate: synthetic pools with a simulated or replayed judge.
  CLI::App* simulate = app.add_subcommand("simulate", "Run a synthetic experiment");
  CommonFlags sim_flags;
  SimulationConfig sim;
  std::string initial_order = "bm25";
  std::vector<double> sweep;
  AddCommonFlags(*simulate, sim_flags);
  auto* sim_queries = simulate->add_option("--queries", sim.num_queries, "Synthetic queries");
  auto* sim_pool = simulate->add_option("--pool-size", sim.pool_size, "Candidates per query");
  auto* sim_noise = simulate->add_option("--retrieval-noise", sim.retrieval_noise,
                                         "First-stage score noise");
  auto* sim_order = simulate->add_option("--initial-order", initial_order,
                                         "bm25|inverted|random");
  auto* sim_prior = simulate->add_flag("--retrieval-prior", sim.retrieval_prior,
                                       "Seed prior means from retrieval scores");
  simulate->add_option("--sweep-lambda", sweep, "Run once per lambda value")->delimiter(',');

  // eval: NDCG of an existing run.
  CLI::App* eval = app.add_subcommand("eval", "Score a TREC run against qrels");
  std::string eval_run;
  std::string eval_qrels;
  int eval_k = 10;
  eval->add_option("--run", eval_run, "TREC run")->required()->check(CLI::ExistingFile);
  eval->add_option("--qrels", eval_qrels, "TREC qrels")->required()->check(CLI::ExistingFile);
  eval->add_option("--k", eval_k, "Cut-off")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::from_str(log_level));
  spdlog::set_pattern("[%l] %v");

  try {
    if (*eval) return RunEval(eval_run, eval_qrels, eval_k);

    if (*rank) {
      ExperimentConfig config = BaseConfig(rank_flags);
      if (run_opt->count() > 0) {
        config.data = data;
      } else if (!config.data) {
        throw ConfigError("data.run", "rank needs --run or a config with a data section");
      }
      ApplyCommonFlags(rank_flags, config);
      config.Validate();
      return Finish(config, RunExperiment(config));
    }

    ExperimentConfig config = BaseConfig(sim_flags);
    config.data.reset();
    if (sim_queries->count()) config.simulation.num_queries = sim.num_queries;
    if (sim_pool->count()) config.simulation.pool_size = sim.pool_size;
    if (sim_noise->count()) config.simulation.retrieval_noise = sim.retrieval_noise;
    try {
      if (sim_order->count()) config.simulation.initial_order = ParseInitialOrder(initial_order);
    } catch (const std::exception& e) {
      throw ConfigError("simulation.initial_order", e.what());
    }
    if (sim_prior->count()) config.simulation.retrieval_prior = sim.retrieval_prior;
    ApplyCommonFlags(sim_flags, config);
    config.Validate();
    if (sweep.empty()) return Finish(config, RunExperiment(config));

    const std::vector<SweepRow> rows = SweepLambda(config, sweep);
    const std::string csv = SweepCsv(rows);
    if (!config.output_dir.empty()) {
      std::filesystem::create_directories(config.output_dir);
      std::ofstream(std::filesystem::path(config.output_dir) / "sweep.csv") << csv;
    }
    std::cout << csv;
    return 0;
  } catch (const ConfigError& e) {
    spdlog::error("config: {}", e.what());
    return 2;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
}

}  // namespace
}  // namespace pivotrank

int main(int argc, char** argv) { return pivotrank::Main(argc, argv); }
