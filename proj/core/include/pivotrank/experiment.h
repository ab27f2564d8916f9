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

#ifndef PIVOTRANK_EXPERIMENT_H_
#define PIVOTRANK_EXPERIMENT_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pivotrank/metrics.h"
#include "pivotrank/scheduler.h"
#include "pivotrank/simulation.h"

namespace pivotrank {

// Configuration problem; the message starts with the offending field path,
// e.g. "scheduler.k: must be >= 1".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& message);
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class JudgeKind { kSimulated, kReplay, kHttp };

std::string_view ToString(JudgeKind kind);
JudgeKind ParseJudgeKind(std::string_view name);  // sim | replay | http

struct JudgeSettings {
  JudgeKind kind = JudgeKind::kSimulated;
  double gain = 3.0;
  double noise_std = 0.0;
  std::string transcript;  // replay input
  std::string url;         // http; falls back to REALM_JUDGE_URL
  int timeout_ms = 60'000;
  int max_in_flight = 4;
};

// TREC inputs. When absent the experiment runs on synthetic pools.
struct DataSettings {
  std::string run;
  std::string qrels;    // optional for ranking only
  std::string corpus;   // TSV doc_id<TAB>text
  std::string queries;  // TSV query_id<TAB>text
  std::size_t top_n = 100;
  // Map run scores into the prior means instead of starting every candidate
  // at N(mu0, sigma0^2).
  bool retrieval_prior = false;
};

struct ExperimentConfig {
  std::optional<DataSettings> data;
  SimulationConfig simulation;
  JudgeSettings judge;
  SchedulerConfig scheduler;
  AblationMode ablation = AblationMode::kFull;
  std::vector<std::uint64_t> seeds{0};
  int workers = 1;
  std::string output_dir;      // empty: write nothing
  std::string transcript_out;  // record judgments as JSONL
  bool trace = false;          // write per-round JSONL traces
  bool report_latency = false; // include latency in summary.json
  std::string run_tag = "pivotrank";

  // Throws ConfigError.
  void Validate() const;
};

// Parses the JSON config format documented in README.md. Throws ConfigError
// naming the field path on any invalid value.
ExperimentConfig ParseExperimentConfig(std::string_view json_text);
ExperimentConfig LoadExperimentConfig(const std::filesystem::path& path);

struct QueryOutcome {
  std::string query_id;
  bool ok = true;
  std::string error;
  double ndcg10 = 0.0;  // in [0, 1]
  std::optional<double> recall;
  std::int64_t inferences = 0;
  std::int64_t prompt_tokens = 0;
  int rounds = 0;
  double latency_seconds = 0.0;
  std::vector<RankedDoc> ranking;
  std::vector<RoundTrace> traces;
};

struct ExperimentResult {
  MetricsReport report;
  std::optional<double> recall_mean;
  int failed = 0;
  std::vector<QueryOutcome> outcomes;
};

// Ranks every query (concurrently up to `workers`) and aggregates metrics
// over the queries that succeeded. Failed queries are tallied, not fatal.
ExperimentResult RunExperiment(const ExperimentConfig& config);

// Output renderers. Summary and run text are deterministic for simulated and
// replayed judges; latency only appears in the summary when requested.
std::string SummaryJson(const ExperimentConfig& config,
                        const ExperimentResult& result);
// Columns: query_id,ndcg10,inferences,prompt_tokens,rounds,latency_s
// (ndcg10 in percent).
std::string PerQueryCsv(const ExperimentResult& result);
std::string RunText(const ExperimentConfig& config,
                    const ExperimentResult& result);

// Writes run.txt, per_query.csv, summary.json and, when enabled,
// trace.jsonl into config.output_dir.
void WriteExperimentOutputs(const ExperimentConfig& config,
                            const ExperimentResult& result);

// Loads, runs and writes outputs.
ExperimentResult RunExperimentFromFile(const std::filesystem::path& config_path);

struct SweepRow {
  double lambda_mix = 0.0;
  ExperimentResult result;
};

// One experiment per value with shared seeds.
std::vector<SweepRow> SweepLambda(const ExperimentConfig& config,
                                  std::span<const double> values);
// Columns: lambda_mix,ndcg10,inferences,prompt_tokens,rounds,latency_s
std::string SweepCsv(std::span<const SweepRow> rows);

}  // namespace pivotrank

#endif  // PIVOTRANK_EXPERIMENT_H_
