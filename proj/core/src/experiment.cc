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

#include "pivotrank/experiment.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <memory>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "json.hpp"
#include "pivotrank/http_judge.h"
#include "pivotrank/simulated_judge.h"
#include "pivotrank/transcript.h"
#include "pivotrank/trec.h"

namespace pivotrank {

using nlohmann::json;

ConfigError::ConfigError(const std::string& field, const std::string& message)
    : std::runtime_error(fmt::format("{}: {}", field, message)), field_(field) {}

std::string_view ToString(JudgeKind kind) {
  switch (kind) {
    case JudgeKind::kSimulated: return "sim";
    case JudgeKind::kReplay: return "replay";
    case JudgeKind::kHttp: return "http";
  }
  return "unknown";
}

JudgeKind ParseJudgeKind(std::string_view name) {
  for (JudgeKind kind : {JudgeKind::kSimulated, JudgeKind::kReplay, JudgeKind::kHttp}) {
    if (ToString(kind) == name) return kind;
  }
  throw InvalidArgument(fmt::format("unknown judge type '{}'", name));
}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

// Reads typed fields from one JSON object, tracking the dotted path and
// rejecting keys nobody asked for.
class FieldReader {
 public:
  FieldReader(const json& object, std::string path)
      : object_(object), path_(std::move(path)) {
    if (!object_.is_object()) throw ConfigError(Path(""), "expected an object");
  }

  std::string Path(std::string_view key) const {
    if (path_.empty()) return std::string(key);
    if (key.empty()) return path_;
    return fmt::format("{}.{}", path_, key);
  }

  bool Has(std::string_view key) {
    used_.insert(std::string(key));
    return object_.contains(std::string(key));
  }

  template <typename T>
  void Read(std::string_view key, T& out) {
    if (!Has(key)) return;
    try {
      out = object_.at(std::string(key)).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(Path(key), fmt::format("has the wrong type ({})",
                                               object_.at(std::string(key)).type_name()));
    }
  }

  FieldReader Child(std::string_view key) const {
    return FieldReader(object_.at(std::string(key)), Path(key));
  }

  void RejectUnknown() const {
    for (const auto& [key, value] : object_.items()) {
      if (!used_.contains(key)) throw ConfigError(Path(key), "unknown field");
    }
  }

 private:
  const json& object_;
  std::string path_;
  std::set<std::string> used_;
};

void ReadScheduler(FieldReader r, SchedulerConfig& s) {
  r.Read("k", s.k);
  r.Read("subset_size", s.subset_size);
  r.Read("lambda_mix", s.lambda_mix);
  r.Read("max_rounds", s.max_rounds);
  r.Read("parallelism", s.parallelism);
  r.Read("max_passages", s.max_passages);
  r.Read("mu0", s.rating.mu0);
  r.Read("sigma0", s.rating.sigma0);
  s.rating.beta = s.rating.mu0 / 3.0;
  r.Read("beta", s.rating.beta);
  r.Read("temperature", s.rating.temperature);
  r.Read("kappa", s.rating.kappa);
  r.RejectUnknown();
}

}  // namespace

void ExperimentConfig::Validate() const {
  const SchedulerConfig& s = scheduler;
  if (s.k < 1) throw ConfigError("scheduler.k", "must be >= 1");
  if (s.subset_size < 2) throw ConfigError("scheduler.subset_size", "must be >= 2");
  if (static_cast<std::size_t>(s.subset_size) > s.max_passages) {
    throw ConfigError("scheduler.subset_size", "exceeds scheduler.max_passages");
  }
  if (!(s.lambda_mix >= 0.0 && s.lambda_mix <= 1.0)) {
    throw ConfigError("scheduler.lambda_mix", "must lie in [0, 1]");
  }
  if (s.max_rounds < 1) throw ConfigError("scheduler.max_rounds", "must be >= 1");
  if (s.parallelism < 1) throw ConfigError("scheduler.parallelism", "must be >= 1");
  if (!(s.rating.sigma0 > 0.0)) throw ConfigError("scheduler.sigma0", "must be > 0");
  if (!(s.rating.beta > 0.0)) throw ConfigError("scheduler.beta", "must be > 0");
  if (!(s.rating.temperature > 0.0)) {
    throw ConfigError("scheduler.temperature", "must be > 0");
  }
  if (!(s.rating.kappa >= 0.0)) throw ConfigError("scheduler.kappa", "must be >= 0");
  if (seeds.empty()) throw ConfigError("seeds", "must list at least one seed");
  if (workers < 1) throw ConfigError("workers", "must be >= 1");
  if (!(judge.noise_std >= 0.0)) throw ConfigError("judge.noise_std", "must be >= 0");
  if (judge.kind == JudgeKind::kReplay && judge.transcript.empty()) {
    throw ConfigError("judge.transcript", "required for the replay judge");
  }
  if (judge.timeout_ms < 1) throw ConfigError("judge.timeout_ms", "must be >= 1");
  if (data) {
    if (data->run.empty()) throw ConfigError("data.run", "is required");
    if (data->queries.empty()) throw ConfigError("data.queries", "is required");
    if (data->corpus.empty()) throw ConfigError("data.corpus", "is required");
    if (data->top_n < 1) throw ConfigError("data.top_n", "must be >= 1");
    if (!transcript_out.empty() && seeds.size() > 1) {
      throw ConfigError("output.transcript",
                        "recording TREC data with several seeds would collide");
    }
  } else {
    if (simulation.num_queries < 1) {
      throw ConfigError("simulation.queries", "must be >= 1");
    }
    if (simulation.pool_size < 2) {
      throw ConfigError("simulation.pool_size", "must be >= 2");
    }
    if (simulation.pool_size < s.k) {
      throw ConfigError("simulation.pool_size", "must be >= scheduler.k");
    }
    if (simulation.passage_words < 0) {
      throw ConfigError("simulation.passage_words", "must be >= 0");
    }
  }
}

ExperimentConfig ParseExperimentConfig(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", fmt::format("invalid JSON: {}", e.what()));
  }
  ExperimentConfig config;
  FieldReader r(root, "");

  if (r.Has("judge")) {
    FieldReader j = r.Child("judge");
    std::string type = std::string(ToString(config.judge.kind));
    j.Read("type", type);
    try {
      config.judge.kind = ParseJudgeKind(type);
    } catch (const InvalidArgument& e) {
      throw ConfigError("judge.type", e.what());
    }
    j.Read("gain", config.judge.gain);
    j.Read("noise_std", config.judge.noise_std);
    j.Read("transcript", config.judge.transcript);
    j.Read("url", config.judge.url);
    j.Read("timeout_ms", config.judge.timeout_ms);
    j.Read("max_in_flight", config.judge.max_in_flight);
    j.RejectUnknown();
  }
  if (r.Has("data")) {
    FieldReader d = r.Child("data");
    DataSettings data;
    d.Read("run", data.run);
    d.Read("qrels", data.qrels);
    d.Read("corpus", data.corpus);
    d.Read("queries", data.queries);
    d.Read("top_n", data.top_n);
    d.Read("retrieval_prior", data.retrieval_prior);
    d.RejectUnknown();
    config.data = std::move(data);
  }
  if (r.Has("simulation")) {
    FieldReader s = r.Child("simulation");
    s.Read("queries", config.simulation.num_queries);
    s.Read("pool_size", config.simulation.pool_size);
    s.Read("retrieval_noise", config.simulation.retrieval_noise);
    s.Read("passage_words", config.simulation.passage_words);
    s.Read("retrieval_prior", config.simulation.retrieval_prior);
    std::string order = std::string(ToString(config.simulation.initial_order));
    s.Read("initial_order", order);
    try {
      config.simulation.initial_order = ParseInitialOrder(order);
    } catch (const InvalidArgument& e) {
      throw ConfigError("simulation.initial_order", e.what());
    }
    s.RejectUnknown();
  }
  if (r.Has("scheduler")) ReadScheduler(r.Child("scheduler"), config.scheduler);
  std::string ablation = std::string(ToString(config.ablation));
  r.Read("ablation", ablation);
  try {
    config.ablation = ParseAblationMode(ablation);
  } catch (const InvalidArgument& e) {
    throw ConfigError("ablation", e.what());
  }
  r.Read("seeds", config.seeds);
  r.Read("workers", config.workers);
  if (r.Has("output")) {
    FieldReader o = r.Child("output");
    o.Read("dir", config.output_dir);
    o.Read("transcript", config.transcript_out);
    o.Read("trace", config.trace);
    o.Read("report_latency", config.report_latency);
    o.Read("tag", config.run_tag);
    o.RejectUnknown();
  }
  r.RejectUnknown();
  config.Validate();
  return config;
}

ExperimentConfig LoadExperimentConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", fmt::format("cannot open {}", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseExperimentConfig(buffer.str());
}

// ---------------------------------------------------------------------------
// Running

namespace {

struct QueryJob {
  std::string query_id;
  std::string query;
  std::uint64_t seed = 0;
  std::vector<Candidate> candidates;
  std::map<std::string, int> qrels;
  std::unordered_map<std::string, double> truth;
  std::vector<std::string> true_top;  // empty for TREC data
};

std::vector<QueryJob> BuildSimulatedJobs(const ExperimentConfig& config) {
  std::vector<QueryJob> jobs;
  const bool tag_seed = config.seeds.size() > 1;
  for (std::uint64_t seed : config.seeds) {
    for (int i = 0; i < config.simulation.num_queries; ++i) {
      SyntheticQuery q = GenerateQuery(config.simulation, seed, i,
                                       config.scheduler.rating);
      QueryJob job;
      job.query_id = tag_seed ? fmt::format("s{}-{}", seed, q.query_id) : q.query_id;
      job.query = tag_seed ? fmt::format("{} (seed {})", q.query, seed) : q.query;
      job.seed = seed;
      job.candidates = std::move(q.candidates);
      job.qrels = std::move(q.qrels);
      job.true_top = TrueTopK(q.truth, config.scheduler.k);
      job.truth = std::move(q.truth);
      jobs.push_back(std::move(job));
    }
  }
  return jobs;
}

void LogIssues(std::string_view file, const std::vector<ParseIssue>& issues) {
  for (const ParseIssue& issue : issues) {
    if (issue.severity == ParseIssue::Severity::kError) {
      spdlog::error("{}:{}: {}", file, issue.line, issue.message);
    } else {
      spdlog::warn("{}: {}", file, issue.message);
    }
  }
}

std::vector<QueryJob> BuildDataJobs(const ExperimentConfig& config) {
  const DataSettings& data = *config.data;
  const RunFile run = ParseRunFile(data.run, data.top_n);
  LogIssues(data.run, run.issues);
  Qrels qrels;
  if (!data.qrels.empty()) {
    QrelsFile parsed = ParseQrelsFile(data.qrels);
    LogIssues(data.qrels, parsed.issues);
    qrels = std::move(parsed.judgments);
  }
  const auto queries = ParseTsvFile(data.queries);
  const auto corpus = ParseTsvFile(data.corpus);

  std::vector<QueryJob> jobs;
  const bool tag_seed = config.seeds.size() > 1;
  for (std::uint64_t seed : config.seeds) {
    for (const auto& [qid, records] : run.queries) {
      if (!data.qrels.empty() && !qrels.contains(qid)) {
        spdlog::warn("query {} has no relevance judgments; skipped", qid);
        continue;
      }
      QueryJob job;
      job.query_id = tag_seed ? fmt::format("s{}-{}", seed, qid) : qid;
      job.seed = seed;
      if (const auto it = queries.find(qid); it != queries.end()) {
        job.query = it->second;
      } else {
        spdlog::error("query {} has no text in {}", qid, data.queries);
      }
      if (const auto it = qrels.find(qid); it != qrels.end()) job.qrels = it->second;
      for (const RunRecord& record : records) {
        Candidate c;
        c.doc_id = record.doc_id;
        if (const auto it = corpus.find(record.doc_id); it != corpus.end()) {
          c.text = it->second;
        } else {
          spdlog::warn("document {} missing from corpus", record.doc_id);
        }
        if (data.retrieval_prior) c.retrieval_score = record.score;
        const auto grade = job.qrels.find(record.doc_id);
        job.truth.emplace(record.doc_id,
                          grade == job.qrels.end() ? 0.0 : grade->second);
        job.candidates.push_back(std::move(c));
      }
      InitializeBeliefs(job.candidates, config.scheduler.rating);
      jobs.push_back(std::move(job));
    }
  }
  return jobs;
}

class JudgeFactory {
 public:
  explicit JudgeFactory(const ExperimentConfig& config) : config_(config) {
    if (!config.transcript_out.empty()) {
      writer_ = std::make_shared<TranscriptWriter>();
    }
    switch (config.judge.kind) {
      case JudgeKind::kSimulated: break;
      case JudgeKind::kReplay:
        shared_ = std::make_shared<ReplayJudge>(std::make_shared<ReplayCache>(
            ReplayCache::Load(config.judge.transcript)));
        break;
      case JudgeKind::kHttp: {
        HttpJudgeConfig http;
        http.url = config.judge.url;
        http.timeout = std::chrono::milliseconds(config.judge.timeout_ms);
        http.max_in_flight = config.judge.max_in_flight;
        http.max_passages = config.scheduler.max_passages;
        http = HttpJudgeConfig::FromEnvironment(http);
        if (http.url.empty()) {
          throw ConfigError("judge.url", "required (or set REALM_JUDGE_URL)");
        }
        shared_ = std::make_shared<HttpJudge>(http);
        break;
      }
    }
  }

  std::shared_ptr<Judge> ForJob(const QueryJob& job) const {
    std::shared_ptr<Judge> judge = shared_;
    if (!judge) {
      judge = std::make_shared<SimulatedJudge>(
          job.truth, SimulatedJudgeOptions{config_.judge.gain,
                                           config_.judge.noise_std, job.seed});
    }
    if (writer_) judge = std::make_shared<RecordingJudge>(judge, writer_);
    return judge;
  }

  const std::shared_ptr<TranscriptWriter>& writer() const { return writer_; }

 private:
  const ExperimentConfig& config_;
  std::shared_ptr<Judge> shared_;
  std::shared_ptr<TranscriptWriter> writer_;
};

QueryOutcome RunJob(const QueryJob& job, const ExperimentConfig& config,
                    const JudgeFactory& judges) {
  QueryOutcome outcome;
  outcome.query_id = job.query_id;
  try {
    RankingTask task;
    task.query_id = job.query_id;
    task.query = job.query;
    task.candidates = job.candidates;
    task.config = config.scheduler;
    task.config.seed = job.seed;
    task.config.on_round = nullptr;
    const std::shared_ptr<Judge> judge = judges.ForJob(job);

    const auto start = std::chrono::steady_clock::now();
    RankingResult result = RankAblation(task, *judge, config.ablation);
    outcome.latency_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::vector<std::string> ids;
    for (const RankedDoc& d : result.ranking) ids.push_back(d.doc_id);
    outcome.ndcg10 = NdcgAtK(ids, job.qrels, 10);
    if (!job.true_top.empty()) outcome.recall = TopKRecall(ids, job.true_top);
    outcome.inferences = result.inference_count;
    outcome.prompt_tokens = result.prompt_tokens;
    outcome.rounds = result.rounds;
    outcome.ranking = std::move(result.ranking);
    if (config.trace) outcome.traces = std::move(result.traces);
  } catch (const std::exception& e) {
    outcome.ok = false;
    outcome.error = e.what();
    spdlog::error("query {} failed: {}", job.query_id, e.what());
  }
  return outcome;
}

double Mean(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

}  // namespace

ExperimentResult RunExperiment(const ExperimentConfig& config) {
  config.Validate();
  const std::vector<QueryJob> jobs =
      config.data ? BuildDataJobs(config) : BuildSimulatedJobs(config);
  const JudgeFactory judges(config);

  ExperimentResult result;
  result.outcomes.resize(jobs.size());
  {
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      for (std::size_t i = next++; i < jobs.size(); i = next++) {
        result.outcomes[i] = RunJob(jobs[i], config, judges);
      }
    };
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(config.workers),
                              std::max<std::size_t>(jobs.size(), 1));
    if (workers <= 1) {
      work();
    } else {
      std::vector<std::jthread> threads;
      for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(work);
    }
  }

  std::vector<double> ndcg, inferences, tokens, rounds, latency, recall;
  for (const QueryOutcome& o : result.outcomes) {
    if (!o.ok) {
      ++result.failed;
      continue;
    }
    ndcg.push_back(o.ndcg10);
    inferences.push_back(static_cast<double>(o.inferences));
    tokens.push_back(static_cast<double>(o.prompt_tokens));
    rounds.push_back(o.rounds);
    latency.push_back(o.latency_seconds);
    if (o.recall) recall.push_back(*o.recall);
  }
  result.report = {Mean(ndcg), Mean(inferences), Mean(tokens), Mean(rounds),
                   Mean(latency)};
  if (!recall.empty()) result.recall_mean = Mean(recall);

  if (judges.writer()) judges.writer()->Save(config.transcript_out);
  return result;
}

// ---------------------------------------------------------------------------
// Output

std::string SummaryJson(const ExperimentConfig& config,
                        const ExperimentResult& result) {
  json summary;
  summary["ablation"] = ToString(config.ablation);
  summary["k"] = config.scheduler.k;
  summary["subset_size"] = config.scheduler.subset_size;
  summary["lambda_mix"] = config.scheduler.lambda_mix;
  summary["temperature"] = config.scheduler.rating.temperature;
  summary["kappa"] = config.scheduler.rating.kappa;
  summary["queries"] = result.outcomes.size();
  summary["failed"] = result.failed;
  summary["ndcg_at_10"] = 100.0 * result.report.ndcg_at_10;
  summary["inference_count_mean"] = result.report.inference_count_mean;
  summary["prompt_tokens_mean"] = result.report.prompt_tokens_mean;
  summary["rounds_mean"] = result.report.rounds_mean;
  if (result.recall_mean) summary["recall_at_k_mean"] = *result.recall_mean;
  if (config.report_latency) {
    summary["latency_seconds_mean"] = result.report.latency_seconds_mean;
  }
  return summary.dump(2) + "\n";
}

std::string PerQueryCsv(const ExperimentResult& result) {
  std::string out = "query_id,ndcg10,inferences,prompt_tokens,rounds,latency_s\n";
  for (const QueryOutcome& o : result.outcomes) {
    if (!o.ok) continue;
    out += fmt::format("{},{},{},{},{},{}\n", o.query_id, 100.0 * o.ndcg10,
                       o.inferences, o.prompt_tokens, o.rounds, o.latency_seconds);
  }
  return out;
}

std::string RunText(const ExperimentConfig& config,
                    const ExperimentResult& result) {
  std::ostringstream out;
  for (const QueryOutcome& o : result.outcomes) {
    if (!o.ok) continue;
    std::vector<RunRecord> records;
    for (std::size_t i = 0; i < o.ranking.size(); ++i) {
      records.push_back({o.query_id, o.ranking[i].doc_id, static_cast<int>(i + 1),
                         o.ranking[i].score, config.run_tag});
    }
    WriteRunRecords(out, records);
  }
  return out.str();
}

namespace {

void WriteFile(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  out << content;
}

}  // namespace

void WriteExperimentOutputs(const ExperimentConfig& config,
                            const ExperimentResult& result) {
  if (config.output_dir.empty()) return;
  const std::filesystem::path dir(config.output_dir);
  std::filesystem::create_directories(dir);
  WriteFile(dir / "run.txt", RunText(config, result));
  WriteFile(dir / "per_query.csv", PerQueryCsv(result));
  WriteFile(dir / "summary.json", SummaryJson(config, result));
  if (config.trace) {
    std::string traces;
    for (const QueryOutcome& o : result.outcomes) {
      for (const RoundTrace& t : o.traces) traces += ToJsonLine(t, o.query_id) + "\n";
    }
    WriteFile(dir / "trace.jsonl", traces);
  }
}

ExperimentResult RunExperimentFromFile(const std::filesystem::path& config_path) {
  const ExperimentConfig config = LoadExperimentConfig(config_path);
  ExperimentResult result = RunExperiment(config);
  WriteExperimentOutputs(config, result);
  return result;
}

std::vector<SweepRow> SweepLambda(const ExperimentConfig& config,
                                  std::span<const double> values) {
  std::vector<SweepRow> rows;
  for (double value : values) {
    if (!(value >= 0.0 && value <= 1.0)) {
      throw ConfigError("sweep", fmt::format("lambda_mix {} outside [0, 1]", value));
    }
    ExperimentConfig run = config;
    run.scheduler.lambda_mix = value;
    rows.push_back({value, RunExperiment(run)});
  }
  return rows;
}

std::string SweepCsv(std::span<const SweepRow> rows) {
  std::string out = "lambda_mix,ndcg10,inferences,prompt_tokens,rounds,latency_s\n";
  for (const SweepRow& row : rows) {
    const MetricsReport& m = row.result.report;
    out += fmt::format("{},{},{},{},{},{}\n", row.lambda_mix, 100.0 * m.ndcg_at_10,
                       m.inference_count_mean, m.prompt_tokens_mean, m.rounds_mean,
                       m.latency_seconds_mean);
  }
  return out;
}

}  // namespace pivotrank
