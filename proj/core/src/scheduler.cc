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

#include "pivotrank/scheduler.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <set>
#include <thread>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "json.hpp"
#include "pivotrank/relevance.h"

namespace pivotrank {
namespace {

JudgeRequest MakeRequest(std::span<const Candidate> pool,
                         std::span<const std::size_t> members,
                         std::string_view query) {
  JudgeRequest request;
  request.query = std::string(query);
  for (std::size_t i = 0; i < members.size(); ++i) {
    const Candidate& c = pool[members[i]];
    request.passages.push_back({OptionLabel(i), c.doc_id, c.text});
  }
  return request;
}

SetwiseJudgment JudgeSubset(Judge& judge, const JudgeRequest& request) {
  try {
    SetwiseJudgment judgment = judge.Evaluate(request);
    if (judgment.scores.size() != request.passages.size()) {
      throw JudgeMalformedResponse(
          fmt::format("judge returned {} scores for {} passages",
                      judgment.scores.size(), request.passages.size()));
    }
    judgment.Validate();
    return judgment;
  } catch (const std::exception& e) {
    std::vector<std::string> labels;
    for (const Passage& p : request.passages) labels.push_back(p.label);
    std::throw_with_nested(
        SubsetJudgeFailure(e.what(), std::move(labels), request.doc_ids()));
  }
}

// Judges all requests with up to `parallelism` calls in flight. Results are
// positional; the first failing subset (by index) is rethrown.
std::vector<SetwiseJudgment> JudgeAll(Judge& judge,
                                      const std::vector<JudgeRequest>& requests,
                                      int parallelism) {
  std::vector<SetwiseJudgment> results(requests.size());
  if (parallelism <= 1 || requests.size() <= 1) {
    for (std::size_t i = 0; i < requests.size(); ++i) {
      results[i] = JudgeSubset(judge, requests[i]);
    }
    return results;
  }
  std::vector<std::exception_ptr> errors(requests.size());
  std::atomic<std::size_t> next{0};
  {
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(parallelism), requests.size());
    std::vector<std::jthread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      threads.emplace_back([&] {
        for (std::size_t i = next++; i < requests.size(); i = next++) {
          try {
            results[i] = JudgeSubset(judge, requests[i]);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (const std::exception_ptr& error : errors) {
    if (error) std::rethrow_exception(error);
  }
  return results;
}

std::vector<Candidate> Reorder(std::span<const Candidate> pool,
                               std::span<const std::size_t> order,
                               std::size_t count) {
  std::vector<Candidate> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(pool[order[i]]);
  return out;
}

void CheckUniqueIds(std::span<const Candidate> pool) {
  std::set<std::string_view> seen;
  for (const Candidate& c : pool) {
    if (!seen.insert(c.doc_id).second) {
      throw InvalidArgument(fmt::format("duplicate doc id '{}' in pool", c.doc_id));
    }
  }
}

void Accumulate(RankingResult& result, RoundTrace trace,
                const SchedulerConfig& config) {
  result.inference_count += trace.inference_count;
  result.prompt_tokens += trace.prompt_token_count;
  ++result.rounds;
  if (config.on_round) config.on_round(trace);
  result.traces.push_back(std::move(trace));
}

RankingResult FinalizeByScore(RankingResult result,
                              std::span<const Candidate> pool, std::size_t k,
                              double kappa) {
  const std::vector<std::size_t> order = ConservativeOrder(pool, kappa);
  for (std::size_t i = 0; i < std::min(k, order.size()); ++i) {
    const Candidate& c = pool[order[i]];
    result.ranking.push_back({c.doc_id, ConservativeScore(c.belief, kappa)});
  }
  return result;
}

// Recursive pivot reduction shared by the full and no_optimization modes.
RankingResult RankRecursive(const RankingTask& task, Judge& judge,
                            bool optimize) {
  const SchedulerConfig& config = task.config;
  const double kappa = config.rating.kappa;
  const std::size_t k = static_cast<std::size_t>(config.k);
  std::vector<Candidate> pool = task.candidates;
  RankingResult result;

  const double lambda_mix = optimize ? config.lambda_mix : 1.0;
  while (pool.size() > k && result.rounds < config.max_rounds &&
         pool.size() >= 2) {
    const std::size_t pivot = optimize ? SelectPivot(pool) : 0;
    const std::string pivot_id = pool[pivot].doc_id;
    RoundTrace trace = RunRound(pool, pivot, task.query, config, judge,
                                {.aggregate_pivot = optimize});
    trace.round_index = result.rounds;

    const std::vector<std::size_t> order = ConservativeOrder(pool, kappa);
    const auto pivot_pos = std::find(order.begin(), order.end(), pivot);
    const int pivot_rank = static_cast<int>(pivot_pos - order.begin());
    const int split =
        SplitIndex(pivot_rank, 0, static_cast<int>(pool.size()), lambda_mix);
    const std::size_t keep = std::max(static_cast<std::size_t>(split), k);

    trace.split_index = split;
    trace.retained_count = static_cast<int>(keep);
    pool = Reorder(pool, order, keep);
    Accumulate(result, std::move(trace), config);
  }
  return FinalizeByScore(std::move(result), pool, k, kappa);
}

RankingResult RankSingleRound(const RankingTask& task, Judge& judge) {
  const SchedulerConfig& config = task.config;
  std::vector<Candidate> pool = task.candidates;
  RankingResult result;
  if (pool.size() > static_cast<std::size_t>(config.k)) {
    const std::size_t pivot = SelectPivot(pool);
    RoundTrace trace = RunRound(pool, pivot, task.query, config, judge);
    trace.split_index = config.k;
    trace.retained_count = config.k;
    Accumulate(result, std::move(trace), config);
  }
  return FinalizeByScore(std::move(result), pool,
                         static_cast<std::size_t>(config.k), config.rating.kappa);
}

// Quickselect for the top-k over hardened comparisons: an option beats the
// pivot iff its logit is strictly greater. The pivot is the middle element
// of the working list, which keeps the retrieval order.
RankingResult RankQuickselect(const RankingTask& task, Judge& judge) {
  const SchedulerConfig& config = task.config;
  std::span<const Candidate> pool = task.candidates;
  std::vector<std::size_t> work(pool.size());
  for (std::size_t i = 0; i < work.size(); ++i) work[i] = i;
  std::vector<std::size_t> selected;
  std::size_t need = static_cast<std::size_t>(config.k);
  RankingResult result;

  while (need > 0 && !work.empty()) {
    if (work.size() <= need || result.rounds >= config.max_rounds) {
      const std::size_t take = std::min(need, work.size());
      selected.insert(selected.end(), work.begin(), work.begin() + take);
      break;
    }
    const std::size_t pivot_pos = (work.size() - 1) / 2;
    const std::size_t pivot = work[pivot_pos];
    std::vector<std::size_t> others;
    for (std::size_t i = 0; i < work.size(); ++i) {
      if (i != pivot_pos) others.push_back(work[i]);
    }

    RoundTrace trace;
    trace.round_index = result.rounds;
    trace.pivot_id = pool[pivot].doc_id;
    trace.pool_size = static_cast<int>(work.size());
    const std::size_t chunk = static_cast<std::size_t>(config.subset_size - 1);
    std::vector<std::vector<std::size_t>> groups;
    std::vector<JudgeRequest> requests;
    for (std::size_t start = 0; start < others.size(); start += chunk) {
      std::vector<std::size_t> group{pivot};
      for (std::size_t i = start; i < std::min(others.size(), start + chunk); ++i) {
        group.push_back(others[i]);
      }
      requests.push_back(MakeRequest(pool, group, task.query));
      trace.subsets.push_back(requests.back().doc_ids());
      groups.push_back(std::move(group));
    }
    trace.judgments = JudgeAll(judge, requests, config.parallelism);

    std::vector<std::size_t> winners;
    std::vector<std::size_t> losers;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const SetwiseJudgment& j = trace.judgments[g];
      trace.prompt_token_count += j.token_estimate;
      for (std::size_t t = 1; t < groups[g].size(); ++t) {
        (j.scores[t] > j.scores[0] ? winners : losers).push_back(groups[g][t]);
      }
    }
    trace.inference_count = static_cast<int>(groups.size());

    if (winners.size() >= need) {
      work = std::move(winners);
    } else {
      selected.insert(selected.end(), winners.begin(), winners.end());
      selected.push_back(pivot);
      need -= winners.size() + 1;
      work = std::move(losers);
    }
    trace.split_index = static_cast<int>(selected.size());
    trace.retained_count = static_cast<int>(work.size());
    Accumulate(result, std::move(trace), config);
  }

  // Acceptance order is a valid coarse ranking; express it as a rank score.
  const double n = static_cast<double>(selected.size());
  for (std::size_t i = 0; i < selected.size(); ++i) {
    result.ranking.push_back({pool[selected[i]].doc_id, n - static_cast<double>(i)});
  }
  return result;
}

}  // namespace

void InitializeBeliefs(std::span<Candidate> pool, const RatingConfig& rating) {
  std::optional<ScoreRange> range;
  for (const Candidate& c : pool) {
    if (!c.retrieval_score) continue;
    if (!range) {
      range = ScoreRange{*c.retrieval_score, *c.retrieval_score};
    } else {
      range->min = std::min(range->min, *c.retrieval_score);
      range->max = std::max(range->max, *c.retrieval_score);
    }
  }
  for (Candidate& c : pool) c.belief = InitialBelief(c.retrieval_score, range, rating);
}

std::string_view ToString(AblationMode mode) {
  switch (mode) {
    case AblationMode::kFull: return "full";
    case AblationMode::kNoModeling: return "no_modeling";
    case AblationMode::kNoRecursive: return "no_recursive";
    case AblationMode::kNoOptimization: return "no_optimization";
  }
  return "unknown";
}

AblationMode ParseAblationMode(std::string_view name) {
  for (AblationMode mode :
       {AblationMode::kFull, AblationMode::kNoModeling,
        AblationMode::kNoRecursive, AblationMode::kNoOptimization}) {
    if (ToString(mode) == name) return mode;
  }
  throw InvalidArgument(fmt::format("unknown ablation mode '{}'", name));
}

std::string ToJsonLine(const RoundTrace& trace, std::string_view query_id) {
  nlohmann::json row;
  row["query_id"] = query_id;
  row["round"] = trace.round_index;
  row["pivot"] = trace.pivot_id;
  row["pool_size"] = trace.pool_size;
  row["subsets"] = trace.subsets;
  nlohmann::json scores = nlohmann::json::array();
  int retries = 0;
  for (const SetwiseJudgment& j : trace.judgments) {
    scores.push_back(j.scores);
    retries += j.retry_count;
  }
  row["scores"] = std::move(scores);
  row["retries"] = retries;
  row["split_index"] = trace.split_index;
  row["retained"] = trace.retained_count;
  row["inferences"] = trace.inference_count;
  row["prompt_tokens"] = trace.prompt_token_count;
  return row.dump();
}

void SchedulerConfig::Validate(std::size_t pool_size) const {
  rating.Validate();
  if (k < 1) throw InvalidArgument(fmt::format("k must be >= 1, got {}", k));
  if (static_cast<std::size_t>(k) > pool_size) {
    throw InvalidArgument(
        fmt::format("k={} exceeds the pool size {}", k, pool_size));
  }
  if (subset_size < 2) {
    throw InvalidArgument(fmt::format("subset_size must be >= 2, got {}", subset_size));
  }
  if (static_cast<std::size_t>(subset_size) > max_passages) {
    throw InvalidArgument(fmt::format("subset_size {} exceeds the passage limit {}",
                                      subset_size, max_passages));
  }
  if (!(lambda_mix >= 0.0 && lambda_mix <= 1.0)) {
    throw InvalidArgument(fmt::format("lambda_mix must lie in [0, 1], got {}", lambda_mix));
  }
  if (max_rounds < 1) {
    throw InvalidArgument(fmt::format("max_rounds must be >= 1, got {}", max_rounds));
  }
}

SubsetJudgeFailure::SubsetJudgeFailure(const std::string& cause,
                                       std::vector<std::string> labels,
                                       std::vector<std::string> doc_ids)
    : JudgeError(fmt::format("judging subset [{}] (labels [{}]) failed: {}",
                             fmt::join(doc_ids, ", "), fmt::join(labels, ", "),
                             cause)),
      labels_(std::move(labels)),
      doc_ids_(std::move(doc_ids)) {}

std::size_t SelectPivot(std::span<const Candidate> pool) {
  if (pool.empty()) throw InvalidArgument("cannot select a pivot from an empty pool");
  double min_sigma = pool[0].belief.sigma();
  for (const Candidate& c : pool) min_sigma = std::min(min_sigma, c.belief.sigma());

  std::vector<std::size_t> tied;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (pool[i].belief.sigma() == min_sigma) tied.push_back(i);
  }
  if (tied.size() == 1) return tied.front();

  std::vector<double> mus;
  for (std::size_t i : tied) mus.push_back(pool[i].belief.mu());
  const std::size_t mid = (mus.size() - 1) / 2;
  std::nth_element(mus.begin(), mus.begin() + mid, mus.end());
  const double median = mus[mid];
  std::vector<std::size_t> at_median;
  for (std::size_t i : tied) {
    if (pool[i].belief.mu() == median) at_median.push_back(i);
  }
  // Several candidates at the median (e.g. a fresh pool): take the middle
  // one by pool position so the first pivot does not depend on which end of
  // the input order is best.
  return at_median[(at_median.size() - 1) / 2];
}

std::vector<std::size_t> ConservativeOrder(std::span<const Candidate> pool,
                                           double kappa) {
  std::vector<double> scores;
  scores.reserve(pool.size());
  for (const Candidate& c : pool) scores.push_back(ConservativeScore(c.belief, kappa));
  std::vector<std::size_t> order(pool.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  return order;
}

std::vector<std::vector<std::size_t>> FormSubsets(
    std::span<const Candidate> pool, std::size_t pivot, int subset_size,
    double kappa) {
  if (subset_size < 2) {
    throw InvalidArgument(fmt::format("subset_size must be >= 2, got {}", subset_size));
  }
  if (pivot >= pool.size()) throw InvalidArgument("pivot is not in the pool");
  std::vector<std::size_t> others;
  for (std::size_t i : ConservativeOrder(pool, kappa)) {
    if (i != pivot) others.push_back(i);
  }
  const std::size_t chunk = static_cast<std::size_t>(subset_size - 1);
  std::vector<std::vector<std::size_t>> subsets;
  for (std::size_t start = 0; start < others.size(); start += chunk) {
    std::vector<std::size_t> subset{pivot};
    const std::size_t end = std::min(others.size(), start + chunk);
    subset.insert(subset.end(), others.begin() + static_cast<std::ptrdiff_t>(start),
                  others.begin() + static_cast<std::ptrdiff_t>(end));
    subsets.push_back(std::move(subset));
  }
  return subsets;
}

int SplitIndex(int pivot_rank, int l, int r, double lambda_mix) {
  if (r - l < 2) {
    throw InvalidArgument(fmt::format("interval [{}, {}) is too small to split", l, r));
  }
  if (pivot_rank < l || pivot_rank > r) {
    throw InvalidArgument(
        fmt::format("pivot rank {} outside [{}, {}]", pivot_rank, l, r));
  }
  if (!(lambda_mix >= 0.0 && lambda_mix <= 1.0)) {
    throw InvalidArgument(fmt::format("lambda_mix must lie in [0, 1], got {}", lambda_mix));
  }
  const double target = lambda_mix * pivot_rank + (1.0 - lambda_mix) * (l + r) / 2.0;
  const int rounded = static_cast<int>(std::floor(target + 0.5));
  return std::clamp(rounded, l + 1, r - 1);
}

RoundTrace RunRound(std::span<Candidate> pool, std::size_t pivot,
                    std::string_view query, const SchedulerConfig& config,
                    Judge& judge, RoundOptions options) {
  const RatingConfig& rating = config.rating;
  const std::vector<std::vector<std::size_t>> subsets =
      FormSubsets(pool, pivot, config.subset_size, rating.kappa);

  RoundTrace trace;
  trace.pivot_id = pool[pivot].doc_id;
  trace.pool_size = static_cast<int>(pool.size());
  std::vector<JudgeRequest> requests;
  requests.reserve(subsets.size());
  for (const auto& subset : subsets) {
    requests.push_back(MakeRequest(pool, subset, query));
    trace.subsets.push_back(requests.back().doc_ids());
  }
  trace.judgments = JudgeAll(judge, requests, config.parallelism);
  trace.inference_count = static_cast<int>(subsets.size());

  // Beliefs are only written after every judgment has returned; all updates
  // read the pre-round beliefs.
  const RelevanceBelief pivot_prior = pool[pivot].belief;
  std::vector<std::pair<std::size_t, RelevanceBelief>> updates;
  std::vector<RelevanceBelief> copies;
  copies.reserve(subsets.size());
  for (std::size_t s = 0; s < subsets.size(); ++s) {
    const SetwiseJudgment& judgment = trace.judgments[s];
    trace.prompt_token_count += judgment.token_estimate;
    const double pivot_logit = judgment.scores[0];
    RelevanceBelief copy = pivot_prior;
    for (std::size_t t = 1; t < subsets[s].size(); ++t) {
      const std::size_t member = subsets[s][t];
      const RelevanceBelief& member_prior = pool[member].belief;
      const double p = PreferenceProbability(judgment.scores[t], pivot_logit,
                                             rating.temperature);
      updates.emplace_back(member,
                           SoftCompare(member_prior, pivot_prior, p, rating));
      copy = SoftCompare(copy, member_prior, 1.0 - p, rating);
    }
    copies.push_back(copy);
  }
  for (auto& [index, belief] : updates) pool[index].belief = belief;
  if (!copies.empty()) {
    pool[pivot].belief =
        options.aggregate_pivot ? AggregatePivot(copies) : copies.back();
  }
  return trace;
}

RankingResult RankTopK(const RankingTask& task, Judge& judge) {
  return RankAblation(task, judge, AblationMode::kFull);
}

RankingResult RankAblation(const RankingTask& task, Judge& judge,
                           AblationMode mode) {
  task.config.Validate(task.candidates.size());
  CheckUniqueIds(task.candidates);
  switch (mode) {
    case AblationMode::kFull: return RankRecursive(task, judge, true);
    case AblationMode::kNoOptimization: return RankRecursive(task, judge, false);
    case AblationMode::kNoRecursive: return RankSingleRound(task, judge);
    case AblationMode::kNoModeling: return RankQuickselect(task, judge);
  }
  throw InvalidArgument("unknown ablation mode");
}

}  // namespace pivotrank
