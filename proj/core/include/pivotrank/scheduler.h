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

#ifndef PIVOTRANK_SCHEDULER_H_
#define PIVOTRANK_SCHEDULER_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pivotrank/belief.h"
#include "pivotrank/judge.h"

namespace pivotrank {

struct Candidate {
  std::string doc_id;
  std::string text;
  std::optional<double> retrieval_score;
  RelevanceBelief belief{25.0, 25.0 / 3.0};
};

// Sets every candidate's belief to its prior, mapping retrieval scores over
// the range spanned by the pool.
void InitializeBeliefs(std::span<Candidate> pool, const RatingConfig& rating);

enum class AblationMode {
  kFull,
  // Quickselect over hardened pivot comparisons, no beliefs.
  kNoModeling,
  // One round with a single pivot, then rank by conservative score.
  kNoRecursive,
  // First element as pivot, split at the pivot, last pivot copy wins.
  kNoOptimization,
};

std::string_view ToString(AblationMode mode);
// Accepts full, no_modeling, no_recursive, no_optimization.
AblationMode ParseAblationMode(std::string_view name);

struct RoundTrace {
  int round_index = 0;
  std::string pivot_id;
  int pool_size = 0;
  // Doc ids per subset, pivot first (label A).
  std::vector<std::vector<std::string>> subsets;
  std::vector<SetwiseJudgment> judgments;
  int split_index = 0;
  int retained_count = 0;
  int inference_count = 0;
  std::int64_t prompt_token_count = 0;
};

// One JSON object, no trailing newline.
std::string ToJsonLine(const RoundTrace& trace, std::string_view query_id);

struct SchedulerConfig {
  int k = 10;
  int subset_size = 3;
  double lambda_mix = 2.0 / 3.0;
  RatingConfig rating;
  int max_rounds = 50;
  std::uint64_t seed = 0;
  // Concurrent judge calls per round.
  int parallelism = 1;
  std::size_t max_passages = kDefaultMaxPassages;
  // Called after every round when set.
  std::function<void(const RoundTrace&)> on_round;

  // Throws InvalidArgument describing the offending field.
  void Validate(std::size_t pool_size) const;
};

struct RankingTask {
  std::string query_id;
  std::string query;
  std::vector<Candidate> candidates;
  SchedulerConfig config;
};

struct RankedDoc {
  std::string doc_id;
  double score = 0.0;
};

struct RankingResult {
  std::vector<RankedDoc> ranking;
  std::vector<RoundTrace> traces;
  std::int64_t inference_count = 0;
  std::int64_t prompt_tokens = 0;
  int rounds = 0;
};

// Wraps a judge failure with the subset it was judging. The original error
// is nested (std::rethrow_if_nested).
class SubsetJudgeFailure : public JudgeError {
 public:
  SubsetJudgeFailure(const std::string& cause,
                     std::vector<std::string> labels,
                     std::vector<std::string> doc_ids);
  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<std::string>& doc_ids() const { return doc_ids_; }

 private:
  std::vector<std::string> labels_;
  std::vector<std::string> doc_ids_;
};

// Index of the candidate with strictly minimal sigma. Ties on sigma go to the
// (lower) median mu of the tied set, then to the middle of the candidates
// sharing that mu, by pool position.
std::size_t SelectPivot(std::span<const Candidate> pool);

// Groups the non-pivot candidates, ordered by conservative score descending
// (pool order on ties), into chunks of subset_size - 1 and prepends the
// pivot to each. Returns pool indices.
std::vector<std::vector<std::size_t>> FormSubsets(
    std::span<const Candidate> pool, std::size_t pivot, int subset_size,
    double kappa);

// Rounded, progress-clamped split between the pivot rank and the interval
// midpoint. Throws InvalidArgument when r - l < 2.
int SplitIndex(int pivot_rank, int l, int r, double lambda_mix);

struct RoundOptions {
  bool aggregate_pivot = true;
};

// Judges every subset around `pivot`, then applies the fractional updates:
// each non-pivot once against the pivot's pre-round belief, and one pivot
// copy per subset, merged afterwards. Updates `pool` beliefs in place.
RoundTrace RunRound(std::span<Candidate> pool, std::size_t pivot,
                    std::string_view query, const SchedulerConfig& config,
                    Judge& judge, RoundOptions options = {});

// Indices of `pool` sorted by conservative score, descending, stable.
std::vector<std::size_t> ConservativeOrder(std::span<const Candidate> pool,
                                           double kappa);

RankingResult RankTopK(const RankingTask& task, Judge& judge);
RankingResult RankAblation(const RankingTask& task, Judge& judge,
                           AblationMode mode);

}  // namespace pivotrank

#endif  // PIVOTRANK_SCHEDULER_H_
