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

#include <benchmark/benchmark.h>

#include <vector>

#include "pivotrank/relevance.h"
#include "pivotrank/scheduler.h"
#include "pivotrank/simulated_judge.h"
#include "pivotrank/simulation.h"

namespace pivotrank {
namespace {

void BM_TrueSkillPosteriors(benchmark::State& state) {
  const RatingConfig rating;
  RelevanceBelief self{27.0, 6.0};
  const RelevanceBelief opponent{23.5, 4.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(self);
    benchmark::DoNotOptimize(TrueSkillOutcomePosteriors(self, opponent, rating));
  }
}
BENCHMARK(BM_TrueSkillPosteriors);

void BM_SoftCompare(benchmark::State& state) {
  const RatingConfig rating;
  RelevanceBelief self{27.0, 6.0};
  const RelevanceBelief opponent{23.5, 4.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(self);
    benchmark::DoNotOptimize(SoftCompare(self, opponent, 0.62, rating));
  }
}
BENCHMARK(BM_SoftCompare);

void BM_AggregatePivot(benchmark::State& state) {
  std::vector<RelevanceBelief> copies;
  for (int i = 0; i < state.range(0); ++i) copies.push_back({24.0 + i, 5.0 + 0.1 * i});
  for (auto _ : state) benchmark::DoNotOptimize(AggregatePivot(copies));
}
BENCHMARK(BM_AggregatePivot)->Arg(4)->Arg(50);

// One full top-10 query against a simulated judge.
void BM_RankTopK(benchmark::State& state) {
  SimulationConfig sim;
  sim.pool_size = static_cast<int>(state.range(0));
  RankingTask task;
  const SyntheticQuery query = GenerateQuery(sim, 0, 0, task.config.rating);
  task.query_id = query.query_id;
  task.query = query.query;
  task.candidates = query.candidates;
  std::int64_t inferences = 0;
  for (auto _ : state) {
    SimulatedJudge judge(query.truth, {.gain = 3.0, .noise_std = 1.1});
    const RankingResult result = RankTopK(task, judge);
    inferences = result.inference_count;
    benchmark::DoNotOptimize(result);
  }
  state.counters["inferences"] = static_cast<double>(inferences);
}
BENCHMARK(BM_RankTopK)->Arg(20)->Arg(100)->Unit(benchmark::kMicrosecond);

}  // namespace
}  // namespace pivotrank

BENCHMARK_MAIN();
