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

#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "pivotrank/relevance.h"
#include "pivotrank/simulated_judge.h"

namespace pivotrank {
namespace {

Candidate Make(std::string id, double mu = 25.0, double sigma = 25.0 / 3.0) {
  Candidate c;
  c.doc_id = std::move(id);
  c.text = "passage " + c.doc_id;
  c.belief = RelevanceBelief(mu, sigma);
  return c;
}

std::vector<Candidate> Pool(int n) {
  std::vector<Candidate> pool;
  for (int i = 0; i < n; ++i) pool.push_back(Make("D" + std::to_string(i)));
  return pool;
}

std::vector<std::string> Ids(std::span<const Candidate> pool,
                             const std::vector<std::size_t>& indices) {
  std::vector<std::string> out;
  for (std::size_t i : indices) out.push_back(pool[i].doc_id);
  return out;
}

std::vector<std::string> Ids(const std::vector<RankedDoc>& ranking) {
  std::vector<std::string> out;
  for (const RankedDoc& d : ranking) out.push_back(d.doc_id);
  return out;
}

std::unordered_map<std::string, double> RandomTruth(std::span<const Candidate> pool,
                                                    std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  std::unordered_map<std::string, double> truth;
  for (const Candidate& c : pool) truth[c.doc_id] = z(rng);
  return truth;
}

class CountingJudge : public Judge {
 public:
  explicit CountingJudge(Judge& inner) : inner_(inner) {}
  SetwiseJudgment Evaluate(const JudgeRequest& request) override {
    ++calls;
    return inner_.Evaluate(request);
  }
  std::atomic<int> calls{0};

 private:
  Judge& inner_;
};

class ConstantJudge : public Judge {
 public:
  SetwiseJudgment Evaluate(const JudgeRequest& request) override {
    SetwiseJudgment j;
    for (const Passage& p : request.passages) {
      j.labels.push_back(p.label);
      j.scores.push_back(1.0);
    }
    return j;
  }
};

class ShortJudge : public Judge {
 public:
  SetwiseJudgment Evaluate(const JudgeRequest& request) override {
    SetwiseJudgment j;
    j.labels = {request.passages[0].label};
    j.scores = {0.0};
    return j;
  }
};

class ThrowingJudge : public Judge {
 public:
  SetwiseJudgment Evaluate(const JudgeRequest&) override {
    throw JudgeTimeout("no answer");
  }
};

TEST(SelectPivotTest, LowestSigmaWins) {
  std::vector<Candidate> pool{Make("a", 25, 3), Make("b", 25, 1), Make("c", 25, 2)};
  EXPECT_EQ(SelectPivot(pool), 1u);
}

TEST(SelectPivotTest, MedianMeanAmongTiedSigma) {
  std::vector<Candidate> pool{Make("a", 30), Make("b", 10), Make("c", 20)};
  EXPECT_EQ(pool[SelectPivot(pool)].belief.mu(), 20.0);
  // Even count: lower median.
  pool.push_back(Make("d", 40));
  EXPECT_EQ(pool[SelectPivot(pool)].belief.mu(), 20.0);
}

TEST(SelectPivotTest, FullyTiedPoolTakesMiddlePosition) {
  EXPECT_EQ(SelectPivot(Pool(1)), 0u);
  EXPECT_EQ(SelectPivot(Pool(3)), 1u);
  EXPECT_EQ(SelectPivot(Pool(4)), 1u);
  EXPECT_EQ(SelectPivot(Pool(100)), 49u);
  EXPECT_THROW(SelectPivot(std::vector<Candidate>{}), InvalidArgument);
}

TEST(FormSubsetsTest, SixCandidatesThreePerSubset) {
  const std::vector<Candidate> pool = Pool(6);
  const auto subsets = FormSubsets(pool, 3, 3, 1.0);
  ASSERT_EQ(subsets.size(), 3u);
  EXPECT_EQ(Ids(pool, subsets[0]), (std::vector<std::string>{"D3", "D0", "D1"}));
  EXPECT_EQ(Ids(pool, subsets[1]), (std::vector<std::string>{"D3", "D2", "D4"}));
  EXPECT_EQ(Ids(pool, subsets[2]), (std::vector<std::string>{"D3", "D5"}));
}

TEST(FormSubsetsTest, SizesFollowCeilingArithmetic) {
  const auto two = FormSubsets(Pool(2), 0, 3, 1.0);
  ASSERT_EQ(two.size(), 1u);
  EXPECT_EQ(two[0], (std::vector<std::size_t>{0, 1}));

  // Nine non-pivots in chunks of three.
  const auto ten = FormSubsets(Pool(10), 4, 4, 1.0);
  ASSERT_EQ(ten.size(), 3u);
  EXPECT_EQ(ten[0].size(), 4u);
  EXPECT_EQ(ten[1].size(), 4u);
  EXPECT_EQ(ten[2].size(), 4u);

  const auto nine = FormSubsets(Pool(9), 4, 4, 1.0);
  ASSERT_EQ(nine.size(), 3u);
  EXPECT_EQ(nine[0].size(), 4u);
  EXPECT_EQ(nine[1].size(), 4u);
  EXPECT_EQ(nine[2].size(), 3u);
}

TEST(FormSubsetsTest, GroupsByConservativeScore) {
  std::vector<Candidate> pool{Make("low", 10), Make("high", 40), Make("pivot", 25, 1),
                              Make("mid", 30)};
  const auto subsets = FormSubsets(pool, 2, 3, 1.0);
  EXPECT_EQ(Ids(pool, subsets[0]), (std::vector<std::string>{"pivot", "high", "mid"}));
  EXPECT_EQ(Ids(pool, subsets[1]), (std::vector<std::string>{"pivot", "low"}));
}

TEST(FormSubsetsTest, EveryNonPivotAppearsOnce) {
  std::mt19937_64 rng(29);
  for (int n = 2; n <= 60; ++n) {
    for (int m = 2; m <= 10; ++m) {
      const std::size_t pivot = rng() % n;
      const auto subsets = FormSubsets(Pool(n), pivot, m, 1.0);
      EXPECT_EQ(subsets.size(), static_cast<std::size_t>((n - 1 + m - 2) / (m - 1)));
      std::multiset<std::size_t> seen;
      for (const auto& s : subsets) {
        EXPECT_EQ(s.front(), pivot);
        EXPECT_LE(s.size(), static_cast<std::size_t>(m));
        seen.insert(s.begin() + 1, s.end());
      }
      EXPECT_EQ(seen.size(), static_cast<std::size_t>(n - 1));
      EXPECT_EQ(std::set<std::size_t>(seen.begin(), seen.end()).size(), seen.size());
      EXPECT_EQ(seen.count(pivot), 0u);
    }
  }
}

TEST(SplitIndexTest, Examples) {
  EXPECT_EQ(SplitIndex(3, 0, 10, 1.0), 3);
  EXPECT_EQ(SplitIndex(3, 0, 10, 0.0), 5);
  EXPECT_EQ(SplitIndex(3, 0, 10, 2.0 / 3.0), 4);
}

TEST(SplitIndexTest, ClampsToMakeProgress) {
  EXPECT_EQ(SplitIndex(0, 0, 10, 1.0), 1);
  EXPECT_EQ(SplitIndex(10, 0, 10, 1.0), 9);
  EXPECT_EQ(SplitIndex(0, 0, 2, 0.5), 1);
  EXPECT_THROW(SplitIndex(0, 0, 1, 0.5), InvalidArgument);
  EXPECT_THROW(SplitIndex(11, 0, 10, 0.5), InvalidArgument);
  EXPECT_THROW(SplitIndex(3, 0, 10, 1.5), InvalidArgument);
}

TEST(SplitIndexTest, MonotoneInPivotRank) {
  for (int r = 2; r <= 120; ++r) {
    for (double lambda : {0.0, 0.25, 2.0 / 3.0, 1.0}) {
      int prev = 0;
      for (int rp = 0; rp <= r; ++rp) {
        const int i = SplitIndex(rp, 0, r, lambda);
        EXPECT_GE(i, 1);
        EXPECT_LE(i, r - 1);
        EXPECT_GE(i, prev);
        prev = i;
      }
    }
  }
}

TEST(RunRoundTest, FigureRoundUpdatesAgainstPivotPrior) {
  std::vector<Candidate> pool{Make("D0"), Make("D1"), Make("D3")};
  SimulatedJudge judge({{"D0", 3.2}, {"D1", 1.1}, {"D3", -0.8}}, {});
  SchedulerConfig config;
  const RoundTrace trace = RunRound(pool, 2, "q", config, judge);

  ASSERT_EQ(trace.judgments.size(), 1u);
  EXPECT_EQ(trace.subsets[0], (std::vector<std::string>{"D3", "D0", "D1"}));
  EXPECT_EQ(trace.judgments[0].scores, (std::vector<double>{-0.8, 3.2, 1.1}));

  const RelevanceBelief prior(25, 25.0 / 3.0);
  const double p0 = PreferenceProbability(3.2, -0.8, 4.0);
  const double p1 = PreferenceProbability(1.1, -0.8, 4.0);
  EXPECT_NEAR(p0, 0.731, 5e-4);
  const RelevanceBelief d0 = SoftCompare(prior, prior, p0, config.rating);
  EXPECT_EQ(pool[0].belief, d0);
  EXPECT_EQ(pool[1].belief, SoftCompare(prior, prior, p1, config.rating));

  RelevanceBelief copy = SoftCompare(prior, prior, 1 - p0, config.rating);
  copy = SoftCompare(copy, prior, 1 - p1, config.rating);
  EXPECT_NEAR(pool[2].belief.mu(), copy.mu(), 1e-12);
  EXPECT_NEAR(pool[2].belief.sigma(), copy.sigma(), 1e-12);
}

TEST(RunRoundTest, EqualLogitsKeepMeansAndShrinkSigmas) {
  std::vector<Candidate> pool = Pool(9);
  ConstantJudge judge;
  SchedulerConfig config;
  RunRound(pool, 4, "q", config, judge);
  for (const Candidate& c : pool) {
    EXPECT_NEAR(c.belief.mu(), 25.0, 1e-12) << c.doc_id;
    EXPECT_LT(c.belief.sigma(), 25.0 / 3.0) << c.doc_id;
  }
}

TEST(RunRoundTest, PivotIsAggregateOfCopies) {
  std::vector<Candidate> pool = Pool(7);
  std::unordered_map<std::string, double> truth;
  for (int i = 0; i < 7; ++i) truth["D" + std::to_string(i)] = 0.4 * i;
  SimulatedJudge judge(truth, {});
  SchedulerConfig config;
  const std::vector<Candidate> before = pool;
  const RoundTrace trace = RunRound(pool, 3, "q", config, judge);

  std::vector<RelevanceBelief> copies;
  for (std::size_t s = 0; s < trace.subsets.size(); ++s) {
    RelevanceBelief copy = before[3].belief;
    const auto& scores = trace.judgments[s].scores;
    for (std::size_t t = 1; t < scores.size(); ++t) {
      const double p = PreferenceProbability(scores[t], scores[0], 4.0);
      copy = SoftCompare(copy, before[0].belief, 1 - p, config.rating);
    }
    copies.push_back(copy);
  }
  const RelevanceBelief want = AggregatePivot(copies);
  EXPECT_NEAR(pool[3].belief.mu(), want.mu(), 1e-12);
  EXPECT_NEAR(pool[3].belief.sigma(), want.sigma(), 1e-12);
}

TEST(RunRoundTest, InferencesPerRoundIsCeiling) {
  std::mt19937_64 rng(31);
  for (int n = 2; n <= 40; ++n) {
    for (int m = 2; m <= 6; ++m) {
      std::vector<Candidate> pool = Pool(n);
      SimulatedJudge inner(RandomTruth(pool, rng), {});
      CountingJudge judge(inner);
      SchedulerConfig config;
      config.subset_size = m;
      const RoundTrace trace = RunRound(pool, rng() % n, "q", config, judge);
      const int want = (n - 1 + m - 2) / (m - 1);
      EXPECT_EQ(trace.inference_count, want);
      EXPECT_EQ(judge.calls.load(), want);
    }
  }
}

TEST(RunRoundTest, SingleSubsetNoiselessOrdersMembersByTruth) {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 3 + static_cast<int>(rng() % 8);
    std::vector<Candidate> pool = Pool(n);
    const auto truth = RandomTruth(pool, rng);
    SimulatedJudge judge(truth, {.gain = 3.0});
    SchedulerConfig config;
    config.subset_size = n;
    const std::size_t pivot = rng() % n;
    RunRound(pool, pivot, "q", config, judge);
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        if (a == static_cast<int>(pivot) || b == static_cast<int>(pivot)) continue;
        if (truth.at(pool[a].doc_id) > truth.at(pool[b].doc_id)) {
          EXPECT_GT(pool[a].belief.mu(), pool[b].belief.mu());
        }
      }
    }
  }
}

TEST(RunRoundTest, ParallelJudgingMatchesSequential) {
  std::mt19937_64 rng(41);
  std::vector<Candidate> pool = Pool(40);
  SimulatedJudge judge(RandomTruth(pool, rng), {.gain = 2.0, .noise_std = 0.5, .seed = 3});
  std::vector<Candidate> seq = pool, par = pool;
  SchedulerConfig config;
  const RoundTrace a = RunRound(seq, 7, "q", config, judge);
  config.parallelism = 8;
  const RoundTrace b = RunRound(par, 7, "q", config, judge);
  EXPECT_EQ(ToJsonLine(a, "q"), ToJsonLine(b, "q"));
  for (std::size_t i = 0; i < pool.size(); ++i) EXPECT_EQ(seq[i].belief, par[i].belief);
}

TEST(RunRoundTest, JudgeFailureNamesTheSubset) {
  std::vector<Candidate> pool = Pool(5);
  ThrowingJudge judge;
  SchedulerConfig config;
  try {
    RunRound(pool, 2, "q", config, judge);
    FAIL() << "expected SubsetJudgeFailure";
  } catch (const SubsetJudgeFailure& e) {
    EXPECT_EQ(e.labels(), (std::vector<std::string>{"A", "B", "C"}));
    EXPECT_EQ(e.doc_ids().front(), "D2");
    EXPECT_NE(std::string(e.what()).find("no answer"), std::string::npos);
    EXPECT_THROW(std::rethrow_if_nested(e), JudgeTimeout);
  }
  // Beliefs are untouched when a round fails.
  for (const Candidate& c : pool) EXPECT_EQ(c.belief, RelevanceBelief(25, 25.0 / 3.0));
}

TEST(RunRoundTest, ArityMismatchIsRejected) {
  std::vector<Candidate> pool = Pool(3);
  ShortJudge judge;
  SchedulerConfig config;
  EXPECT_THROW(RunRound(pool, 1, "q", config, judge), SubsetJudgeFailure);
}

RankingTask RandomTask(int n, int k, std::mt19937_64& rng,
                       std::unordered_map<std::string, double>* truth) {
  RankingTask task;
  task.query_id = "q1";
  task.query = "what is a pivot";
  task.candidates = Pool(n);
  *truth = RandomTruth(task.candidates, rng);
  task.config.k = k;
  return task;
}

TEST(RankTopKTest, PoolOfSizeKNeedsNoJudge) {
  RankingTask task;
  task.query = "q";
  task.candidates = {Make("a", 20), Make("b", 30), Make("c", 25)};
  task.config.k = 3;
  ThrowingJudge judge;
  const RankingResult r = RankTopK(task, judge);
  EXPECT_EQ(r.inference_count, 0);
  EXPECT_EQ(Ids(r.ranking), (std::vector<std::string>{"b", "c", "a"}));
}

TEST(RankTopKTest, OutputIsKDistinctPoolMembers) {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 80);
    const int k = 1 + static_cast<int>(rng() % std::min(n, 12));
    std::unordered_map<std::string, double> truth;
    RankingTask task = RandomTask(n, k, rng, &truth);
    task.config.subset_size = 2 + static_cast<int>(rng() % 5);
    SimulatedJudge judge(truth, {.gain = 3.0, .noise_std = 1.0, .seed = 1});
    for (AblationMode mode : {AblationMode::kFull, AblationMode::kNoModeling,
                              AblationMode::kNoRecursive, AblationMode::kNoOptimization}) {
      const RankingResult r = RankAblation(task, judge, mode);
      const auto ids = Ids(r.ranking);
      EXPECT_EQ(ids.size(), static_cast<std::size_t>(k)) << ToString(mode);
      EXPECT_EQ(std::set<std::string>(ids.begin(), ids.end()).size(), ids.size());
      for (const auto& id : ids) EXPECT_TRUE(truth.count(id));
      std::int64_t inferences = 0, tokens = 0;
      for (const RoundTrace& t : r.traces) {
        inferences += t.inference_count;
        tokens += t.prompt_token_count;
      }
      EXPECT_EQ(inferences, r.inference_count);
      EXPECT_EQ(tokens, r.prompt_tokens);
      EXPECT_EQ(static_cast<int>(r.traces.size()), r.rounds);
      for (std::size_t i = 1; i < r.ranking.size(); ++i) {
        EXPECT_GE(r.ranking[i - 1].score, r.ranking[i].score);
      }
    }
  }
}

TEST(RankTopKTest, PoolShrinksEveryRound) {
  std::mt19937_64 rng(47);
  std::unordered_map<std::string, double> truth;
  const RankingTask task = RandomTask(100, 10, rng, &truth);
  SimulatedJudge judge(truth, {.gain = 3.0});
  const RankingResult r = RankTopK(task, judge);
  ASSERT_FALSE(r.traces.empty());
  EXPECT_EQ(r.traces.front().pool_size, 100);
  for (std::size_t i = 1; i < r.traces.size(); ++i) {
    EXPECT_LT(r.traces[i].pool_size, r.traces[i - 1].pool_size);
    EXPECT_EQ(r.traces[i].pool_size, r.traces[i - 1].retained_count);
  }
  EXPECT_LE(r.traces.back().retained_count, 10);
}

TEST(RankTopKTest, Deterministic) {
  std::mt19937_64 rng(53);
  std::unordered_map<std::string, double> truth;
  RankingTask task = RandomTask(60, 10, rng, &truth);
  SimulatedJudge judge(truth, {.gain = 3.0, .noise_std = 1.0, .seed = 9});
  const RankingResult a = RankTopK(task, judge);
  task.config.parallelism = 4;
  const RankingResult b = RankTopK(task, judge);
  ASSERT_EQ(a.ranking.size(), b.ranking.size());
  for (std::size_t i = 0; i < a.ranking.size(); ++i) {
    EXPECT_EQ(a.ranking[i].doc_id, b.ranking[i].doc_id);
    EXPECT_EQ(a.ranking[i].score, b.ranking[i].score);
  }
  ASSERT_EQ(a.traces.size(), b.traces.size());
  for (std::size_t i = 0; i < a.traces.size(); ++i) {
    EXPECT_EQ(ToJsonLine(a.traces[i], "q"), ToJsonLine(b.traces[i], "q"));
  }
}

TEST(RankTopKTest, RespectsMaxRounds) {
  std::mt19937_64 rng(59);
  std::unordered_map<std::string, double> truth;
  RankingTask task = RandomTask(100, 5, rng, &truth);
  task.config.max_rounds = 1;
  SimulatedJudge judge(truth, {.gain = 3.0});
  const RankingResult r = RankTopK(task, judge);
  EXPECT_EQ(r.rounds, 1);
  EXPECT_EQ(r.ranking.size(), 5u);
}

TEST(RankTopKTest, RejectsBadTasks) {
  SimulatedJudge judge({}, {});
  RankingTask task;
  task.candidates = Pool(5);
  task.config.k = 6;
  EXPECT_THROW(RankTopK(task, judge), InvalidArgument);
  task.config.k = 2;
  task.config.subset_size = 1;
  EXPECT_THROW(RankTopK(task, judge), InvalidArgument);
  task.config.subset_size = 11;
  EXPECT_THROW(RankTopK(task, judge), InvalidArgument);
  task.config.subset_size = 3;
  task.config.lambda_mix = 1.2;
  EXPECT_THROW(RankTopK(task, judge), InvalidArgument);
  task.config.lambda_mix = 0.5;
  task.candidates[1].doc_id = "D0";
  EXPECT_THROW(RankTopK(task, judge), InvalidArgument);
}

TEST(AblationTest, NoRecursiveCostsOneRound) {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 10; ++trial) {
    std::unordered_map<std::string, double> truth;
    const RankingTask task = RandomTask(100, 10, rng, &truth);
    SimulatedJudge judge(truth, {.gain = 3.0, .noise_std = 1.0, .seed = 2});
    const RankingResult r = RankAblation(task, judge, AblationMode::kNoRecursive);
    EXPECT_EQ(r.inference_count, 50);
    EXPECT_EQ(r.rounds, 1);
  }
}

TEST(AblationTest, NoiselessQuickselectIsExact) {
  std::mt19937_64 rng(67);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 60);
    const int k = 1 + static_cast<int>(rng() % std::min(n, 10));
    std::unordered_map<std::string, double> truth;
    const RankingTask task = RandomTask(n, k, rng, &truth);
    SimulatedJudge judge(truth, {.gain = 3.0});
    const RankingResult r = RankAblation(task, judge, AblationMode::kNoModeling);
    std::vector<std::pair<double, std::string>> sorted;
    for (const auto& [id, t] : truth) sorted.emplace_back(-t, id);
    std::sort(sorted.begin(), sorted.end());
    std::set<std::string> want;
    for (int i = 0; i < k; ++i) want.insert(sorted[i].second);
    const auto got = Ids(r.ranking);
    EXPECT_EQ(std::set<std::string>(got.begin(), got.end()), want);
  }
}

TEST(AblationTest, ParseNames) {
  for (AblationMode mode : {AblationMode::kFull, AblationMode::kNoModeling,
                            AblationMode::kNoRecursive, AblationMode::kNoOptimization}) {
    EXPECT_EQ(ParseAblationMode(ToString(mode)), mode);
  }
  EXPECT_THROW(ParseAblationMode("w/o magic"), InvalidArgument);
}

TEST(RoundTraceTest, JsonLineFields) {
  std::vector<Candidate> pool = Pool(4);
  SimulatedJudge judge({{"D0", 1}, {"D1", 2}, {"D2", 3}, {"D3", 4}}, {});
  SchedulerConfig config;
  RoundTrace trace = RunRound(pool, 1, "q", config, judge);
  trace.split_index = 2;
  trace.retained_count = 2;
  const auto row = nlohmann::json::parse(ToJsonLine(trace, "q7"));
  EXPECT_EQ(row["query_id"], "q7");
  EXPECT_EQ(row["pivot"], "D1");
  EXPECT_EQ(row["pool_size"], 4);
  EXPECT_EQ(row["subsets"].size(), 2u);
  EXPECT_EQ(row["subsets"][0][0], "D1");
  EXPECT_EQ(row["scores"][0][0], 2.0);
  EXPECT_EQ(row["inferences"], 2);
  EXPECT_EQ(row["retries"], 0);
  EXPECT_EQ(row["retained"], 2);
  EXPECT_GT(row["prompt_tokens"].get<int>(), 0);
}

}  // namespace
}  // namespace pivotrank
