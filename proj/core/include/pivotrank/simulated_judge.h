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

#ifndef PIVOTRANK_SIMULATED_JUDGE_H_
#define PIVOTRANK_SIMULATED_JUDGE_H_

#include <cstdint>
#include <string>
#include <unordered_map>

#include "pivotrank/judge.h"

namespace pivotrank {

struct SimulatedJudgeOptions {
  double gain = 1.0;
  double noise_std = 0.0;
  std::uint64_t seed = 0;
};

// Scores each option as gain * truth[doc_id] + noise. The noise for a
// document is a pure function of (seed, query, doc_id, set of doc ids in the
// request), so repeating a request repeats its judgment exactly and
// relabelling the passages permutes the scores with them.
class SimulatedJudge : public Judge {
 public:
  SimulatedJudge(std::unordered_map<std::string, double> truth,
                 SimulatedJudgeOptions options);

  SetwiseJudgment Evaluate(const JudgeRequest& request) override;

  // The noise term alone, exposed for statistical tests of the stream.
  double Noise(const std::string& query, const std::string& doc_id,
               std::uint64_t context) const;

 private:
  std::unordered_map<std::string, double> truth_;
  SimulatedJudgeOptions options_;
};

}  // namespace pivotrank

#endif  // PIVOTRANK_SIMULATED_JUDGE_H_
