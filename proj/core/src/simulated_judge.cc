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

#include "pivotrank/simulated_judge.h"

#include <algorithm>

#include <fmt/format.h>

#include "pivotrank/belief.h"
#include "pivotrank/hash.h"

namespace pivotrank {

SimulatedJudge::SimulatedJudge(std::unordered_map<std::string, double> truth,
                               SimulatedJudgeOptions options)
    : truth_(std::move(truth)), options_(options) {
  if (!(options_.noise_std >= 0.0)) {
    throw InvalidArgument(
        fmt::format("noise_std must be >= 0, got {}", options_.noise_std));
  }
}

double SimulatedJudge::Noise(const std::string& query,
                             const std::string& doc_id,
                             std::uint64_t context) const {
  std::uint64_t key = SplitMix64(options_.seed);
  key = Fnv1a64(query, key);
  key = Fnv1a64("\x1e", key);
  key = Fnv1a64(doc_id, key);
  key ^= SplitMix64(context);
  return options_.noise_std * CounterNormal(key);
}

SetwiseJudgment SimulatedJudge::Evaluate(const JudgeRequest& request) {
  request.Validate(std::max(request.passages.size(), kDefaultMaxPassages));
  std::vector<std::string> ids = request.doc_ids();
  std::sort(ids.begin(), ids.end());
  std::uint64_t context = kFnvOffset;
  for (const std::string& id : ids) {
    context = Fnv1a64(id, context);
    context = Fnv1a64("\x1f", context);
  }

  SetwiseJudgment judgment;
  for (const Passage& p : request.passages) {
    const auto it = truth_.find(p.doc_id);
    if (it == truth_.end()) {
      throw JudgeError(fmt::format("simulated judge has no truth for '{}'", p.doc_id));
    }
    double score = options_.gain * it->second;
    if (options_.noise_std > 0.0) score += Noise(request.query, p.doc_id, context);
    judgment.labels.push_back(p.label);
    judgment.scores.push_back(score);
  }
  judgment.token_estimate = EstimateTokens(BuildSetwisePrompt(request));
  return judgment;
}

}  // namespace pivotrank
