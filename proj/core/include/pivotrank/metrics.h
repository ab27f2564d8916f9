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

#ifndef PIVOTRANK_METRICS_H_
#define PIVOTRANK_METRICS_H_

#include <map>
#include <span>
#include <string>
#include <vector>

namespace pivotrank {

// NDCG@k with gain 2^grade - 1 and discount log2(rank + 1). Unjudged
// documents count as grade 0. The ideal DCG uses every judged document of
// the query. Returns 0 when the ideal DCG is 0.
double NdcgAtK(std::span<const std::string> ranking,
               const std::map<std::string, int>& grades, int k);

// Fraction of `truth_top` present in the first |truth_top| entries of
// `ranking`.
double TopKRecall(std::span<const std::string> ranking,
                  std::span<const std::string> truth_top);

struct MetricsReport {
  double ndcg_at_10 = 0.0;  // in [0, 1]
  double inference_count_mean = 0.0;
  double prompt_tokens_mean = 0.0;
  double rounds_mean = 0.0;
  double latency_seconds_mean = 0.0;
};

}  // namespace pivotrank

#endif  // PIVOTRANK_METRICS_H_
