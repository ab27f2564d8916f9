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

#ifndef PIVOTRANK_SIMULATION_H_
#define PIVOTRANK_SIMULATION_H_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pivotrank/belief.h"
#include "pivotrank/scheduler.h"

namespace pivotrank {

// How the first-stage retriever orders a synthetic pool.
enum class InitialOrder {
  kBm25,      // retrieval score = truth + retrieval noise
  kInverted,  // negated bm25-like score
  kRandom,    // score independent of truth
};

std::string_view ToString(InitialOrder order);
InitialOrder ParseInitialOrder(std::string_view name);

struct SimulationConfig {
  int num_queries = 50;
  int pool_size = 100;
  double retrieval_noise = 1.0;
  InitialOrder initial_order = InitialOrder::kBm25;
  int passage_words = 48;
  // Map retrieval scores into the prior means; otherwise every candidate
  // starts at N(mu0, sigma0^2) and only the list order is informative.
  bool retrieval_prior = false;
};

// A generated query: latent truth per document, graded qrels derived from
// the truth, and candidates in retrieval order.
struct SyntheticQuery {
  std::string query_id;
  std::string query;
  std::vector<Candidate> candidates;
  std::unordered_map<std::string, double> truth;
  std::map<std::string, int> qrels;
};

// Deterministic in (config, seed, index). Candidate beliefs are initialized
// from the retrieval scores with `rating`.
SyntheticQuery GenerateQuery(const SimulationConfig& config, std::uint64_t seed,
                             int index, const RatingConfig& rating);

// Grade 3/2/1/0 for truth above 2.0/1.5/1.0, else 0.
int GradeForTruth(double truth);

// Doc ids of the `k` largest truth values (ties by doc id).
std::vector<std::string> TrueTopK(const std::unordered_map<std::string, double>& truth,
                                  int k);

}  // namespace pivotrank

#endif  // PIVOTRANK_SIMULATION_H_
