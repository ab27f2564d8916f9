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

#include "pivotrank/metrics.h"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "pivotrank/belief.h"

namespace pivotrank {
namespace {

double Gain(int grade) { return grade > 0 ? std::exp2(grade) - 1.0 : 0.0; }

}  // namespace

double NdcgAtK(std::span<const std::string> ranking,
               const std::map<std::string, int>& grades, int k) {
  if (k < 1) throw InvalidArgument(fmt::format("NDCG cutoff must be >= 1, got {}", k));
  const std::size_t cutoff = static_cast<std::size_t>(k);

  double dcg = 0.0;
  for (std::size_t r = 0; r < std::min(cutoff, ranking.size()); ++r) {
    const auto it = grades.find(ranking[r]);
    if (it != grades.end()) dcg += Gain(it->second) / std::log2(r + 2.0);
  }

  std::vector<int> ideal;
  ideal.reserve(grades.size());
  for (const auto& [doc, grade] : grades) ideal.push_back(grade);
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  double idcg = 0.0;
  for (std::size_t r = 0; r < std::min(cutoff, ideal.size()); ++r) {
    idcg += Gain(ideal[r]) / std::log2(r + 2.0);
  }
  return idcg > 0.0 ? dcg / idcg : 0.0;
}

double TopKRecall(std::span<const std::string> ranking,
                  std::span<const std::string> truth_top) {
  if (truth_top.empty()) return 0.0;
  const std::set<std::string_view> wanted(truth_top.begin(), truth_top.end());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < std::min(ranking.size(), truth_top.size()); ++i) {
    hits += wanted.count(ranking[i]);
  }
  return static_cast<double>(hits) / static_cast<double>(truth_top.size());
}

}  // namespace pivotrank
