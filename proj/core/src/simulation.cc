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

#include "pivotrank/simulation.h"

#include <algorithm>
#include <array>

#include <fmt/format.h>

#include "pivotrank/hash.h"

namespace pivotrank {
namespace {

constexpr std::array<std::string_view, 24> kVocabulary = {
    "retrieval", "ranking",  "passage",  "document", "query",   "relevance",
    "model",     "language", "search",   "index",    "score",   "neural",
    "evidence",  "answer",   "context",  "semantic", "lexical", "corpus",
    "benchmark", "judgment", "topic",    "signal",   "estimate", "candidate"};

std::uint64_t StreamKey(std::uint64_t seed, int index, std::string_view stream,
                        int item) {
  std::uint64_t key = SplitMix64(seed);
  key = SplitMix64(key ^ static_cast<std::uint64_t>(index));
  key = Fnv1a64(stream, key);
  return SplitMix64(key ^ static_cast<std::uint64_t>(item) * 0x9e3779b97f4a7c15ULL);
}

std::string PassageText(std::uint64_t seed, int index, int item, int words) {
  std::string text = fmt::format("Synthetic passage {} about", item);
  for (int w = 0; w < words; ++w) {
    const std::uint64_t bits = StreamKey(seed, index, "text", item * 4096 + w);
    text += ' ';
    text += kVocabulary[bits % kVocabulary.size()];
  }
  text += '.';
  return text;
}

}  // namespace

std::string_view ToString(InitialOrder order) {
  switch (order) {
    case InitialOrder::kBm25: return "bm25";
    case InitialOrder::kInverted: return "inverted";
    case InitialOrder::kRandom: return "random";
  }
  return "unknown";
}

InitialOrder ParseInitialOrder(std::string_view name) {
  for (InitialOrder order :
       {InitialOrder::kBm25, InitialOrder::kInverted, InitialOrder::kRandom}) {
    if (ToString(order) == name) return order;
  }
  throw InvalidArgument(fmt::format("unknown initial order '{}'", name));
}

int GradeForTruth(double truth) {
  if (truth > 2.0) return 3;
  if (truth > 1.5) return 2;
  if (truth > 1.0) return 1;
  return 0;
}

SyntheticQuery GenerateQuery(const SimulationConfig& config, std::uint64_t seed,
                             int index, const RatingConfig& rating) {
  if (config.pool_size < 2) throw InvalidArgument("simulation pool_size must be >= 2");
  SyntheticQuery q;
  q.query_id = fmt::format("q{:03}", index);
  q.query = fmt::format("synthetic information need number {}", index);

  struct Doc {
    std::string id;
    double truth;
    double retrieval;
    int item;
  };
  std::vector<Doc> docs;
  docs.reserve(static_cast<std::size_t>(config.pool_size));
  for (int i = 0; i < config.pool_size; ++i) {
    const double truth = CounterNormal(StreamKey(seed, index, "truth", i));
    const double bm25 =
        truth + config.retrieval_noise * CounterNormal(StreamKey(seed, index, "bm25", i));
    double retrieval = bm25;
    switch (config.initial_order) {
      case InitialOrder::kBm25: break;
      case InitialOrder::kInverted: retrieval = -bm25; break;
      case InitialOrder::kRandom:
        retrieval = CounterNormal(StreamKey(seed, index, "random", i));
        break;
    }
    docs.push_back({fmt::format("{}-d{:03}", q.query_id, i), truth, retrieval, i});
  }
  std::stable_sort(docs.begin(), docs.end(), [](const Doc& a, const Doc& b) {
    return a.retrieval > b.retrieval;
  });

  for (const Doc& d : docs) {
    Candidate c;
    c.doc_id = d.id;
    c.text = PassageText(seed, index, d.item, config.passage_words);
    if (config.retrieval_prior) c.retrieval_score = d.retrieval;
    q.candidates.push_back(std::move(c));
    q.truth.emplace(d.id, d.truth);
    q.qrels.emplace(d.id, GradeForTruth(d.truth));
  }
  InitializeBeliefs(q.candidates, rating);
  return q;
}

std::vector<std::string> TrueTopK(const std::unordered_map<std::string, double>& truth,
                                  int k) {
  std::vector<std::pair<std::string, double>> items(truth.begin(), truth.end());
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> top;
  for (int i = 0; i < std::min<int>(k, static_cast<int>(items.size())); ++i) {
    top.push_back(items[static_cast<std::size_t>(i)].first);
  }
  return top;
}

}  // namespace pivotrank
