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

#include "pivotrank/judge.h"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "pivotrank/belief.h"
#include "pivotrank/hash.h"

namespace pivotrank {

std::vector<std::string> JudgeRequest::doc_ids() const {
  std::vector<std::string> ids;
  ids.reserve(passages.size());
  for (const Passage& p : passages) ids.push_back(p.doc_id);
  return ids;
}

void JudgeRequest::Validate(std::size_t max_passages) const {
  if (query.empty()) throw InvalidArgument("judge request has an empty query");
  if (passages.size() < 2) {
    throw InvalidArgument(
        fmt::format("judge request needs >= 2 passages, got {}", passages.size()));
  }
  if (passages.size() > max_passages) {
    throw InvalidArgument(fmt::format("judge request has {} passages, limit is {}",
                                      passages.size(), max_passages));
  }
  std::set<std::string_view> labels;
  std::set<std::string_view> ids;
  for (const Passage& p : passages) {
    if (p.label.empty()) throw InvalidArgument("passage label is empty");
    if (!labels.insert(p.label).second) {
      throw InvalidArgument(fmt::format("duplicate passage label '{}'", p.label));
    }
    if (!ids.insert(p.doc_id).second) {
      throw InvalidArgument(fmt::format("duplicate doc id '{}' in request", p.doc_id));
    }
  }
}

void SetwiseJudgment::Validate() const {
  if (labels.size() != scores.size()) {
    throw InvalidArgument(fmt::format("judgment has {} labels but {} scores",
                                      labels.size(), scores.size()));
  }
  if (labels.size() < 2) throw InvalidArgument("judgment needs >= 2 options");
  std::set<std::string_view> seen;
  for (const std::string& label : labels) {
    if (!seen.insert(label).second) {
      throw InvalidArgument(fmt::format("duplicate judgment label '{}'", label));
    }
  }
  for (double s : scores) {
    if (!std::isfinite(s)) throw InvalidArgument("judgment score is not finite");
  }
}

JudgeCacheMiss::JudgeCacheMiss(std::string key)
    : JudgeError(fmt::format("replay cache miss for key {}", key)),
      key_(std::move(key)) {}

std::string OptionLabel(std::size_t index) {
  std::string label;
  ++index;
  while (index > 0) {
    --index;
    label.insert(label.begin(), static_cast<char>('A' + index % 26));
    index /= 26;
  }
  return label;
}

std::string BuildSetwisePrompt(const JudgeRequest& request) {
  if (request.query.empty()) throw InvalidArgument("prompt needs a query");
  if (request.passages.empty()) throw InvalidArgument("prompt needs passages");
  std::string out = fmt::format(
      "Given a query {}, which of the following passages is the most relevant "
      "to the query?\n\n",
      request.query);
  for (std::size_t i = 0; i < request.passages.size(); ++i) {
    if (i > 0) out += '\n';
    out += fmt::format("Passage {}: {}", request.passages[i].label,
                       request.passages[i].text);
  }
  out += "\n\nOutput only the passage label of the most relevant passage:";
  return out;
}

std::int64_t EstimateTokens(std::string_view text) {
  return static_cast<std::int64_t>((text.size() + 3) / 4);
}

std::string RequestKey(std::string_view query,
                       std::vector<std::string> doc_ids) {
  std::sort(doc_ids.begin(), doc_ids.end());
  std::uint64_t h = Fnv1a64(query);
  for (const std::string& id : doc_ids) {
    h = Fnv1a64("\x1f", h);
    h = Fnv1a64(id, h);
  }
  return fmt::format("{:016x}", h);
}

}  // namespace pivotrank
