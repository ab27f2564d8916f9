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

#ifndef PIVOTRANK_JUDGE_H_
#define PIVOTRANK_JUDGE_H_

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pivotrank {

inline constexpr std::size_t kDefaultMaxPassages = 10;

struct Passage {
  std::string label;
  std::string doc_id;
  std::string text;
};

struct JudgeRequest {
  std::string query;
  std::vector<Passage> passages;

  std::vector<std::string> doc_ids() const;

  // Throws InvalidArgument on an empty query, fewer than 2 or more than
  // `max_passages` passages, or duplicate labels or doc ids.
  void Validate(std::size_t max_passages = kDefaultMaxPassages) const;
};

// Result of one setwise comparison: one raw score (logit) per option, in
// the request's label order.
struct SetwiseJudgment {
  std::vector<std::string> labels;
  std::vector<double> scores;
  std::int64_t token_estimate = 0;
  int retry_count = 0;

  // Throws InvalidArgument when arity, label uniqueness or finiteness fail.
  void Validate() const;
};

class JudgeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class JudgeCacheMiss : public JudgeError {
 public:
  explicit JudgeCacheMiss(std::string key);
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

class JudgeMalformedResponse : public JudgeError {
 public:
  using JudgeError::JudgeError;
};

class JudgeTimeout : public JudgeError {
 public:
  using JudgeError::JudgeError;
};

class JudgeRetriesExhausted : public JudgeError {
 public:
  JudgeRetriesExhausted(const std::string& what, int attempts)
      : JudgeError(what), attempts_(attempts) {}
  int attempts() const { return attempts_; }

 private:
  int attempts_;
};

// A setwise comparison oracle. Implementations must be safe to call from
// several threads at once.
class Judge {
 public:
  virtual ~Judge() = default;
  virtual SetwiseJudgment Evaluate(const JudgeRequest& request) = 0;
};

// "A", "B", ..., "Z", "AA", "AB", ...
std::string OptionLabel(std::size_t index);

std::string BuildSetwisePrompt(const JudgeRequest& request);

// Model-free prompt token proxy: ceil(bytes / 4).
std::int64_t EstimateTokens(std::string_view text);

// Canonical cache key for a comparison: hex FNV-1a over the query and the
// sorted doc ids, so it does not depend on label assignment.
std::string RequestKey(std::string_view query,
                       std::vector<std::string> doc_ids);

}  // namespace pivotrank

#endif  // PIVOTRANK_JUDGE_H_
