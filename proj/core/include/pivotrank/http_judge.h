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

#ifndef PIVOTRANK_HTTP_JUDGE_H_
#define PIVOTRANK_HTTP_JUDGE_H_

#include <chrono>
#include <memory>
#include <semaphore>
#include <string>

#include "pivotrank/judge.h"

namespace pivotrank {

inline constexpr char kJudgeUrlEnv[] = "REALM_JUDGE_URL";

struct HttpJudgeConfig {
  // e.g. "http://localhost:8080/judge".
  std::string url;
  std::chrono::milliseconds timeout{60'000};
  int max_attempts = 3;
  std::chrono::milliseconds backoff_base{500};
  int max_in_flight = 4;
  std::size_t max_passages = kDefaultMaxPassages;

  // Fills `url` from REALM_JUDGE_URL when it is empty.
  static HttpJudgeConfig FromEnvironment(HttpJudgeConfig base);
};

// Remote judge speaking the JSON scores protocol:
//   POST {"query", "passages": [{"label", "text"}], "prompt"}
//   200  {"scores": [real...], "prompt_tokens"?: int}
// Transport failures and 5xx responses are retried with exponential backoff
// (base, 2*base, ...). Timeouts and malformed responses fail immediately.
class HttpJudge : public Judge {
 public:
  explicit HttpJudge(HttpJudgeConfig config);
  ~HttpJudge() override;

  SetwiseJudgment Evaluate(const JudgeRequest& request) override;

 private:
  struct Endpoint;

  SetwiseJudgment ParseResponse(const JudgeRequest& request,
                                const std::string& prompt,
                                const std::string& body) const;

  HttpJudgeConfig config_;
  std::unique_ptr<Endpoint> endpoint_;
  std::counting_semaphore<> in_flight_;
};

}  // namespace pivotrank

#endif  // PIVOTRANK_HTTP_JUDGE_H_
