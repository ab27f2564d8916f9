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

#include "pivotrank/http_judge.h"

#include <cmath>
#include <cstdlib>
#include <regex>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "httplib.h"
#include "json.hpp"
#include "pivotrank/belief.h"

namespace pivotrank {

using nlohmann::json;

struct HttpJudge::Endpoint {
  std::string scheme_host_port;
  std::string path;
};

namespace {

// Releases a semaphore slot on scope exit.
class SlotGuard {
 public:
  explicit SlotGuard(std::counting_semaphore<>& sem) : sem_(sem) { sem_.acquire(); }
  ~SlotGuard() { sem_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  std::counting_semaphore<>& sem_;
};

}  // namespace

HttpJudgeConfig HttpJudgeConfig::FromEnvironment(HttpJudgeConfig base) {
  if (base.url.empty()) {
    if (const char* env = std::getenv(kJudgeUrlEnv); env != nullptr) {
      base.url = env;
    }
  }
  return base;
}

HttpJudge::HttpJudge(HttpJudgeConfig config)
    : config_(std::move(config)),
      in_flight_(std::max(1, config_.max_in_flight)) {
  static const std::regex kUrl(R"(^(http://[^/]+)(/.*)?$)");
  std::smatch match;
  if (!std::regex_match(config_.url, match, kUrl)) {
    throw InvalidArgument(fmt::format(
        "judge url '{}' must look like http://host[:port]/path", config_.url));
  }
  if (config_.max_attempts < 1) throw InvalidArgument("max_attempts must be >= 1");
  endpoint_ = std::make_unique<Endpoint>(
      Endpoint{match[1].str(), match[2].matched ? match[2].str() : "/"});
}

HttpJudge::~HttpJudge() = default;

SetwiseJudgment HttpJudge::ParseResponse(const JudgeRequest& request,
                                         const std::string& prompt,
                                         const std::string& body) const {
  json response;
  try {
    response = json::parse(body);
  } catch (const json::parse_error& e) {
    throw JudgeMalformedResponse(fmt::format("judge response is not JSON: {}", e.what()));
  }
  if (!response.is_object() || !response.contains("scores") ||
      !response["scores"].is_array()) {
    throw JudgeMalformedResponse("judge response lacks a \"scores\" array");
  }
  const json& scores = response["scores"];
  if (scores.size() != request.passages.size()) {
    throw JudgeMalformedResponse(
        fmt::format("judge returned {} scores for {} passages", scores.size(),
                    request.passages.size()));
  }
  SetwiseJudgment judgment;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!scores[i].is_number()) {
      throw JudgeMalformedResponse(fmt::format("score {} is not a number", i));
    }
    const double value = scores[i].get<double>();
    if (!std::isfinite(value)) {
      throw JudgeMalformedResponse(fmt::format("score {} is not finite", i));
    }
    judgment.labels.push_back(request.passages[i].label);
    judgment.scores.push_back(value);
  }
  if (response.contains("prompt_tokens") &&
      response["prompt_tokens"].is_number_integer()) {
    judgment.token_estimate = response["prompt_tokens"].get<std::int64_t>();
  } else {
    judgment.token_estimate = EstimateTokens(prompt);
  }
  return judgment;
}

SetwiseJudgment HttpJudge::Evaluate(const JudgeRequest& request) {
  request.Validate(config_.max_passages);
  const std::string prompt = BuildSetwisePrompt(request);
  json payload;
  payload["query"] = request.query;
  payload["passages"] = json::array();
  for (const Passage& p : request.passages) {
    payload["passages"].push_back({{"label", p.label}, {"text", p.text}});
  }
  payload["prompt"] = prompt;
  const std::string body = payload.dump();

  SlotGuard slot(in_flight_);
  httplib::Client client(endpoint_->scheme_host_port);
  const auto seconds = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout);
  client.set_connection_timeout(seconds);
  client.set_read_timeout(seconds);
  client.set_write_timeout(seconds);

  std::string last_error;
  for (int attempt = 0; attempt < config_.max_attempts; ++attempt) {
    if (attempt > 0) {
      const auto delay = config_.backoff_base * (1 << (attempt - 1));
      spdlog::warn("judge attempt {} failed ({}); retrying in {} ms", attempt,
                   last_error, delay.count());
      std::this_thread::sleep_for(delay);
    }
    const auto start = std::chrono::steady_clock::now();
    httplib::Result result =
        client.Post(endpoint_->path, body, "application/json");
    const auto elapsed = std::chrono::steady_clock::now() - start;

    if (!result) {
      const httplib::Error error = result.error();
      if (error == httplib::Error::ConnectionTimeout ||
          (error == httplib::Error::Read && elapsed >= config_.timeout)) {
        throw JudgeTimeout(fmt::format("judge call timed out after {} ms",
                                       config_.timeout.count()));
      }
      last_error = httplib::to_string(error);
      continue;
    }
    if (result->status >= 500) {
      last_error = fmt::format("HTTP {}", result->status);
      continue;
    }
    if (result->status != 200) {
      throw JudgeMalformedResponse(
          fmt::format("judge answered HTTP {}: {}", result->status, result->body));
    }
    SetwiseJudgment judgment = ParseResponse(request, prompt, result->body);
    judgment.retry_count = attempt;
    return judgment;
  }
  throw JudgeRetriesExhausted(
      fmt::format("judge failed after {} attempts: {}", config_.max_attempts,
                  last_error),
      config_.max_attempts);
}

}  // namespace pivotrank
