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

#ifndef PIVOTRANK_TRANSCRIPT_H_
#define PIVOTRANK_TRANSCRIPT_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "pivotrank/judge.h"

namespace pivotrank {

// One recorded judgment. JSONL row:
//   {"query": str, "doc_ids": [str], "scores": [real], "prompt_tokens": int}
struct TranscriptEntry {
  std::string query;
  std::vector<std::string> doc_ids;
  std::vector<double> scores;
  std::int64_t prompt_tokens = 0;

  std::string Key() const;
};

std::string ToJsonLine(const TranscriptEntry& entry);

// Throws JudgeMalformedResponse naming `line_number` on a bad row.
TranscriptEntry ParseTranscriptLine(const std::string& line, int line_number);

// Judgments keyed by RequestKey. Duplicate keys keep the first row.
class ReplayCache {
 public:
  void Add(TranscriptEntry entry);
  const TranscriptEntry* Find(const std::string& key) const;
  std::size_t size() const { return entries_.size(); }

  static ReplayCache Load(const std::filesystem::path& path);
  static ReplayCache Read(std::istream& in);

 private:
  std::map<std::string, TranscriptEntry> entries_;
};

// Answers only from a cache; a miss is an error naming the key.
class ReplayJudge : public Judge {
 public:
  explicit ReplayJudge(std::shared_ptr<const ReplayCache> cache);
  SetwiseJudgment Evaluate(const JudgeRequest& request) override;

 private:
  std::shared_ptr<const ReplayCache> cache_;
};

// Collects (request key -> judgment) pairs. Thread-safe; each key is stored
// once. Saving orders rows by (query, key) so output is independent of call
// interleaving.
class TranscriptWriter {
 public:
  void Record(const JudgeRequest& request, const SetwiseJudgment& judgment);
  std::vector<TranscriptEntry> Entries() const;
  void Save(const std::filesystem::path& path) const;
  void Write(std::ostream& out) const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, TranscriptEntry> entries_;
};

// Decorator that forwards to `inner` and records every judgment.
class RecordingJudge : public Judge {
 public:
  RecordingJudge(std::shared_ptr<Judge> inner,
                 std::shared_ptr<TranscriptWriter> writer);
  SetwiseJudgment Evaluate(const JudgeRequest& request) override;

 private:
  std::shared_ptr<Judge> inner_;
  std::shared_ptr<TranscriptWriter> writer_;
};

}  // namespace pivotrank

#endif  // PIVOTRANK_TRANSCRIPT_H_
