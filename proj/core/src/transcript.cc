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

#include "pivotrank/transcript.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>

#include <fmt/format.h>
#include "json.hpp"

namespace pivotrank {

using nlohmann::json;

std::string TranscriptEntry::Key() const { return RequestKey(query, doc_ids); }

std::string ToJsonLine(const TranscriptEntry& entry) {
  json row;
  row["query"] = entry.query;
  row["doc_ids"] = entry.doc_ids;
  row["scores"] = entry.scores;
  row["prompt_tokens"] = entry.prompt_tokens;
  return row.dump();
}

TranscriptEntry ParseTranscriptLine(const std::string& line, int line_number) {
  auto fail = [&](const std::string& why) {
    return JudgeMalformedResponse(
        fmt::format("transcript line {}: {}", line_number, why));
  };
  json row;
  try {
    row = json::parse(line);
  } catch (const json::parse_error& e) {
    throw fail(e.what());
  }
  if (!row.is_object()) throw fail("row is not an object");
  TranscriptEntry entry;
  try {
    entry.query = row.at("query").get<std::string>();
    entry.doc_ids = row.at("doc_ids").get<std::vector<std::string>>();
    entry.scores = row.at("scores").get<std::vector<double>>();
    entry.prompt_tokens = row.value("prompt_tokens", std::int64_t{0});
  } catch (const json::exception& e) {
    throw fail(e.what());
  }
  if (entry.doc_ids.size() != entry.scores.size()) {
    throw fail(fmt::format("{} doc_ids but {} scores", entry.doc_ids.size(),
                           entry.scores.size()));
  }
  if (entry.doc_ids.size() < 2) throw fail("fewer than 2 doc_ids");
  for (double s : entry.scores) {
    if (!std::isfinite(s)) throw fail("non-finite score");
  }
  return entry;
}

void ReplayCache::Add(TranscriptEntry entry) {
  std::string key = entry.Key();
  entries_.try_emplace(std::move(key), std::move(entry));
}

const TranscriptEntry* ReplayCache::Find(const std::string& key) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

ReplayCache ReplayCache::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw JudgeError(fmt::format("cannot open transcript {}", path.string()));
  return Read(in);
}

ReplayCache ReplayCache::Read(std::istream& in) {
  ReplayCache cache;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    cache.Add(ParseTranscriptLine(line, line_number));
  }
  return cache;
}

ReplayJudge::ReplayJudge(std::shared_ptr<const ReplayCache> cache)
    : cache_(std::move(cache)) {}

SetwiseJudgment ReplayJudge::Evaluate(const JudgeRequest& request) {
  const std::string key = RequestKey(request.query, request.doc_ids());
  const TranscriptEntry* entry = cache_->Find(key);
  if (entry == nullptr) throw JudgeCacheMiss(key);

  std::unordered_map<std::string_view, double> by_doc;
  for (std::size_t i = 0; i < entry->doc_ids.size(); ++i) {
    by_doc.emplace(entry->doc_ids[i], entry->scores[i]);
  }
  SetwiseJudgment judgment;
  judgment.token_estimate = entry->prompt_tokens;
  for (const Passage& p : request.passages) {
    const auto it = by_doc.find(p.doc_id);
    if (it == by_doc.end() || entry->query != request.query ||
        by_doc.size() != request.passages.size()) {
      // Hash collision; treat as a miss rather than return foreign scores.
      throw JudgeCacheMiss(key);
    }
    judgment.labels.push_back(p.label);
    judgment.scores.push_back(it->second);
  }
  return judgment;
}

void TranscriptWriter::Record(const JudgeRequest& request,
                              const SetwiseJudgment& judgment) {
  TranscriptEntry entry;
  entry.query = request.query;
  entry.doc_ids = request.doc_ids();
  entry.scores = judgment.scores;
  entry.prompt_tokens = judgment.token_estimate;
  std::string key = entry.Key();
  std::lock_guard lock(mu_);
  entries_.try_emplace(std::move(key), std::move(entry));
}

std::vector<TranscriptEntry> TranscriptWriter::Entries() const {
  std::vector<TranscriptEntry> out;
  {
    std::lock_guard lock(mu_);
    out.reserve(entries_.size());
    for (const auto& [key, entry] : entries_) out.push_back(entry);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const TranscriptEntry& a, const TranscriptEntry& b) {
                     return a.query < b.query;
                   });
  return out;
}

void TranscriptWriter::Write(std::ostream& out) const {
  for (const TranscriptEntry& entry : Entries()) out << ToJsonLine(entry) << '\n';
}

void TranscriptWriter::Save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw JudgeError(fmt::format("cannot write transcript {}", path.string()));
  Write(out);
}

RecordingJudge::RecordingJudge(std::shared_ptr<Judge> inner,
                               std::shared_ptr<TranscriptWriter> writer)
    : inner_(std::move(inner)), writer_(std::move(writer)) {}

SetwiseJudgment RecordingJudge::Evaluate(const JudgeRequest& request) {
  SetwiseJudgment judgment = inner_->Evaluate(request);
  writer_->Record(request, judgment);
  return judgment;
}

}  // namespace pivotrank
