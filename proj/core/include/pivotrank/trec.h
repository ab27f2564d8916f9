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

#ifndef PIVOTRANK_TREC_H_
#define PIVOTRANK_TREC_H_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pivotrank {

// One row of a TREC run: "qid Q0 docid rank score tag".
struct RunRecord {
  std::string query_id;
  std::string doc_id;
  int rank = 0;
  double score = 0.0;
  std::string tag;

  bool operator==(const RunRecord&) const = default;
};

// One row of a TREC qrels file: "qid iter docid rel".
struct QrelRecord {
  std::string query_id;
  std::string doc_id;
  int relevance = 0;
};

// A problem found while parsing. Errors drop the offending line; warnings
// describe a normalization that was applied.
struct ParseIssue {
  enum class Severity { kWarning, kError };
  Severity severity = Severity::kError;
  int line = 0;  // 0 when not tied to a single line
  std::string message;
};

struct RunFile {
  // Per query, sorted by rank with ranks renumbered 1..n.
  std::map<std::string, std::vector<RunRecord>> queries;
  std::vector<ParseIssue> issues;

  bool has_errors() const;
};

using Qrels = std::map<std::string, std::map<std::string, int>>;

struct QrelsFile {
  Qrels judgments;
  std::vector<ParseIssue> issues;
};

// Throws std::runtime_error when the file cannot be opened. Malformed lines
// are reported in `issues` and skipped; other queries are unaffected.
RunFile ParseRunFile(const std::filesystem::path& path,
                     std::optional<std::size_t> truncate_to = std::nullopt);
RunFile ReadRun(std::istream& in,
                std::optional<std::size_t> truncate_to = std::nullopt);

QrelsFile ParseQrelsFile(const std::filesystem::path& path);
QrelsFile ReadQrels(std::istream& in);

// Two-column TSV "id<TAB>text", used for both corpora and query sets.
std::map<std::string, std::string> ParseTsvFile(const std::filesystem::path& path);

void WriteRunRecords(std::ostream& out, const std::vector<RunRecord>& records);
std::string FormatRunRecord(const RunRecord& record);

}  // namespace pivotrank

#endif  // PIVOTRANK_TREC_H_
