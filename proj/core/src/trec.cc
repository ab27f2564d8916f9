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

#include "pivotrank/trec.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace pivotrank {
namespace {

std::vector<std::string> SplitFields(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> fields;
  for (std::string field; in >> field;) fields.push_back(std::move(field));
  return fields;
}

template <typename T>
bool ParseNumber(const std::string& text, T& value) {
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  return ec == std::errc() && ptr == end;
}

bool IsBlank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

std::ifstream OpenOrThrow(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open {}", path.string()));
  return in;
}

}  // namespace

bool RunFile::has_errors() const {
  return std::any_of(issues.begin(), issues.end(), [](const ParseIssue& i) {
    return i.severity == ParseIssue::Severity::kError;
  });
}

RunFile ParseRunFile(const std::filesystem::path& path,
                     std::optional<std::size_t> truncate_to) {
  std::ifstream in = OpenOrThrow(path);
  return ReadRun(in, truncate_to);
}

RunFile ReadRun(std::istream& in, std::optional<std::size_t> truncate_to) {
  RunFile run;
  std::set<std::pair<std::string, std::string>> seen;
  auto error = [&](int line, std::string message) {
    run.issues.push_back({ParseIssue::Severity::kError, line, std::move(message)});
  };

  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (IsBlank(line)) continue;
    std::vector<std::string> f = SplitFields(line);
    if (f.size() != 6) {
      error(line_number, fmt::format("expected 6 fields, found {}", f.size()));
      continue;
    }
    RunRecord record{f[0], f[2], 0, 0.0, f[5]};
    if (!ParseNumber(f[3], record.rank)) {
      error(line_number, fmt::format("rank '{}' is not an integer", f[3]));
      continue;
    }
    if (!ParseNumber(f[4], record.score)) {
      error(line_number, fmt::format("score '{}' is not a number", f[4]));
      continue;
    }
    if (!seen.emplace(record.query_id, record.doc_id).second) {
      error(line_number, fmt::format("duplicate document {} for query {}",
                                     record.doc_id, record.query_id));
      continue;
    }
    run.queries[record.query_id].push_back(std::move(record));
  }

  for (auto& [qid, records] : run.queries) {
    const bool sorted = std::is_sorted(
        records.begin(), records.end(),
        [](const RunRecord& a, const RunRecord& b) { return a.rank < b.rank; });
    if (!sorted) {
      run.issues.push_back({ParseIssue::Severity::kWarning, 0,
                            fmt::format("query {}: ranks out of order, re-sorted", qid)});
      std::stable_sort(records.begin(), records.end(),
                       [](const RunRecord& a, const RunRecord& b) {
                         if (a.rank != b.rank) return a.rank < b.rank;
                         return a.score > b.score;
                       });
    }
    if (truncate_to && records.size() > *truncate_to) records.resize(*truncate_to);
    for (std::size_t i = 0; i < records.size(); ++i) {
      records[i].rank = static_cast<int>(i + 1);
    }
  }
  return run;
}

QrelsFile ParseQrelsFile(const std::filesystem::path& path) {
  std::ifstream in = OpenOrThrow(path);
  return ReadQrels(in);
}

QrelsFile ReadQrels(std::istream& in) {
  QrelsFile qrels;
  auto error = [&](int line, std::string message) {
    qrels.issues.push_back({ParseIssue::Severity::kError, line, std::move(message)});
  };
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (IsBlank(line)) continue;
    std::vector<std::string> f = SplitFields(line);
    if (f.size() != 4) {
      error(line_number, fmt::format("expected 4 fields, found {}", f.size()));
      continue;
    }
    int relevance = 0;
    if (!ParseNumber(f[3], relevance)) {
      error(line_number, fmt::format("relevance '{}' is not an integer", f[3]));
      continue;
    }
    if (relevance < 0) {
      error(line_number, fmt::format("negative relevance {}", relevance));
      continue;
    }
    if (!qrels.judgments[f[0]].emplace(f[2], relevance).second) {
      error(line_number, fmt::format("duplicate judgment for {} / {}", f[0], f[2]));
    }
  }
  return qrels;
}

std::map<std::string, std::string> ParseTsvFile(const std::filesystem::path& path) {
  std::ifstream in = OpenOrThrow(path);
  std::map<std::string, std::string> rows;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (IsBlank(line)) continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw std::runtime_error(fmt::format("{}:{}: expected 'id<TAB>text'",
                                           path.string(), line_number));
    }
    rows.emplace(line.substr(0, tab), line.substr(tab + 1));
  }
  return rows;
}

std::string FormatRunRecord(const RunRecord& record) {
  return fmt::format("{} Q0 {} {} {:.6f} {}", record.query_id, record.doc_id,
                     record.rank, record.score, record.tag);
}

void WriteRunRecords(std::ostream& out, const std::vector<RunRecord>& records) {
  for (const RunRecord& record : records) out << FormatRunRecord(record) << '\n';
}

}  // namespace pivotrank
