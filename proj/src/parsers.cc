// Copyright 2026 The thoughtnav Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "thoughtnav/parsers.h"

#include <algorithm>
#include <regex>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "thoughtnav/errors.h"

namespace thoughtnav {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

int aspect_from_label(char major, char minor) {
  const char m = static_cast<char>(std::toupper(static_cast<unsigned char>(major)));
  static constexpr std::array<std::string_view, kNumAspects> kLabels = {
      "A1", "A2", "A3", "B1", "B2", "C1", "C2"};
  for (int i = 0; i < kNumAspects; ++i) {
    if (kLabels[i][0] == m && kLabels[i][1] == minor) return i;
  }
  return -1;
}

std::vector<std::string> split_numbered(std::string_view text, const std::regex& marker,
                                        const char* what) {
  const std::string s(text);
  struct Piece {
    int index;
    std::size_t begin;
    std::size_t content;
  };
  std::vector<Piece> pieces;
  for (auto it = std::sregex_iterator(s.begin(), s.end(), marker);
       it != std::sregex_iterator(); ++it) {
    pieces.push_back({std::stoi(it->str(1)), static_cast<std::size_t>(it->position()),
                      static_cast<std::size_t>(it->position() + it->length())});
  }
  if (pieces.empty()) throw ParseError(fmt::format("no {} markers found", what));

  std::vector<std::pair<int, std::string>> items;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const std::size_t end = i + 1 < pieces.size() ? pieces[i + 1].begin : s.size();
    items.emplace_back(pieces[i].index,
                       trim(std::string_view(s).substr(pieces[i].content,
                                                       end - pieces[i].content)));
  }
  if (!std::is_sorted(items.begin(), items.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; })) {
    spdlog::warn("{} markers out of order; reordering by index", what);
    std::stable_sort(items.begin(), items.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
  }
  std::vector<std::string> out;
  out.reserve(items.size());
  for (auto& [index, body] : items) out.push_back(std::move(body));
  return out;
}

}  // namespace

int SelfEvalReport::found_count() const {
  return static_cast<int>(std::count_if(aspects.begin(), aspects.end(),
                                        [](const AspectScore& a) { return a.found; }));
}

std::vector<int> SelfEvalReport::missing() const {
  std::vector<int> out;
  for (int i = 0; i < kNumAspects; ++i) {
    if (!aspects[i].found) out.push_back(i);
  }
  return out;
}

StateVector SelfEvalReport::state() const {
  std::array<int, kNumAspects> scores{};
  for (int i = 0; i < kNumAspects; ++i) scores[i] = aspects[i].found ? aspects[i].score : 0;
  return StateVector(scores);
}

SelfEvalReport parse_self_eval(std::string_view text) {
  static const std::regex kMarker(
      R"(\b([ABCabc])\s*([1-3])\s*\**\s*[:\)\]\.-]?\s*\**\s*score\s*[=:]\s*\[?\s*(\d+)\s*\]?)",
      std::regex::icase);
  static const std::regex kReason(R"(^\s*,?\s*\**\s*reason\s*[=:]\s*\[?\s*([^\n]*))",
                                  std::regex::icase);
  SelfEvalReport report;
  report.raw = std::string(text);
  const std::string& s = report.raw;
  bool any = false;
  for (auto it = std::sregex_iterator(s.begin(), s.end(), kMarker);
       it != std::sregex_iterator(); ++it) {
    const int aspect = aspect_from_label(it->str(1)[0], it->str(2)[0]);
    if (aspect < 0) continue;
    const int score = std::stoi(it->str(3).substr(0, 3));
    if (score > 3) {
      spdlog::warn("ignoring out-of-range score {} for {}", score, aspect_label(aspect));
      continue;
    }
    any = true;
    AspectScore& slot = report.aspects[aspect];
    if (slot.found) continue;
    slot.found = true;
    slot.score = score;
    const std::string rest = s.substr(static_cast<std::size_t>(it->position() + it->length()));
    std::smatch m;
    if (std::regex_search(rest, m, kReason)) {
      std::string reason = trim(m.str(1));
      if (!reason.empty() && reason.back() == ']') reason.pop_back();
      slot.reason = trim(reason);
    }
  }
  if (!any) throw MalformedEvaluationError("self-evaluation contains no score markers");
  return report;
}

std::vector<std::string> parse_subtasks(std::string_view text) {
  static const std::regex kMarker(R"(#{2,}\s*Subtask\s*(\d+)\s*:)", std::regex::icase);
  return split_numbered(text, kMarker, "subtask");
}

std::vector<std::string> parse_plans(std::string_view text) {
  static const std::regex kMarker(R"(#{2,}\s*Plan\s*(\d+)\s*:)", std::regex::icase);
  return split_numbered(text, kMarker, "plan");
}

int parse_plan_choice(std::string_view text, int plan_count) {
  static const std::regex kChoice(
      R"(most\s+promising\s+plan\s+is\s*:?\s*\**\s*Plan\s*\[?\s*(\d+))", std::regex::icase);
  const std::string s(text);
  std::smatch m;
  if (!std::regex_search(s, m, kChoice)) {
    throw ParseError("plan choice marker not found");
  }
  const int index = std::stoi(m.str(1).substr(0, 6));
  if (index < 1 || index > plan_count) {
    throw ParseError(fmt::format("plan index {} outside 1..{}", index, plan_count));
  }
  return index;
}

}  // namespace thoughtnav
