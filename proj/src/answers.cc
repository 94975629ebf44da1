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

#include "thoughtnav/answers.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <random>
#include <regex>

#include "thoughtnav/environment.h"
#include "thoughtnav/errors.h"

namespace thoughtnav {
namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

// Content of the brace group opening at text[open] == '{', or nullopt when
// the group is unbalanced.
std::optional<std::string> brace_group(std::string_view text, std::size_t open) {
  int depth = 0;
  for (std::size_t i = open; i < text.size(); ++i) {
    if (text[i] == '{') ++depth;
    if (text[i] == '}' && --depth == 0) {
      return std::string(text.substr(open + 1, i - open - 1));
    }
  }
  return std::nullopt;
}

std::string strip_outer_braces(std::string s) {
  s = trim(s);
  while (s.size() >= 2 && s.front() == '{' && s.back() == '}' &&
         brace_group(s, 0) == s.substr(1, s.size() - 2)) {
    s = trim(s.substr(1, s.size() - 2));
  }
  return s;
}

std::optional<std::string> extract_boxed(std::string_view text) {
  static constexpr std::string_view kKey = "boxed{";
  const std::size_t pos = text.rfind(kKey);
  if (pos == std::string::npos) return std::nullopt;
  auto content = brace_group(text, pos + kKey.size() - 1);
  if (!content) return std::nullopt;
  if (content->find(kKey) != std::string::npos) {
    if (auto inner = extract_boxed(*content)) return inner;
  }
  return strip_outer_braces(*content);
}

// Suffix of text after the last "the answer is" (case-insensitive).
std::optional<std::string> after_last_answer_marker(std::string_view text) {
  static const std::regex kMarker(R"(the\s+(?:final\s+)?answer\s+is\s*:?)",
                                  std::regex::icase);
  const std::string s(text);
  std::optional<std::size_t> end;
  for (auto it = std::sregex_iterator(s.begin(), s.end(), kMarker);
       it != std::sregex_iterator(); ++it) {
    end = static_cast<std::size_t>(it->position() + it->length());
  }
  if (!end) return std::nullopt;
  return s.substr(*end);
}

std::optional<std::string> extract_numeric(std::string_view text) {
  auto tail = after_last_answer_marker(text);
  if (!tail) return std::nullopt;
  const std::string line = tail->substr(0, tail->find('\n'));
  if (auto boxed = extract_boxed(line)) return normalize_math_answer(*boxed);
  static const std::regex kNumber(
      R"([-+]?\$?\s*\d[\d,]*(?:\.\d+)?(?:\s*/\s*\d+(?:\.\d+)?)?|[-+]?\.\d+)");
  std::smatch m;
  if (std::regex_search(line, m, kNumber)) return normalize_math_answer(m.str());
  std::string raw = trim(line);
  while (!raw.empty() && (raw.back() == '.' || raw.back() == '!')) raw.pop_back();
  if (raw.empty()) return std::nullopt;
  return normalize_math_answer(raw);
}

std::optional<std::string> extract_choice(std::string_view text) {
  auto tail = after_last_answer_marker(text);
  if (!tail) return std::nullopt;
  static const std::regex kChoice(R"(^\s*[\(\[]?\s*([A-Za-z])\s*[\)\]]?(?![A-Za-z]))");
  std::smatch m;
  if (!std::regex_search(*tail, m, kChoice)) return std::nullopt;
  return std::string(1, static_cast<char>(std::toupper(m.str(1)[0])));
}

std::optional<std::string> extract_yes_no(std::string_view text) {
  if (auto tail = after_last_answer_marker(text)) {
    static const std::regex kYesNo(R"(^\s*[\(\[']?\s*(yes|no)\b)", std::regex::icase);
    std::smatch m;
    if (std::regex_search(*tail, m, kYesNo)) return lower(m.str(1));
  }
  // Trailing bare YES/NO, as requested by the direct prompt.
  static const std::regex kLastWord(R"(\b(yes|no)\b[\s\.\!\)\]'"]*$)", std::regex::icase);
  const std::string s(text);
  std::smatch m;
  if (std::regex_search(s, m, kLastWord)) return lower(m.str(1));
  return std::nullopt;
}

void erase_all(std::string& s, std::string_view what) {
  std::size_t pos;
  while ((pos = s.find(what)) != std::string::npos) s.erase(pos, what.size());
}

// Replaces \cmd{a}{b} with a/b for the fraction commands.
std::string flatten_fractions(std::string s) {
  for (std::string_view cmd : {"\\dfrac", "\\tfrac", "\\frac"}) {
    std::size_t pos;
    while ((pos = s.find(cmd)) != std::string::npos) {
      const std::size_t open1 = pos + cmd.size();
      if (open1 >= s.size() || s[open1] != '{') break;
      auto num = brace_group(s, open1);
      if (!num) break;
      const std::size_t open2 = open1 + num->size() + 2;
      if (open2 >= s.size() || s[open2] != '{') break;
      auto den = brace_group(s, open2);
      if (!den) break;
      s.replace(pos, open2 + den->size() + 2 - pos, *num + "/" + *den);
    }
  }
  return s;
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

std::string normalize_math_answer(std::string_view text) {
  std::string s = trim(text);
  if (auto boxed = extract_boxed(s)) s = *boxed;
  erase_all(s, "$");
  erase_all(s, "\\left");
  erase_all(s, "\\right");
  erase_all(s, "\\!");
  erase_all(s, "\\,");
  erase_all(s, "\\;");
  for (std::string_view cmd : {"\\text{", "\\mathrm{", "\\textbf{"}) {
    std::size_t pos;
    while ((pos = s.find(cmd)) != std::string::npos) {
      auto inner = brace_group(s, pos + cmd.size() - 1);
      if (!inner) break;
      s.replace(pos, cmd.size() + inner->size() + 1, *inner);
    }
  }
  s = flatten_fractions(s);
  s = strip_outer_braces(s);
  // Thousand separators between digits.
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    if (s[i] == ',' && std::isdigit(static_cast<unsigned char>(s[i - 1])) &&
        std::isdigit(static_cast<unsigned char>(s[i + 1]))) {
      s.erase(i, 1);
    }
  }
  s = trim(s);
  while (!s.empty() && s.back() == '.') s.pop_back();
  return trim(s);
}

std::optional<double> parse_numeric_answer(std::string_view text) {
  std::string s = normalize_math_answer(text);
  s.erase(std::remove_if(s.begin(), s.end(),
                         [](unsigned char c) { return std::isspace(c) || c == '{' || c == '}'; }),
          s.end());
  double value = 0.0;
  const auto slash = s.find('/');
  if (slash == std::string::npos) {
    if (parse_double(s, value)) return value;
    return std::nullopt;
  }
  double num = 0.0;
  double den = 0.0;
  if (!parse_double(std::string_view(s).substr(0, slash), num) ||
      !parse_double(std::string_view(s).substr(slash + 1), den) || den == 0.0) {
    return std::nullopt;
  }
  return num / den;
}

std::optional<std::string> extract_answer(std::string_view text, DatasetKind kind) {
  switch (kind) {
    case DatasetKind::kMathBoxed: return extract_boxed(text);
    case DatasetKind::kElementaryMathNumeric: return extract_numeric(text);
    case DatasetKind::kMultipleChoice: return extract_choice(text);
    case DatasetKind::kYesNo: return extract_yes_no(text);
  }
  return std::nullopt;
}

bool has_final_answer(std::string_view text, DatasetKind kind) {
  return extract_answer(text, kind).has_value();
}

bool answers_equivalent(std::string_view a, std::string_view b, DatasetKind kind) {
  switch (kind) {
    case DatasetKind::kMultipleChoice:
    case DatasetKind::kYesNo: {
      auto clean = [](std::string_view s) {
        std::string t = lower(trim(s));
        if (t.size() >= 2 && t.front() == '(' && t.back() == ')') {
          t = trim(t.substr(1, t.size() - 2));
        }
        return t;
      };
      return clean(a) == clean(b);
    }
    case DatasetKind::kElementaryMathNumeric:
    case DatasetKind::kMathBoxed: {
      const auto x = parse_numeric_answer(a);
      const auto y = parse_numeric_answer(b);
      if (x && y) {
        if (*x == *y) return true;
        return std::abs(*x - *y) <= 1e-9 * std::max(std::abs(*x), std::abs(*y));
      }
      return normalize_math_answer(a) == normalize_math_answer(b);
    }
  }
  return false;
}

VoteResult majority_vote(std::span<const std::string> answers, DatasetKind kind,
                         std::uint64_t seed) {
  if (answers.empty()) throw InputError("majority_vote: no candidate answers");
  VoteResult result;
  result.seed = seed;
  result.candidates.assign(answers.begin(), answers.end());

  std::vector<std::size_t> representative;  // index into answers
  std::vector<std::size_t> count;
  for (std::size_t i = 0; i < answers.size(); ++i) {
    bool placed = false;
    for (std::size_t c = 0; c < representative.size(); ++c) {
      if (answers_equivalent(answers[representative[c]], answers[i], kind)) {
        ++count[c];
        placed = true;
        break;
      }
    }
    if (!placed) {
      representative.push_back(i);
      count.push_back(1);
    }
  }
  result.classes = representative.size();
  const std::size_t best = *std::max_element(count.begin(), count.end());
  std::vector<std::size_t> tied;
  for (std::size_t c = 0; c < count.size(); ++c) {
    if (count[c] == best) tied.push_back(c);
  }
  std::size_t chosen = tied.front();
  if (tied.size() > 1) {
    Rng rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, tied.size() - 1);
    chosen = tied[pick(rng)];
    result.tie_broken = true;
  }
  result.winner = answers[representative[chosen]];
  result.winner_votes = best;
  return result;
}

}  // namespace thoughtnav
