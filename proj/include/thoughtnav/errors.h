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

#ifndef THOUGHTNAV_ERRORS_H_
#define THOUGHTNAV_ERRORS_H_

#include <stdexcept>
#include <string>

namespace thoughtnav {

// Broad failure categories. The CLI maps each one to a distinct exit code.
enum class ErrorCategory {
  kInput,         // bad argument, bad value, out-of-range index
  kConfig,        // missing credentials, inconsistent settings
  kData,          // dataset / checkpoint / fixture decoding
  kGateway,       // LLM or PRM endpoint failures
  kEnvironment,   // logic-block pipeline failures
  kVerification,  // convergence or oracle check failed
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}
  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class InputError : public Error {
 public:
  explicit InputError(const std::string& what)
      : Error(ErrorCategory::kInput, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(ErrorCategory::kConfig, what) {}
};

class DecodeError : public Error {
 public:
  explicit DecodeError(const std::string& what)
      : Error(ErrorCategory::kData, what) {}
};

class VersionError : public Error {
 public:
  explicit VersionError(const std::string& what)
      : Error(ErrorCategory::kData, what) {}
};

class DatasetError : public Error {
 public:
  DatasetError(const std::string& what, std::size_t line)
      : Error(ErrorCategory::kData, what), line_(line) {}
  // 1-based line number, 0 when not tied to a line.
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Gateway error family.
class GatewayError : public Error {
 public:
  explicit GatewayError(const std::string& what)
      : Error(ErrorCategory::kGateway, what) {}
};

// Timeouts, rate limits, 5xx. Retried by RetryingChatBackend.
class TransientError : public GatewayError {
 public:
  using GatewayError::GatewayError;
};

class AuthError : public GatewayError {
 public:
  using GatewayError::GatewayError;
};

class MalformedResponseError : public GatewayError {
 public:
  using GatewayError::GatewayError;
};

class RequestRejectedError : public GatewayError {
 public:
  using GatewayError::GatewayError;
};

class RetryBudgetExhausted : public GatewayError {
 public:
  RetryBudgetExhausted(const std::string& what, int attempts)
      : GatewayError(what), attempts_(attempts) {}
  int attempts() const noexcept { return attempts_; }

 private:
  int attempts_;
};

// Strict scripted backend received a prompt no rule matched.
class UnmatchedPromptError : public GatewayError {
 public:
  using GatewayError::GatewayError;
};

class MalformedEvaluationError : public Error {
 public:
  explicit MalformedEvaluationError(const std::string& what)
      : Error(ErrorCategory::kEnvironment, what) {}
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what)
      : Error(ErrorCategory::kEnvironment, what) {}
};

// A logic block could not complete; the episode is aborted.
class StepFailure : public Error {
 public:
  explicit StepFailure(const std::string& what)
      : Error(ErrorCategory::kEnvironment, what) {}
};

class VerificationError : public Error {
 public:
  explicit VerificationError(const std::string& what)
      : Error(ErrorCategory::kVerification, what) {}
};

// Failures that retrying another episode or question cannot fix: bad
// credentials, invalid configuration, a scripted fixture with no answer.
inline bool is_fatal(const Error& e) {
  return e.category() == ErrorCategory::kConfig || dynamic_cast<const AuthError*>(&e) ||
         dynamic_cast<const UnmatchedPromptError*>(&e);
}

}  // namespace thoughtnav

#endif  // THOUGHTNAV_ERRORS_H_
