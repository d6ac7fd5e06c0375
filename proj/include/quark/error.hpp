// Copyright 2026 The Quark Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace quark {

// Root of every error raised by the library. Subclasses identify the failing
// contract so callers (and the CLI) can map them to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input bytes: bad JSON, wrong column count, unparsable number.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Structurally valid input that violates a uniqueness or reference rule.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

// A value outside its allowed domain (negative grade, rank mismatch, alpha > 1).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Numeric data that cannot be used, e.g. a zero-norm embedding.
class DataError : public Error {
 public:
  using Error::Error;
};

// Remote service unreachable or answering non-2xx after the retry budget.
class TransportError : public Error {
 public:
  using Error::Error;
};

class ProviderError : public Error {
 public:
  ProviderError(std::string qid, const std::string& what)
      : Error("hypothesis provider failed for query '" + qid + "': " + what),
        qid_(std::move(qid)) {}

  const std::string& qid() const noexcept { return qid_; }

 private:
  std::string qid_;
};

}  // namespace quark
