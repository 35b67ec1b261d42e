// Copyright 2026 The ADON Authors
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

#ifndef ADON_CORE_ERROR_HPP_
#define ADON_CORE_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace adon {

// Root of every error the library throws. Catch this at process boundaries.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error(what + " (line " + std::to_string(line) + ", column " +
              std::to_string(column) + ")"),
        line_(line),
        column_(column) {}

  // Byte-offset flavour, used by line-oriented JSON readers.
  static ParseError at_offset(const std::string& what, std::size_t offset) {
    ParseError e(what, 0, 0);
    e.offset_ = offset;
    e.message_ = what + " (byte offset " + std::to_string(offset) + ")";
    return e;
  }

  const char* what() const noexcept override {
    return message_.empty() ? Error::what() : message_.c_str();
  }

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  std::size_t offset() const { return offset_; }

 private:
  std::size_t line_ = 0;
  std::size_t column_ = 0;
  std::size_t offset_ = 0;
  std::string message_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

// The link (or the part of it an operation needs) is dark.
class CutLinkError : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

class NoActiveChannels : public Error {
 public:
  using Error::Error;
};

}  // namespace adon

#endif  // ADON_CORE_ERROR_HPP_
