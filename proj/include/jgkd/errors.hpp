// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace jgkd {

// Exit-code families used by the command line front end.
enum class ErrorKind { kValidation = 1, kNumeric = 2, kIo = 3 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct ValidationError : Error {
  explicit ValidationError(const std::string& what) : Error(ErrorKind::kValidation, what) {}
};

struct ShapeError : Error {
  explicit ShapeError(const std::string& what) : Error(ErrorKind::kValidation, what) {}
};

struct IndexError : Error {
  explicit IndexError(const std::string& what) : Error(ErrorKind::kValidation, what) {}
};

struct SchemaError : Error {
  explicit SchemaError(const std::string& what) : Error(ErrorKind::kValidation, what) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorKind::kValidation, what) {}
};

struct ContractError : Error {
  explicit ContractError(const std::string& what) : Error(ErrorKind::kValidation, what) {}
};

struct NumericError : Error {
  explicit NumericError(const std::string& what) : Error(ErrorKind::kNumeric, what) {}
};

struct DeterminismError : Error {
  explicit DeterminismError(const std::string& what) : Error(ErrorKind::kNumeric, what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error(ErrorKind::kIo, what) {}
};

struct FormatError : Error {
  explicit FormatError(const std::string& what) : Error(ErrorKind::kIo, what) {}
};

struct ParseError : Error {
  explicit ParseError(const std::string& what) : Error(ErrorKind::kIo, what) {}
};

}  // namespace jgkd
