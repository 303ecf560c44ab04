#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace framefinder {

enum class ErrorCode {
  empty_corpus,
  io,
  encoding,
  corpus_format,
  missing_fixture,
  malformed_fixture,
  transport,
  protocol,
  remote,
  shape_mismatch,
  empty_input,
  degenerate_axis,
  zero_embedding,
  syntax,
  unbound_variable,
  duplicate_concept,
  empty_graph,
  unsupported_format,
  config,
  all_perspectives_failed,
};

constexpr std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::empty_corpus: return "EmptyCorpus";
    case ErrorCode::io: return "IoError";
    case ErrorCode::encoding: return "EncodingError";
    case ErrorCode::corpus_format: return "CorpusFormatError";
    case ErrorCode::missing_fixture: return "MissingFixture";
    case ErrorCode::malformed_fixture: return "MalformedFixture";
    case ErrorCode::transport: return "TransportError";
    case ErrorCode::protocol: return "ProtocolError";
    case ErrorCode::remote: return "RemoteError";
    case ErrorCode::shape_mismatch: return "ShapeMismatch";
    case ErrorCode::empty_input: return "EmptyInput";
    case ErrorCode::degenerate_axis: return "DegenerateAxis";
    case ErrorCode::zero_embedding: return "ZeroEmbedding";
    case ErrorCode::syntax: return "SyntaxError";
    case ErrorCode::unbound_variable: return "UnboundVariable";
    case ErrorCode::duplicate_concept: return "DuplicateConcept";
    case ErrorCode::empty_graph: return "EmptyGraph";
    case ErrorCode::unsupported_format: return "UnsupportedFormat";
    case ErrorCode::config: return "ConfigError";
    case ErrorCode::all_perspectives_failed: return "AllPerspectivesFailed";
  }
  return "Error";
}

/// Base of every exception thrown by the library. `code()` identifies the
/// failure class so callers (the CLI, the service) can map it without
/// string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view name() const noexcept { return error_name(code_); }

 private:
  ErrorCode code_;
};

template <ErrorCode Code>
class CodedError : public Error {
 public:
  explicit CodedError(const std::string& message) : Error(Code, message) {}
};

using EmptyCorpus = CodedError<ErrorCode::empty_corpus>;
using IoError = CodedError<ErrorCode::io>;
using EncodingError = CodedError<ErrorCode::encoding>;
using CorpusFormatError = CodedError<ErrorCode::corpus_format>;
using TransportError = CodedError<ErrorCode::transport>;
using ProtocolError = CodedError<ErrorCode::protocol>;
using RemoteError = CodedError<ErrorCode::remote>;
using ShapeMismatch = CodedError<ErrorCode::shape_mismatch>;
using EmptyInput = CodedError<ErrorCode::empty_input>;
using DegenerateAxis = CodedError<ErrorCode::degenerate_axis>;
using ZeroEmbedding = CodedError<ErrorCode::zero_embedding>;
using UnboundVariable = CodedError<ErrorCode::unbound_variable>;
using DuplicateConcept = CodedError<ErrorCode::duplicate_concept>;
using EmptyGraph = CodedError<ErrorCode::empty_graph>;
using UnsupportedFormat = CodedError<ErrorCode::unsupported_format>;
using ConfigError = CodedError<ErrorCode::config>;
using AllPerspectivesFailed = CodedError<ErrorCode::all_perspectives_failed>;

class MissingFixture : public Error {
 public:
  explicit MissingFixture(std::string id)
      : Error(ErrorCode::missing_fixture, "no fixture record for document '" + id + "'"),
        id_(std::move(id)) {}
  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

class MalformedFixture : public Error {
 public:
  MalformedFixture(std::string file, std::size_t line, const std::string& what)
      : Error(ErrorCode::malformed_fixture,
              file + ":" + std::to_string(line) + ": " + what),
        file_(std::move(file)),
        line_(line) {}
  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

/// PENMAN syntax error. `position()` is a zero-based byte offset into the
/// parsed text.
class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t position, std::string expected, std::string_view found = {})
      : Error(ErrorCode::syntax, describe(position, expected, found)),
        position_(position),
        expected_(std::move(expected)) {}

  std::size_t position() const noexcept { return position_; }
  const std::string& expected() const noexcept { return expected_; }

 private:
  static std::string describe(std::size_t position, const std::string& expected,
                              std::string_view found) {
    std::string msg = "syntax error at offset " + std::to_string(position) +
                      ": expected " + expected;
    if (!found.empty()) msg += ", found '" + std::string(found) + "'";
    return msg;
  }

  std::size_t position_;
  std::string expected_;
};

}  // namespace framefinder
