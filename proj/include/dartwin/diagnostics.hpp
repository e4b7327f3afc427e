#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dartwin {

/// Half-open byte range [begin, end) inside one source file.
struct Span {
  std::uint32_t file = 0;
  std::size_t begin = 0;
  std::size_t end = 0;

  bool contains(const Span& other) const {
    return file == other.file && begin <= other.begin && other.end <= end;
  }
};

enum class Severity { error, warning, note };

std::string_view to_string(Severity severity);

struct Diagnostic {
  Severity severity = Severity::error;
  Span span;
  std::string code;  // e.g. "ParseError", "UnresolvedName"
  std::string message;
};

bool has_errors(const std::vector<Diagnostic>& diagnostics);

struct LineColumn {
  std::size_t line = 1;
  std::size_t column = 1;
};

class SourceFile {
 public:
  SourceFile(std::string path, std::string text);

  const std::string& path() const { return path_; }
  const std::string& text() const { return text_; }
  LineColumn locate(std::size_t offset) const;

 private:
  std::string path_;
  std::string text_;
  std::vector<std::size_t> line_starts_;
};

/// Owns every loaded source text; file ids index into it.
class SourceManager {
 public:
  std::uint32_t add(std::string path, std::string text);
  const SourceFile& file(std::uint32_t id) const { return files_.at(id); }
  std::size_t size() const { return files_.size(); }

  /// Renders `file:line:col: severity: message`.
  std::string format(const Diagnostic& diagnostic) const;

 private:
  std::vector<SourceFile> files_;
};

enum class ErrorCode {
  specialization_cycle,
  ambiguous_name,
  unresolved_name,
  dangling_endpoint,
  invalid_argument,
  layout_overflow,
  malformed_input,
  invariant_violation,
};

std::string_view to_string(ErrorCode code);

/// Thrown by the flattening, transformation and rendering stages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dartwin
