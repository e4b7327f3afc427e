#include "dartwin/diagnostics.hpp"

#include <algorithm>

namespace dartwin {

std::string_view to_string(Severity severity) {
  switch (severity) {
    case Severity::error:
      return "error";
    case Severity::warning:
      return "warning";
    case Severity::note:
      return "note";
  }
  return "error";
}

bool has_errors(const std::vector<Diagnostic>& diagnostics) {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::error; });
}

SourceFile::SourceFile(std::string path, std::string text)
    : path_(std::move(path)), text_(std::move(text)) {
  line_starts_.push_back(0);
  for (std::size_t i = 0; i < text_.size(); ++i) {
    if (text_[i] == '\n') line_starts_.push_back(i + 1);
  }
}

LineColumn SourceFile::locate(std::size_t offset) const {
  auto it = std::upper_bound(line_starts_.begin(), line_starts_.end(), offset);
  const std::size_t line = static_cast<std::size_t>(it - line_starts_.begin());
  return {line, offset - line_starts_[line - 1] + 1};
}

std::uint32_t SourceManager::add(std::string path, std::string text) {
  files_.emplace_back(std::move(path), std::move(text));
  return static_cast<std::uint32_t>(files_.size() - 1);
}

std::string SourceManager::format(const Diagnostic& diagnostic) const {
  std::string out;
  if (diagnostic.span.file < files_.size()) {
    const SourceFile& f = files_[diagnostic.span.file];
    const LineColumn lc = f.locate(diagnostic.span.begin);
    out = f.path() + ":" + std::to_string(lc.line) + ":" + std::to_string(lc.column) + ": ";
  } else {
    out = "<unknown>:0:0: ";
  }
  out += to_string(diagnostic.severity);
  out += ": ";
  out += diagnostic.message;
  return out;
}

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::specialization_cycle:
      return "SpecializationCycle";
    case ErrorCode::ambiguous_name:
      return "AmbiguousName";
    case ErrorCode::unresolved_name:
      return "UnresolvedName";
    case ErrorCode::dangling_endpoint:
      return "DanglingEndpoint";
    case ErrorCode::invalid_argument:
      return "InvalidArgument";
    case ErrorCode::layout_overflow:
      return "LayoutOverflow";
    case ErrorCode::malformed_input:
      return "MalformedInput";
    case ErrorCode::invariant_violation:
      return "InvariantViolation";
  }
  return "Error";
}

}  // namespace dartwin
