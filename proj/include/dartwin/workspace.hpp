#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dartwin/diagnostics.hpp"
#include "dartwin/model.hpp"
#include "dartwin/syntax.hpp"

namespace dartwin {

/// A set of source files sharing one namespace, with a model built on demand.
class Workspace {
 public:
  /// Parses `text` as a new file. Invalidates the model.
  std::uint32_t add_source(std::string path, std::string text);

  /// Reads and parses a file once; later calls with the same file return the
  /// first id. Throws Error(malformed_input) when it cannot be read.
  std::uint32_t load_file(const std::filesystem::path& path);

  /// Loads every `.dartwin` / `.sysml` file next to `path`, in name order.
  void load_siblings(const std::filesystem::path& path);

  /// Loads a file, or every model file of a directory.
  void load_library(const std::filesystem::path& path);

  const SourceManager& sources() const { return sources_; }
  const std::vector<SourceTree>& trees() const { return trees_; }

  const SemanticModel& model();

  /// Parse, build and validation diagnostics, ordered by file and offset.
  /// With `files`, only those located in the given files.
  std::vector<Diagnostic> diagnostics(const std::optional<std::set<std::uint32_t>>& files = std::nullopt);

  std::string format(const Diagnostic& diagnostic) const { return sources_.format(diagnostic); }

  /// Resolves a root-qualified dotted name. Throws Error(unresolved_name).
  ElementId lookup(std::string_view qualified);

  /// Top-level elements declared in `file`, in source order.
  std::vector<ElementId> roots_in(std::uint32_t file);

 private:
  SourceManager sources_;
  std::vector<SourceTree> trees_;
  std::vector<Diagnostic> parse_diagnostics_;
  std::vector<std::string> loaded_;  // canonical paths by file id, empty for in-memory text
  std::optional<SemanticModel> model_;
};

}  // namespace dartwin
