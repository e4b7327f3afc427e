#include "dartwin/workspace.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace dartwin {

namespace fs = std::filesystem;

namespace {

bool is_model_file(const fs::path& p) {
  const auto ext = p.extension().string();
  return ext == ".dartwin" || ext == ".sysml";
}

std::string canonical_name(const fs::path& p) {
  std::error_code ec;
  const fs::path c = fs::weakly_canonical(p, ec);
  return ec ? p.lexically_normal().string() : c.string();
}

}  // namespace

std::uint32_t Workspace::add_source(std::string path, std::string text) {
  const std::uint32_t id = sources_.add(std::move(path), std::move(text));
  ParseResult parsed = parse(sources_.file(id).text(), id);
  trees_.push_back(std::move(parsed.tree));
  parse_diagnostics_.insert(parse_diagnostics_.end(), parsed.diagnostics.begin(), parsed.diagnostics.end());
  loaded_.emplace_back();
  model_.reset();
  return id;
}

std::uint32_t Workspace::load_file(const fs::path& path) {
  const std::string key = canonical_name(path);
  if (auto it = std::find(loaded_.begin(), loaded_.end(), key); it != loaded_.end()) {
    return static_cast<std::uint32_t>(it - loaded_.begin());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in || fs::is_directory(path)) {
    throw Error(ErrorCode::malformed_input, "cannot read '" + path.string() + "'");
  }
  std::ostringstream text;
  text << in.rdbuf();
  const std::uint32_t id = add_source(path.string(), text.str());
  loaded_[id] = key;
  return id;
}

void Workspace::load_siblings(const fs::path& path) {
  fs::path dir = path.parent_path();
  if (dir.empty()) dir = ".";
  std::error_code ec;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && is_model_file(entry.path())) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) load_file(f);
}

void Workspace::load_library(const fs::path& path) {
  if (!fs::is_directory(path)) {
    load_file(path);
    return;
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(path)) {
    if (entry.is_regular_file() && is_model_file(entry.path())) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) load_file(f);
}

const SemanticModel& Workspace::model() {
  if (!model_) model_ = build_model(std::span<const SourceTree>(trees_));
  return *model_;
}

std::vector<Diagnostic> Workspace::diagnostics(const std::optional<std::set<std::uint32_t>>& files) {
  std::vector<Diagnostic> all = parse_diagnostics_;
  const SemanticModel& m = model();
  all.insert(all.end(), m.diagnostics().begin(), m.diagnostics().end());
  const auto checked = validate(m);
  all.insert(all.end(), checked.begin(), checked.end());
  if (files) {
    std::erase_if(all, [&](const Diagnostic& d) { return !files->count(d.span.file); });
  }
  std::stable_sort(all.begin(), all.end(), [](const Diagnostic& a, const Diagnostic& b) {
    return std::tie(a.span.file, a.span.begin) < std::tie(b.span.file, b.span.begin);
  });
  return all;
}

ElementId Workspace::lookup(std::string_view qualified) {
  return resolve(make_name(qualified), std::nullopt, model());
}

std::vector<ElementId> Workspace::roots_in(std::uint32_t file) {
  std::vector<ElementId> out;
  const SemanticModel& m = model();
  for (ElementId r : m.roots()) {
    if (m.element(r).span.file == file) out.push_back(r);
  }
  return out;
}

}  // namespace dartwin
