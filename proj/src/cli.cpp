#include "dartwin/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "dartwin/dartrans.hpp"
#include "dartwin/flatten.hpp"
#include "dartwin/render.hpp"
#include "dartwin/workspace.hpp"

namespace dartwin::cli {

namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Inputs fail with this after their diagnostics have been printed.
struct Reported {
  int code;
};

struct Options {
  std::vector<std::string> inputs;
  std::vector<std::string> libs;
  std::string output;
  std::string target;
  std::string pattern;
  std::string binding;
  std::string style;
  bool json = false;
  bool emit_steps = false;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::malformed_input, "cannot read '" + path.string() + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_atomically(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path partial = path.string() + ".partial";
  {
    std::ofstream out(partial, std::ios::binary | std::ios::trunc);
    out << content;
    out.flush();
    if (!out) {
      std::error_code ignored;
      fs::remove(partial, ignored);
      throw Error(ErrorCode::malformed_input, "cannot write '" + path.string() + "'");
    }
  }
  fs::rename(partial, path);
}

class Session {
 public:
  Session(const Options& options, std::ostream& out, std::ostream& err) : opt_(options), out_(out), err_(err) {}

  /// Loads inputs, their sibling files and libraries; stops on input errors.
  void load(bool report_all) {
    for (const auto& input : opt_.inputs) {
      if (!fs::is_regular_file(input)) throw UsageError("input file '" + input + "' does not exist");
      inputs_.insert(ws_.load_file(input));
    }
    for (const auto& input : opt_.inputs) ws_.load_siblings(input);
    for (const auto& lib : opt_.libs) {
      if (!fs::exists(lib)) throw UsageError("library '" + lib + "' does not exist");
      ws_.load_library(lib);
    }
    if (!opt_.pattern.empty() && fs::is_regular_file(opt_.pattern)) pattern_file_ = ws_.load_file(opt_.pattern);

    const auto diagnostics = ws_.diagnostics(inputs_);
    for (const Diagnostic& d : diagnostics) {
      if (report_all || d.severity == Severity::error) err_ << ws_.format(d) << "\n";
    }
    if (has_errors(diagnostics)) throw Reported{diagnostics_failed};
  }

  Workspace& workspace() { return ws_; }

  std::vector<ElementId> input_roots() {
    std::vector<ElementId> out;
    for (std::uint32_t f : inputs_) {
      for (ElementId r : ws_.roots_in(f)) out.push_back(r);
    }
    return out;
  }

  template <typename Pred>
  ElementId pick(Pred accept, std::string_view what) {
    if (!opt_.target.empty()) {
      const ElementId id = ws_.lookup(opt_.target);
      if (!accept(ws_.model().element(id).kind)) {
        throw Error(ErrorCode::invalid_argument, "'" + opt_.target + "' is not a " + std::string(what));
      }
      return id;
    }
    for (ElementId r : input_roots()) {
      if (accept(ws_.model().element(r).kind)) return r;
    }
    throw Error(ErrorCode::invalid_argument, "no " + std::string(what) + " in the input; name one with --target");
  }

  ElementId pattern() {
    if (pattern_file_) {
      const auto roots = ws_.roots_in(*pattern_file_);
      std::optional<ElementId> first;
      for (ElementId r : roots) {
        const Element& e = ws_.model().element(r);
        if (e.kind != ElementKind::DarTrans) continue;
        if (e.name == fs::path(opt_.pattern).stem().string()) return r;
        if (!first) first = r;
      }
      if (first) return *first;
      throw Error(ErrorCode::invalid_argument, "'" + opt_.pattern + "' declares no #dartrans");
    }
    const ElementId id = ws_.lookup(opt_.pattern);
    if (ws_.model().element(id).kind != ElementKind::DarTrans) {
      throw Error(ErrorCode::invalid_argument, "'" + opt_.pattern + "' is not a #dartrans");
    }
    return id;
  }

  void emit(const std::string& content, const std::string& path = {}) {
    const std::string& target = path.empty() ? opt_.output : path;
    if (target.empty()) {
      out_ << content;
    } else {
      write_atomically(target, content);
    }
  }

  Style style() const {
    std::string path = opt_.style;
    if (path.empty()) {
      if (const char* env = std::getenv("DARTWIN_STYLE"); env != nullptr) path = env;
    }
    if (path.empty()) return {};
    return parse_style(read_file(path), path);
  }

  std::ostream& out() { return out_; }
  std::ostream& err() { return err_; }
  const Options& options() const { return opt_; }

 private:
  const Options& opt_;
  std::ostream& out_;
  std::ostream& err_;
  Workspace ws_;
  std::set<std::uint32_t> inputs_;
  std::optional<std::uint32_t> pattern_file_;
};

bool is_dartwin(ElementKind k) { return is_dartwin_model_kind(k); }
bool is_dartrans(ElementKind k) { return k == ElementKind::DarTrans; }
bool is_renderable(ElementKind k) { return is_dartwin(k) || is_dartrans(k); }

std::string changes_table(const ChangeSet& changes) {
  std::ostringstream os;
  auto group = [&](std::string_view label, const std::set<EffectivePath>& paths) {
    for (const auto& p : paths) os << std::left << std::setw(9) << label << p << "\n";
  };
  group("removed", changes.removed);
  group("added", changes.added);
  group("modified", changes.modified);
  group("kept", changes.kept);
  os << "# " << changes.kept.size() << " kept, " << changes.removed.size() << " removed, " << changes.added.size()
     << " added, " << changes.modified.size() << " modified\n";
  return os.str();
}

int cmd_check(Session& s) {
  s.load(true);
  return ok;
}

int cmd_flatten(Session& s) {
  s.load(false);
  const SemanticModel& model = s.workspace().model();
  const ElementId id = s.pick(is_dartwin, "#dartwin");
  const EffectiveModel effective = flatten(id, model);
  s.emit(s.options().json ? effective_json(effective, model) : print(finalize(effective)));
  return ok;
}

int cmd_diff(Session& s) {
  s.load(false);
  const SemanticModel& model = s.workspace().model();
  const ChangeSet changes = diff(s.pick(is_dartrans, "#dartrans"), model);
  for (const Diagnostic& d : changes.notes) s.err() << s.workspace().format(d) << "\n";
  s.emit(s.options().json ? changeset_json(changes) : changes_table(changes));
  return ok;
}

int cmd_apply(Session& s) {
  const Options& o = s.options();
  if (o.emit_steps && o.output.empty()) throw UsageError("--emit-steps needs -o");
  if (o.json && o.output.empty()) throw UsageError("--json on apply needs -o for the evolved model");
  s.load(false);
  const SemanticModel& model = s.workspace().model();
  const ElementId pattern = s.pattern();
  const ElementId target = s.pick(is_dartwin, "#dartwin");
  const Binding binding = parse_binding(read_file(o.binding), o.binding);

  const ApplyResult result = apply_transformation(pattern, target, binding, model);
  if (!result.report.ok) {
    for (const Violation& v : result.report.violations) {
      s.err() << o.binding << ": error: " << v.pattern_path << ": " << to_string(v.reason) << ": " << v.message
              << "\n";
    }
    return diagnostics_failed;
  }
  s.emit(print(result.final_tree));
  if (o.emit_steps) {
    const fs::path out(o.output);
    const fs::path dir = out.parent_path();
    const std::string stem = out.stem().string();
    const std::string ext = out.has_extension() ? out.extension().string() : ".dartwin";
    s.emit(print(result.steps.specialized), (dir / (stem + ".step2" + ext)).string());
    s.emit(print(result.steps.reduced), (dir / (stem + ".step3" + ext)).string());
    s.emit(print(result.steps.extended), (dir / (stem + ".step4" + ext)).string());
  }
  if (o.json) s.out() << changeset_json(result.changes);
  return ok;
}

int cmd_render(Session& s) {
  s.load(false);
  const SemanticModel& model = s.workspace().model();
  const Style style = s.style();
  std::vector<ElementId> targets;
  if (!s.options().target.empty()) {
    targets.push_back(s.pick(is_renderable, "#dartwin or #dartrans"));
  } else {
    for (ElementId r : s.input_roots()) {
      if (is_renderable(model.element(r).kind)) targets.push_back(r);
    }
  }
  if (targets.empty()) throw Error(ErrorCode::invalid_argument, "nothing to render in the input");

  auto render_one = [&](ElementId id) {
    return is_dartrans(model.element(id).kind) ? render_dartrans(id, model, style) : render_dartwin(id, model, style);
  };
  const std::string& output = s.options().output;
  if (targets.size() == 1 && (output.empty() || !fs::is_directory(output))) {
    s.emit(render_one(targets.front()));
    return ok;
  }
  if (output.empty()) throw UsageError("several models to render; pass -o <directory> or --target");
  std::vector<std::pair<std::string, std::string>> files;
  for (ElementId id : targets) {
    files.emplace_back((fs::path(output) / (model.qualified_name(id) + ".svg")).string(), render_one(id));
  }
  for (const auto& [path, svg] : files) s.emit(svg, path);
  return ok;
}

int cmd_export(Session& s) {
  s.load(false);
  s.emit(export_json(s.workspace().model()));
  return ok;
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"DarTwin toolchain: check, flatten, diff, apply, render and export DarTwin models", "dartwin"};
  app.require_subcommand(1, 1);
  app.set_help_all_flag("--help-all", "Show help for every command");

  Options o;
  auto inputs = [&](CLI::App* sub) {
    sub->add_option("inputs", o.inputs, "Model files (.dartwin); sibling files are loaded too")->required();
    sub->add_option("--lib", o.libs, "Extra model files or directories to load");
  };
  auto output = [&](CLI::App* sub) { sub->add_option("-o,--output", o.output, "Output file (default: stdout)"); };
  auto target = [&](CLI::App* sub, const std::string& what) {
    sub->add_option("--target", o.target, "Qualified name of the " + what);
  };

  std::map<CLI::App*, int (*)(Session&)> handlers;
  CLI::App* check = app.add_subcommand("check", "Report diagnostics");
  inputs(check);
  handlers[check] = cmd_check;

  CLI::App* flat = app.add_subcommand("flatten", "Print the flattened model");
  inputs(flat);
  output(flat);
  target(flat, "#dartwin to flatten");
  flat->add_flag("--json", o.json, "Emit JSON with provenance");
  handlers[flat] = cmd_flatten;

  CLI::App* dif = app.add_subcommand("diff", "Kept/removed/added/modified paths of a #dartrans");
  inputs(dif);
  output(dif);
  target(dif, "#dartrans");
  dif->add_flag("--json", o.json, "Emit JSON");
  handlers[dif] = cmd_diff;

  CLI::App* apply = app.add_subcommand("apply", "Apply a #dartrans pattern to a #dartwin");
  inputs(apply);
  output(apply);
  target(apply, "#dartwin to evolve");
  apply->add_option("--pattern", o.pattern, "Pattern file or qualified #dartrans name")->required();
  apply->add_option("--binding", o.binding, "Binding file")->required();
  apply->add_flag("--emit-steps", o.emit_steps, "Also write the step 2, 3 and 4 models next to the output");
  apply->add_flag("--json", o.json, "Print the change set as JSON");
  handlers[apply] = cmd_apply;

  CLI::App* render = app.add_subcommand("render", "Draw models as SVG");
  inputs(render);
  output(render);
  target(render, "#dartwin or #dartrans to draw");
  render->add_option("--style", o.style, "Style file (default: $DARTWIN_STYLE)");
  handlers[render] = cmd_render;

  CLI::App* exp = app.add_subcommand("export-json", "Dump the semantic model as JSON");
  inputs(exp);
  output(exp);
  handlers[exp] = cmd_export;

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : usage_error;
  }

  CLI::App* chosen = app.get_subcommands().front();
  Session session(o, out, err);
  try {
    return handlers.at(chosen)(session);
  } catch (const Reported& r) {
    return r.code;
  } catch (const UsageError& e) {
    err << "dartwin: " << e.what() << "\n";
    return usage_error;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::invariant_violation) {
      err << "dartwin: internal error: " << e.what() << "\n";
      return internal_error;
    }
    err << "dartwin: error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return diagnostics_failed;
  } catch (const std::exception& e) {
    err << "dartwin: internal error: " << e.what() << "\n";
    return internal_error;
  }
}

}  // namespace dartwin::cli
