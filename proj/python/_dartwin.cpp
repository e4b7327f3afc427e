#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dartwin/cli.hpp"
#include "dartwin/dartrans.hpp"
#include "dartwin/flatten.hpp"
#include "dartwin/render.hpp"
#include "dartwin/syntax.hpp"
#include "dartwin/workspace.hpp"

namespace py = pybind11;
using namespace dartwin;

namespace {

py::dict diagnostic_dict(const Diagnostic& d, const std::string& formatted) {
  py::dict out;
  out["severity"] = std::string(to_string(d.severity));
  out["code"] = d.code;
  out["message"] = d.message;
  out["text"] = formatted;
  return out;
}

py::list diagnostic_list(const std::vector<Diagnostic>& ds, const SourceManager& sources) {
  py::list out;
  for (const Diagnostic& d : ds) out.append(diagnostic_dict(d, sources.format(d)));
  return out;
}

py::dict changes_dict(const ChangeSet& c) {
  py::dict out;
  out["kept"] = c.kept;
  out["removed"] = c.removed;
  out["added"] = c.added;
  out["modified"] = c.modified;
  return out;
}

SourceManager single_source(std::string_view text) {
  SourceManager sources;
  sources.add("<memory>", std::string(text));
  return sources;
}

}  // namespace

PYBIND11_MODULE(_dartwin, m) {
  m.doc() = "DarTwin models: parsing, flattening, transformation and rendering";

  static py::exception<Error> error(m, "DartwinError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object args = py::make_tuple(std::string(to_string(e.code())), std::string(e.what()));
      PyErr_SetObject(error.ptr(), args.ptr());
    }
  });

  m.def(
      "tokenize",
      [](std::string_view text) {
        const LexResult lexed = tokenize(text);
        py::list tokens;
        for (const Token& t : lexed.tokens) tokens.append(py::make_tuple(std::string(to_string(t.kind)), t.text));
        return py::make_tuple(tokens, diagnostic_list(lexed.diagnostics, single_source(text)));
      },
      py::arg("text"), "(kind, text) pairs and lexer diagnostics.");

  m.def(
      "format_source",
      [](std::string_view text) {
        const ParseResult parsed = parse(text);
        return py::make_tuple(print(parsed.tree), diagnostic_list(parsed.diagnostics, single_source(text)));
      },
      py::arg("text"), "Canonical text of the recovered tree and parse diagnostics.");

  m.def(
      "run",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs one command line; returns (exit code, stdout, stderr).");

  py::class_<Workspace>(m, "Workspace")
      .def(py::init<>())
      .def("add_source", &Workspace::add_source, py::arg("path"), py::arg("text"))
      .def("load_file", [](Workspace& ws, const std::string& path) { return ws.load_file(path); }, py::arg("path"))
      .def("diagnostics",
           [](Workspace& ws) { return diagnostic_list(ws.diagnostics(), ws.sources()); })
      .def("roots",
           [](Workspace& ws) {
             std::vector<std::string> out;
             for (ElementId r : ws.model().roots()) out.push_back(ws.model().qualified_name(r));
             return out;
           })
      .def("kind", [](Workspace& ws, std::string_view name) {
        return std::string(to_string(ws.model().element(ws.lookup(name)).kind));
      })
      .def("flatten",
           [](Workspace& ws, std::string_view name) { return print(finalize(flatten(ws.lookup(name), ws.model()))); })
      .def("flatten_json",
           [](Workspace& ws, std::string_view name) {
             return effective_json(flatten(ws.lookup(name), ws.model()), ws.model());
           })
      .def("paths",
           [](Workspace& ws, std::string_view name) { return flatten(ws.lookup(name), ws.model()).path_set(); })
      .def("diff", [](Workspace& ws, std::string_view name) { return changes_dict(diff(ws.lookup(name), ws.model())); })
      .def(
          "apply",
          [](Workspace& ws, std::string_view pattern, std::string_view target, std::string_view binding) {
            const ApplyResult r =
                apply_transformation(ws.lookup(pattern), ws.lookup(target), parse_binding(binding), ws.model());
            py::list violations;
            for (const Violation& v : r.report.violations) {
              violations.append(py::make_tuple(v.pattern_path, std::string(to_string(v.reason)), v.message));
            }
            py::dict out;
            out["ok"] = r.report.ok;
            out["violations"] = violations;
            out["text"] = r.report.ok ? print(r.final_tree) : std::string();
            out["changes"] = changes_dict(r.changes);
            return out;
          },
          py::arg("pattern"), py::arg("target"), py::arg("binding"))
      .def(
          "render",
          [](Workspace& ws, std::string_view name, std::string_view style) {
            const Style s = parse_style(style);
            const ElementId id = ws.lookup(name);
            const SemanticModel& model = ws.model();
            return model.element(id).kind == ElementKind::DarTrans ? render_dartrans(id, model, s)
                                                                    : render_dartwin(id, model, s);
          },
          py::arg("name"), py::arg("style") = "")
      .def("export_json", [](Workspace& ws) { return export_json(ws.model()); });
}
