// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <unistd.h>

#include "support.hpp"
#include "svg_probe.hpp"

using namespace dartwin;
using namespace dartwin::testing;

namespace {

constexpr double kParseBudgetSeconds = 1.0;
constexpr int kOracleModels = 250;
constexpr int kMinOracleModels = 200;
constexpr int kGeneratedTrees = 150;
constexpr int kMinGeneratedTrees = 100;
constexpr std::size_t kOrthogonalAdded = 8;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string join(const std::vector<std::string>& items, std::size_t limit = 6) {
  std::string out;
  for (std::size_t i = 0; i < items.size() && i < limit; ++i) out += (i ? "; " : "") + items[i];
  if (items.size() > limit) out += "; ... (" + std::to_string(items.size()) + " total)";
  return out;
}

std::string join(const std::set<std::string>& items, std::size_t limit = 6) {
  return join(std::vector<std::string>(items.begin(), items.end()), limit);
}

// 1 -------------------------------------------------------------------------

Outcome fixture_parsing() {
  std::vector<std::string> texts;
  for (const auto& l : listings()) texts.push_back(read_file(fixture(l.path)));
  std::vector<std::string> failures;
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const auto parsed = parse(texts[i]);
    if (!parsed.diagnostics.empty()) {
      failures.push_back(listings()[i].label + ": " + std::to_string(parsed.diagnostics.size()) + " diagnostics");
    }
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  Outcome o;
  o.pass = failures.empty() && texts.size() == 8 && seconds < kParseBudgetSeconds;
  o.detail = std::to_string(texts.size()) + " listings, " + std::to_string(seconds * 1000.0) + " ms (budget " +
             std::to_string(kParseBudgetSeconds) + " s)";
  if (!failures.empty()) o.detail += "; " + join(failures);
  return o;
}

// 2 -------------------------------------------------------------------------

Outcome flattening_fidelity() {
  // Two goals, DT1 with three ports, DT2 with two, AT with four, five
  // connections and two allocations.
  const std::set<std::string> expected = {
      "Goal1", "Goal2", "TwinSystem", "TwinSystem.DT1", "TwinSystem.DT1.p11", "TwinSystem.DT1.p12",
      "TwinSystem.DT1.p13", "TwinSystem.DT2", "TwinSystem.DT2.p21", "TwinSystem.DT2.p22", "AT", "AT.ts1", "AT.ts2",
      "AT.ts3", "AT.ts4", "TwinSystem.c1", "TwinSystem.c2", "TwinSystem.c3", "TwinSystem.c4", "TwinSystem.c5", "a1",
      "a2"};
  Workspace ws = basic_workspace();
  const auto got =
      flatten(ws.lookup("OrthogonalWithNewOutput.OrthogonalWithNewOutput_after"), ws.model()).path_set();
  Outcome o;
  o.pass = got == expected;
  o.detail = std::to_string(got.size()) + " paths";
  if (!o.pass) {
    o.detail += "; missing: " + join(set_difference(expected, got)) + "; extra: " + join(set_difference(got, expected));
  }
  return o;
}

// 3 -------------------------------------------------------------------------

Outcome changeset_correctness() {
  Workspace basic = basic_workspace();
  const ChangeSet ono = diff(basic.lookup("OrthogonalWithNewOutput"), basic.model());
  Workspace rep = load({"listings/replacement/Replacement.dartwin"});
  const ChangeSet replacement = diff(rep.lookup("Replacement"), rep.model());
  const std::set<std::string> expected_modified = {"TS.c1", "TS.c2", "a1"};
  Outcome o;
  o.pass = ono.removed.empty() && ono.added.size() == kOrthogonalAdded && replacement.modified == expected_modified;
  o.detail = "OrthogonalWithNewOutput removed " + std::to_string(ono.removed.size()) + ", added " +
             std::to_string(ono.added.size()) + "; Replacement modified {" + join(replacement.modified) + "}";
  return o;
}

// 4 -------------------------------------------------------------------------

StepShape shape_with_pattern(const SourceTree& tree) {
  Workspace ws;
  ws.load_file(pattern_file("Replacement.dartwin"));
  ws.add_source("<step>", print(tree));
  return step_shape(tree, ws.model());
}

StepShape listing_shape(const std::string& relative) {
  Workspace ws;
  ws.load_file(pattern_file("Replacement.dartwin"));
  const auto file = ws.load_file(fixture(relative));
  return step_shape(ws.trees()[file], ws.model());
}

std::vector<std::string> shape_mismatch(const std::string& label, const StepShape& ours, const StepShape& listing) {
  std::vector<std::string> out;
  for (const auto& x : set_difference(ours.elements, listing.elements)) out.push_back(label + " extra " + x);
  for (const auto& x : set_difference(listing.elements, ours.elements)) out.push_back(label + " missing " + x);
  for (const auto& x : set_difference(ours.specializations, listing.specializations)) out.push_back(label + " ours " + x);
  for (const auto& x : set_difference(listing.specializations, ours.specializations)) {
    out.push_back(label + " listing " + x);
  }
  return out;
}

std::vector<std::string> reproduction_mismatch(const ApplyResult& r) {
  std::vector<std::string> out;
  const SemanticModel final_model = build_model(r.final_tree);
  Workspace step5 = load({"listings/step5/OptimalControl.dartwin"});
  const auto expected = shape_lines(flatten(step5.lookup("OptimalControl"), step5.model()));
  const auto got = shape_lines(flatten(final_model.roots().at(0), final_model));
  for (const auto& x : set_difference(got, expected)) out.push_back("final has " + x);
  for (const auto& x : set_difference(expected, got)) out.push_back("listing has " + x);
  for (auto& x : shape_mismatch("step 2", shape_with_pattern(r.steps.specialized),
                                listing_shape("listings/step2/OptimalControl.dartwin"))) {
    out.push_back(std::move(x));
  }
  for (auto& x : shape_mismatch("step 3", shape_with_pattern(r.steps.reduced),
                                listing_shape("listings/step3/OptimalControl.dartwin"))) {
    out.push_back(std::move(x));
  }
  return out;
}

Outcome five_step_reproduction() {
  Workspace ws = crane_workspace();
  const ElementId pattern = ws.lookup("Replacement");
  const ElementId target = ws.lookup("OptimalControl");
  const Binding listing_binding = parse_binding(read_file(fixture("listings/crane/literal.binding")), "literal.binding");
  const ApplyResult r = apply_transformation(pattern, target, listing_binding, ws.model());
  Outcome o;
  if (r.report.ok) {
    const auto mismatch = reproduction_mismatch(r);
    o.pass = mismatch.empty();
    o.detail = o.pass ? "final tree and step shapes match the listings" : join(mismatch, 12);
    return o;
  }
  std::vector<std::string> violations;
  for (const auto& v : r.report.violations) {
    violations.push_back(v.pattern_path + " " + std::string(to_string(v.reason)));
  }
  o.detail = "listing binding rejected (" + join(violations) + ")";
  // What remains even when the crossed connection entries are swapped.
  const Binding corrected = parse_binding(read_file(fixture("listings/crane/crane.binding")), "crane.binding");
  const ApplyResult c = apply_transformation(pattern, target, corrected, ws.model());
  if (c.report.ok) {
    const auto mismatch = reproduction_mismatch(c);
    o.detail += "; with the port-consistent binding: " + (mismatch.empty() ? "match" : join(mismatch, 12));
  }
  return o;
}

// 5 -------------------------------------------------------------------------

Outcome oracle_equivalence() {
  int models = 0, compared = 0, mismatches = 0;
  std::string first;
  for (std::uint32_t seed = 0; seed < static_cast<std::uint32_t>(kOracleModels); ++seed) {
    const DagCase c = random_dag(seed);
    const auto parsed = parse(c.text());
    if (!parsed.diagnostics.empty()) {
      ++mismatches;
      if (first.empty()) first = "seed " + std::to_string(seed) + " does not parse";
      continue;
    }
    const SemanticModel m = build_model(parsed.tree);
    ++models;
    for (std::size_t k = 0; k < c.defs.size(); ++k) {
      ++compared;
      const ElementId id = resolve(make_name("P.D" + std::to_string(k)), std::nullopt, m);
      std::optional<OracleScope> observed;
      bool ambiguous = false;
      try {
        observed = observed_scope(effective_members(id, m), m);
      } catch (const Error& e) {
        ambiguous = e.code() == ErrorCode::ambiguous_name;
      }
      const auto& expected = c.expected[k];
      const bool same = expected ? (observed && *observed == *expected) : ambiguous;
      if (!same) {
        ++mismatches;
        if (first.empty()) first = "seed " + std::to_string(seed) + " D" + std::to_string(k);
      }
    }
  }
  Outcome o;
  o.pass = models >= kMinOracleModels && mismatches == 0;
  o.detail = std::to_string(models) + " models, " + std::to_string(compared) + " definitions, " +
             std::to_string(mismatches) + " mismatches";
  if (!first.empty()) o.detail += "; first at " + first;
  return o;
}

// 6 -------------------------------------------------------------------------

Outcome round_trip() {
  std::vector<std::string> failures;
  for (const auto& l : listings()) {
    const auto parsed = parse(read_file(fixture(l.path)));
    const std::string printed = print(parsed.tree);
    const auto again = parse(printed);
    if (!again.diagnostics.empty() || !structurally_equal(parsed.tree, again.tree) || print(again.tree) != printed) {
      failures.push_back(l.label);
    }
  }
  int generated = 0;
  for (std::uint32_t seed = 0; seed < static_cast<std::uint32_t>(kGeneratedTrees); ++seed) {
    const SourceTree tree = TreeGenerator(seed).tree();
    if (tree.roots.empty()) continue;
    ++generated;
    const auto parsed = parse(print(tree));
    if (!parsed.diagnostics.empty() || !structurally_equal(tree, parsed.tree)) {
      failures.push_back("generated seed " + std::to_string(seed));
    }
  }
  Outcome o;
  o.pass = failures.empty() && generated >= kMinGeneratedTrees;
  o.detail = std::to_string(listings().size()) + " fixtures, " + std::to_string(generated) + " generated trees";
  if (!failures.empty()) o.detail += "; failed: " + join(failures);
  return o;
}

// 7 -------------------------------------------------------------------------

struct Drawing {
  std::string label;
  std::string svg;
};

std::vector<Drawing> fixture_drawings(std::vector<std::string>& skipped) {
  std::vector<Drawing> out;
  for (const auto& l : listings()) {
    Workspace ws;
    const auto file = ws.load_file(fixture(l.path));
    ws.load_siblings(fixture(l.path));
    ws.load_file(pattern_file("Replacement.dartwin"));
    if (has_errors(ws.diagnostics(std::set<std::uint32_t>{file}))) {
      skipped.push_back(l.label);
      continue;
    }
    const SemanticModel& m = ws.model();
    for (ElementId id : ws.roots_in(file)) {
      const ElementKind kind = m.element(id).kind;
      if (kind == ElementKind::DarTwin) out.push_back({m.qualified_name(id), render_dartwin(id, m)});
      if (kind == ElementKind::DarTrans) {
        out.push_back({m.qualified_name(id), render_dartrans(id, m)});
        for (ElementId side : m.element(id).members) {
          if (is_dartwin_model_kind(m.element(side).kind)) {
            out.push_back({m.qualified_name(side), render_dartwin(side, m)});
          }
        }
      }
    }
  }
  return out;
}

Outcome rendering_invariants() {
  std::vector<std::string> failures, skipped, skipped_again;
  const auto first = fixture_drawings(skipped);
  const auto second = fixture_drawings(skipped_again);
  for (std::size_t i = 0; i < first.size(); ++i) {
    if (i >= second.size() || first[i].svg != second[i].svg) failures.push_back(first[i].label + " not deterministic");
    try {
      const std::string v = svg_layout_violation(parse_svg(first[i].svg));
      if (!v.empty()) failures.push_back(first[i].label + ": " + v);
    } catch (const std::exception& e) {
      failures.push_back(first[i].label + ": malformed XML");
    }
  }

  Workspace basic = basic_workspace();
  const ElementId ono = basic.lookup("OrthogonalWithNewOutput");
  const auto ono_shapes = parse_svg(render_dartrans(ono, basic.model()));
  const ChangeSet added = diff(ono, basic.model());
  std::set<std::string> drawn_paths;
  std::size_t orange = 0;
  for (const auto& s : drawables(ono_shapes)) {
    drawn_paths.insert(s.attr("data-path"));
    if (s.attr("stroke") == Style{}.highlight_color) ++orange;
  }
  std::size_t mapped = 0;
  for (const auto& p : added.added) mapped += drawn_paths.count(p);
  if (orange != mapped) {
    failures.push_back("OrthogonalWithNewOutput: " + std::to_string(orange) + " orange vs " + std::to_string(mapped) +
                       " drawable additions");
  }

  Workspace rep = load({"listings/replacement/Replacement.dartwin"});
  const ElementId replacement = rep.lookup("Replacement");
  const ChangeSet rc = diff(replacement, rep.model());
  // A modified element is drawn once, in its after form; its removed form
  // is the dashed halo around it.
  std::map<std::string, bool> dashed;
  for (const auto& s : parse_svg(render_dartrans(replacement, rep.model()))) {
    const std::string p = s.attr("data-path");
    if (!rc.removed.count(p) || !s.stroked()) continue;
    const bool removed_form = rc.modified.count(p) ? s.attr("class") == "halo" : s.attr("class") != "halo";
    if (removed_form && s.dashed() && s.attr("stroke") == Style{}.highlight_color) dashed[p] = true;
  }
  for (const auto& p : rc.removed) {
    if (!dashed[p]) failures.push_back("Replacement: removed " + p + " not dashed");
  }

  Outcome o;
  o.pass = failures.empty() && !first.empty();
  o.detail = std::to_string(first.size()) + " diagrams; " + std::to_string(orange) + " orange = " +
             std::to_string(mapped) + " drawable additions; " + std::to_string(rc.removed.size()) + " removed dashed (" +
             std::to_string(rc.modified.size()) + " as halos of modified elements)";
  if (!skipped.empty()) o.detail += "; not renderable (unresolved names): " + join(skipped);
  if (!failures.empty()) o.detail += "; " + join(failures);
  return o;
}

// 8 -------------------------------------------------------------------------

std::string quote(const fs::path& p) { return "'" + p.string() + "'"; }

// Runs the command line tool over the corpus, each output into `dir`.
void corpus_run(const fs::path& dir) {
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string cli = quote(DARTWIN_CLI);
  const std::string lib = " --lib " + quote(pattern_file("Replacement.dartwin"));
  std::vector<std::string> commands;
  for (std::size_t i = 0; i < listings().size(); ++i) {
    const std::string in = quote(fixture(listings()[i].path));
    const std::string n = std::to_string(i + 1);
    commands.push_back(cli + " check " + in + lib + " > " + quote(dir / (n + ".check")) + " 2>&1");
    commands.push_back(cli + " export-json " + in + lib + " > " + quote(dir / (n + ".json")) + " 2>&1");
    fs::create_directories(dir / ("svg" + n));
    commands.push_back(cli + " render " + in + lib + " -o " + quote(dir / ("svg" + n)) + " > " +
                       quote(dir / (n + ".render")) + " 2>&1");
  }
  const std::string basic = quote(fixture("listings/basic/OrthogonalWithNewOutput.dartwin"));
  const std::string replacement = quote(fixture("listings/replacement/Replacement.dartwin"));
  const std::string crane = quote(fixture("listings/crane/OptimalControl.dartwin"));
  for (const char* t : {"OrthogonalWithNewOutput.OrthogonalWithNewOutput_core",
                        "OrthogonalWithNewOutput.OrthogonalWithNewOutput_after", "Basic"}) {
    commands.push_back(cli + " flatten " + basic + " --target " + t + " > " + quote(dir / (std::string(t) + ".flat")) +
                       " 2>&1");
    commands.push_back(cli + " flatten " + basic + " --json --target " + t + " > " +
                       quote(dir / (std::string(t) + ".flat.json")) + " 2>&1");
  }
  commands.push_back(cli + " flatten " + crane + " > " + quote(dir / "crane.flat") + " 2>&1");
  commands.push_back(cli + " diff " + basic + " --json > " + quote(dir / "ono.diff.json") + " 2>&1");
  commands.push_back(cli + " diff " + replacement + " > " + quote(dir / "replacement.diff") + " 2>&1");
  commands.push_back(cli + " apply " + crane + " --pattern " + quote(pattern_file("Replacement.dartwin")) +
                     " --binding " + quote(fixture("listings/crane/crane.binding")) + " --emit-steps --json -o " +
                     quote(dir / "evolved.dartwin") + " > " + quote(dir / "evolved.changes.json") + " 2>&1");
  commands.push_back(cli + " apply " + crane + " --pattern " + quote(pattern_file("Replacement.dartwin")) +
                     " --binding " + quote(fixture("listings/crane/literal.binding")) + " > " +
                     quote(dir / "literal.out") + " 2>&1");
  for (const auto& c : commands) {
    // Exit statuses vary by design; only the bytes written are compared.
    [[maybe_unused]] const int status = std::system(c.c_str());
  }
}

std::map<std::string, std::size_t> digests(const fs::path& dir) {
  std::map<std::string, std::size_t> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::string text = read_file(e.path());
    // Diagnostics quote the input path, which is the same in both runs;
    // output paths differ only by the run directory and never appear in files.
    out[fs::relative(e.path(), dir).string()] = std::hash<std::string>{}(text);
  }
  return out;
}

Outcome end_to_end_determinism() {
  const fs::path base = fs::temp_directory_path() / ("dartwin_acceptance_" + std::to_string(::getpid()));
  corpus_run(base / "a");
  corpus_run(base / "b");
  const auto a = digests(base / "a");
  const auto b = digests(base / "b");
  std::vector<std::string> differing;
  for (const auto& [name, h] : a) {
    auto it = b.find(name);
    if (it == b.end() || it->second != h) differing.push_back(name);
  }
  for (const auto& [name, h] : b) {
    if (!a.count(name)) differing.push_back(name);
  }
  std::error_code ignored;
  fs::remove_all(base, ignored);
  Outcome o;
  o.pass = differing.empty() && a.size() > listings().size() * 3;
  o.detail = std::to_string(a.size()) + " output files hashed";
  if (!differing.empty()) o.detail += "; differing: " + join(differing);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"fixture parsing", fixture_parsing},
      {"flattening fidelity", flattening_fidelity},
      {"changeset correctness", changeset_correctness},
      {"five-step reproduction", five_step_reproduction},
      {"oracle equivalence", oracle_equivalence},
      {"round-trip", round_trip},
      {"rendering invariants", rendering_invariants},
      {"end-to-end determinism", end_to_end_determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("threw: ") + e.what();
    }
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << (i + 1) << "] " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
