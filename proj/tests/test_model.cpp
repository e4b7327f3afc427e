#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include "support.hpp"

using namespace dartwin;
using namespace dartwin::testing;

namespace {

std::map<ElementKind, int> kind_counts(const SemanticModel& m) {
  std::map<ElementKind, int> out;
  for (const Element& e : m.elements()) ++out[e.kind];
  return out;
}

std::vector<Diagnostic> all_diagnostics(const SemanticModel& m) {
  std::vector<Diagnostic> out = m.diagnostics();
  const auto checked = validate(m);
  out.insert(out.end(), checked.begin(), checked.end());
  return out;
}

int count_codes(const std::vector<Diagnostic>& ds, const std::string& code) {
  return static_cast<int>(std::count_if(ds.begin(), ds.end(), [&](const Diagnostic& d) { return d.code == code; }));
}

SemanticModel model_of(const std::string& text) {
  const auto parsed = parse(text);
  REQUIRE(parsed.diagnostics.empty());
  return build_model(parsed.tree);
}

}  // namespace

TEST_SUITE("build_model") {
  TEST_CASE("Basic element census") {
    Workspace ws = load({"listings/basic/Basic.dartwin"});
    const SemanticModel& m = ws.model();
    CHECK(m.diagnostics().empty());
    // 1 DarTwin, 1 TwinSystem, 1 DigitalTwin, 6 ports, 3 connections, 1 part, 1 goal, 1 allocation.
    CHECK(m.size() == 15);
    const auto counts = kind_counts(m);
    CHECK(counts.at(ElementKind::DarTwin) == 1);
    CHECK(counts.at(ElementKind::TwinSystem) == 1);
    CHECK(counts.at(ElementKind::DigitalTwin) == 1);
    CHECK(counts.at(ElementKind::Port) == 6);
    CHECK(counts.at(ElementKind::Connection) == 3);
    CHECK(counts.at(ElementKind::Part) == 1);
    CHECK(counts.at(ElementKind::Goal) == 1);
    CHECK(counts.at(ElementKind::Allocation) == 1);
  }

  TEST_CASE("connection endpoints resolve to ports") {
    Workspace ws = load({"listings/basic/Basic.dartwin"});
    const SemanticModel& m = ws.model();
    const Element& c1 = m.element(ws.lookup("Basic.TwinSystem.c1"));
    REQUIRE(c1.connect);
    const Element& from = m.element(c1.connect->first);
    const Element& to = m.element(c1.connect->second);
    CHECK(from.kind == ElementKind::Port);
    CHECK(from.name == "ts1");
    CHECK(m.element(*from.owner).name == "AT");
    CHECK(to.kind == ElementKind::Port);
    CHECK(to.name == "p11");
    CHECK(m.element(*to.owner).name == "DT1");
  }

  TEST_CASE("resolution soundness on the fixtures") {
    Workspace ws = crane_workspace();
    ws.load_file(fixture("listings/basic/Basic.dartwin"));
    ws.load_file(fixture("listings/basic/OrthogonalWithNewOutput.dartwin"));
    const SemanticModel& m = ws.model();
    CHECK(m.diagnostics().empty());
    for (const Element& e : m.elements()) {
      if (e.connect && e.kind == ElementKind::Connection) {
        CHECK(m.element(e.connect->first).kind == ElementKind::Port);
        CHECK(m.element(e.connect->second).kind == ElementKind::Port);
      }
      if (e.allocate) CHECK(m.element(e.allocate->first).kind == ElementKind::Goal);
      for (ElementId member : e.members) CHECK(m.element(member).owner == e.id);
    }
  }

  TEST_CASE("before and after specialize the core") {
    Workspace ws = load({"listings/replacement/Replacement.dartwin"});
    const SemanticModel& m = ws.model();
    const ElementId core = ws.lookup("Replacement.dt_core");
    const Element& before = m.element(ws.lookup("Replacement.dt_before"));
    const Element& after = m.element(ws.lookup("Replacement.dt_after"));
    CHECK(before.specializes == std::vector<ElementId>{core});
    CHECK(after.specializes == std::vector<ElementId>{core});
    CHECK(before.kind == ElementKind::DartwinBefore);
    CHECK(after.kind == ElementKind::DartwinAfter);
  }

  TEST_CASE("anonymous redefinition takes the redefined name") {
    Workspace ws = load({"listings/replacement/Replacement.dartwin"});
    const SemanticModel& m = ws.model();
    const Element& ts = m.element(ws.lookup("Replacement.dt_before.TS"));
    CHECK(ts.name == "TS");
    CHECK(!ts.declared_name);
    REQUIRE(ts.redefines);
    CHECK(m.qualified_name(*ts.redefines) == "Replacement.dt_core.TS");
  }

  TEST_CASE("empty tree") {
    const SemanticModel m = build_model(SourceTree{});
    CHECK(m.roots().empty());
    CHECK(m.diagnostics().empty());
    CHECK(validate(m).empty());
  }

  TEST_CASE("unknown keywords produce diagnostics, not elements") {
    const SemanticModel m = model_of("#dartwin X { #gadget g { port p; } part q; }");
    CHECK(count_codes(m.diagnostics(), "UnknownKeyword") == 1);
    CHECK(m.size() == 2);
    for (const Element& e : m.elements()) CHECK(e.name != "g");
  }

  TEST_CASE("duplicate siblings: first wins") {
    const SemanticModel m = model_of("#dartwin X { part a { port p; } part a; }");
    CHECK(count_codes(m.diagnostics(), "DuplicateName") == 1);
    const Element& x = m.element(*m.find_root("X"));
    CHECK(x.members.size() == 1);
    CHECK(m.element(x.members[0]).members.size() == 1);
  }

  TEST_CASE("unresolved names are reported") {
    const SemanticModel m = model_of("#dartwin X { connection c connect A.p to B.q; }");
    CHECK(count_codes(m.diagnostics(), "UnresolvedName") >= 1);
  }

  TEST_CASE("connections must join ports") {
    const SemanticModel m = model_of("#dartwin X { part a; part b; connection c connect a to b; }");
    CHECK(count_codes(m.diagnostics(), "KindMismatch") >= 1);
  }

  TEST_CASE("determinism") {
    const std::string text = read_file(fixture("listings/replacement/Replacement.dartwin"));
    const auto tree = parse(text).tree;
    const SemanticModel a = build_model(tree);
    const SemanticModel b = build_model(tree);
    CHECK(export_json(a) == export_json(b));
    REQUIRE(a.diagnostics().size() == b.diagnostics().size());
  }

  TEST_CASE("metadata definitions are recorded without elements") {
    const SemanticModel m = model_of(
        "library package DarTwinLib { metadata def <dartwin> DarTMetadata; metadata def <goal> GoalMetadata; }");
    CHECK(m.diagnostics().empty());
    CHECK(m.metadata().size() == 2);
    CHECK(m.metadata()[0].keyword == "dartwin");
    CHECK(m.metadata()[0].definition_name == "DarTMetadata");
    CHECK(m.size() == 1);
  }

  TEST_CASE("library listing parses") {
    const auto parsed = parse(read_file(fixture("listings/library/DarTwin1.dartwin")));
    CHECK(parsed.diagnostics.empty());
    CHECK(parsed.tree.roots.size() == 2);
  }
}

TEST_SUITE("resolve") {
  TEST_CASE("dotted path from a dartwin scope") {
    Workspace ws = load({"listings/crane/OptimalControl.dartwin"});
    const SemanticModel& m = ws.model();
    const ElementId scope = ws.lookup("OptimalControl");
    const ElementId id = resolve(make_name("GantryCrane.TrajectoryLQR.actuate"), scope, m);
    CHECK(m.qualified_name(id) == "OptimalControl.GantryCrane.TrajectoryLQR.actuate");
    CHECK(m.element(id).kind == ElementKind::Port);
  }

  TEST_CASE("root-qualified path from a nested scope") {
    Workspace ws = load({"listings/replacement/Replacement.dartwin"});
    const SemanticModel& m = ws.model();
    const ElementId scope = ws.lookup("Replacement.dt_before.TS");
    const ElementId id = resolve(make_name("Replacement.dt_core.AT.p1"), scope, m);
    CHECK(m.qualified_name(id) == "Replacement.dt_core.AT.p1");
  }

  TEST_CASE("inherited members resolve through specialization") {
    Workspace ws = load({"listings/replacement/Replacement.dartwin"});
    const SemanticModel& m = ws.model();
    const ElementId id = resolve(make_name("AT.p2"), ws.lookup("Replacement.dt_after"), m);
    CHECK(m.qualified_name(id) == "Replacement.dt_core.AT.p2");
  }

  TEST_CASE("a root resolves to itself") {
    Workspace ws = load({"listings/basic/Basic.dartwin"});
    const ElementId basic = ws.lookup("Basic");
    CHECK(resolve(make_name("Basic"), basic, ws.model()) == basic);
  }

  TEST_CASE("failures") {
    Workspace ws = load({"listings/basic/Basic.dartwin"});
    const SemanticModel& m = ws.model();
    const auto missing = try_resolve(make_name("Basic.Nope"), std::nullopt, m);
    CHECK(!missing.id);
    CHECK(missing.failed_segment == "Nope");
    try {
      resolve(make_name("Basic.Nope"), std::nullopt, m);
      FAIL("expected an exception");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::unresolved_name);
    }

    const SemanticModel diamond = model_of(
        "package P { part def A { part m; } part def B { part m; } part def C :> A, B; }");
    const auto r = try_resolve(make_name("P.C.m"), std::nullopt, diamond);
    CHECK(!r.id);
    CHECK(r.ambiguous.size() == 2);
  }
}

TEST_SUITE("validate") {
  TEST_CASE("OrthogonalWithNewOutput after specializes Basic") {
    Workspace ws = basic_workspace();
    const auto ds = all_diagnostics(ws.model());
    REQUIRE(ds.size() == 1);
    CHECK(ds[0].severity == Severity::warning);
    CHECK(ds[0].code == "CoreNotSpecialized");
    CHECK(ds[0].message.find("OrthogonalWithNewOutput_after") != std::string::npos);
    CHECK(ds[0].message.find("Basic") != std::string::npos);
  }

  TEST_CASE("Replacement is clean") {
    Workspace ws = load({"listings/replacement/Replacement.dartwin"});
    CHECK(all_diagnostics(ws.model()).empty());
  }

  TEST_CASE("dartrans without a core") {
    const SemanticModel m = model_of("#dartrans T { #dartwin_before b { } }");
    const auto ds = validate(m);
    CHECK(count_codes(ds, "MissingCore") == 1);
    CHECK(has_errors(ds));
  }

  TEST_CASE("arbiters and conflicts") {
    const SemanticModel good = model_of(
        "#dartwin X { #twinsystem T { #arbiter A { port inputs[2..*]; port output[1]; } }"
        " #goal G1; #goal G2; #vs clash connect G1 to G2 { doc /* both cannot hold */ } }");
    CHECK(good.diagnostics().empty());
    CHECK(validate(good).empty());
    const Element& clash = good.element(resolve(make_name("X.clash"), std::nullopt, good));
    CHECK(clash.kind == ElementKind::Conflict);
    CHECK(clash.conflict_explanation == "both cannot hold");

    const SemanticModel bad = model_of(
        "#dartwin X { #twinsystem T { #arbiter A { port input1; port output1; port output2; } } }");
    const auto ds = validate(bad);
    CHECK(count_codes(ds, "ArbiterInputs") == 1);
    CHECK(count_codes(ds, "ArbiterOutput") == 1);
  }

  TEST_CASE("allocations must start at a goal") {
    const SemanticModel m = model_of(
        "#dartwin X { #twinsystem T { #digitaltwin D; } part P; allocation a allocate P to T.D; }");
    CHECK(count_codes(validate(m), "KindMismatch") == 1);
  }
}

TEST_SUITE("export_json") {
  TEST_CASE("stable schema") {
    Workspace ws = load({"listings/basic/Basic.dartwin"});
    const std::string text = export_json(ws.model());
    const auto j = nlohmann::json::parse(text);
    REQUIRE(j.contains("elements"));
    REQUIRE(j["elements"].size() == ws.model().size());
    for (std::size_t i = 0; i < j["elements"].size(); ++i) {
      const auto& e = j["elements"][i];
      CHECK(e["id"] == i);
      for (const char* key : {"kind", "name", "owner", "members", "specializes", "redefines"}) {
        CHECK_MESSAGE(e.contains(key), key);
      }
    }
    CHECK(export_json(load({"listings/basic/Basic.dartwin"}).model()) == text);
  }
}
