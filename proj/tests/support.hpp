#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dartwin/dartrans.hpp"
#include "dartwin/flatten.hpp"
#include "dartwin/model.hpp"
#include "dartwin/render.hpp"
#include "dartwin/syntax.hpp"
#include "dartwin/workspace.hpp"

namespace dartwin::testing {

namespace fs = std::filesystem;

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

inline fs::path fixture(const std::string& relative) { return fs::path(DARTWIN_FIXTURES) / relative; }
inline fs::path pattern_file(const std::string& name) { return fs::path(DARTWIN_PATTERNS) / name; }

struct Listing {
  std::string label;
  std::string path;  // relative to the fixture root
};

/// The eight listings, in order of appearance.
inline const std::vector<Listing>& listings() {
  static const std::vector<Listing> all = {
      {"Basic", "listings/basic/Basic.dartwin"},
      {"OrthogonalWithNewOutput", "listings/basic/OrthogonalWithNewOutput.dartwin"},
      {"Replacement", "listings/replacement/Replacement.dartwin"},
      {"OptimalControl", "listings/crane/OptimalControl.dartwin"},
      {"step 2", "listings/step2/OptimalControl.dartwin"},
      {"step 3", "listings/step3/OptimalControl.dartwin"},
      {"step 4", "listings/step4/OptimalControl.dartwin"},
      {"step 5", "listings/step5/OptimalControl.dartwin"},
  };
  return all;
}

/// Workspace over fixture files, relative to the fixture root.
inline Workspace load(const std::vector<std::string>& relative) {
  Workspace ws;
  for (const auto& r : relative) ws.load_file(fixture(r));
  return ws;
}

inline Workspace basic_workspace() {
  return load({"listings/basic/Basic.dartwin", "listings/basic/OrthogonalWithNewOutput.dartwin"});
}

inline Workspace crane_workspace() {
  Workspace ws = load({"listings/crane/OptimalControl.dartwin"});
  ws.load_file(pattern_file("Replacement.dartwin"));
  return ws;
}

inline Workspace text_workspace(const std::string& text) {
  Workspace ws;
  ws.add_source("<memory>", text);
  return ws;
}

inline std::set<std::string> paths_of(const EffectiveModel& m) { return m.path_set(); }

inline const EffectiveElement* find_member(const std::vector<EffectiveElement>& members,
                                           const std::string& name) {
  for (const auto& m : members) {
    if (m.name == name) return &m;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// Random well-formed source trees
// ---------------------------------------------------------------------------

class TreeGenerator {
 public:
  explicit TreeGenerator(std::uint32_t seed) : rng_(seed) {}

  SourceTree tree() {
    SourceTree t;
    const int roots = uniform(0, 3);
    for (int i = 0; i < roots; ++i) t.roots.push_back(node(0));
    return t;
  }

 private:
  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool chance(double p) { return std::bernoulli_distribution(p)(rng_); }

  std::string identifier() {
    static const std::vector<std::string> pool = {"Basic", "TS",   "DT1",   "p11",      "goal_2",
                                                  "AT",    "x",    "Crane", "actuate_", "n42"};
    return pool[static_cast<std::size_t>(uniform(0, static_cast<int>(pool.size()) - 1))];
  }

  QualifiedName qualified() {
    QualifiedName q;
    const int n = uniform(1, 3);
    for (int i = 0; i < n; ++i) q.segments.push_back(identifier());
    return q;
  }

  std::string doc_text() {
    static const std::vector<std::string> words = {"keep", "the", "load", "still", "42", "x-y", "(ok)"};
    std::string out;
    const int n = uniform(0, 5);
    for (int i = 0; i < n; ++i) {
      if (i) out += ' ';
      out += words[static_cast<std::size_t>(uniform(0, static_cast<int>(words.size()) - 1))];
    }
    return out;
  }

  Node node(int depth) {
    static const std::vector<Construct> usages = {
        Construct::part,        Construct::part_def,        Construct::port,
        Construct::connection,  Construct::allocation,      Construct::requirement,
        Construct::requirement_def, Construct::connection_def, Construct::metadata_def,
        Construct::keyword_usage, Construct::keyword_usage,  Construct::package,
        Construct::library_package, Construct::import};
    Node n;
    n.construct = usages[static_cast<std::size_t>(uniform(0, static_cast<int>(usages.size()) - 1))];

    if (n.construct == Construct::import) {
      if (chance(0.5)) n.visibility = chance(0.5) ? "private" : "public";
      n.import_path = qualified();
      n.import_wildcard = chance(0.5);
      return n;
    }
    if (n.construct == Construct::package || n.construct == Construct::library_package) {
      n.name = identifier();
      if (chance(0.3)) n.doc = doc_text();
      children(n, depth);
      return n;
    }

    if (n.construct == Construct::keyword_usage) {
      static const std::vector<std::string> keywords = {"dartwin", "twinsystem", "digitaltwin", "goal",
                                                        "vs",      "dartrans",   "custom_kw"};
      n.hash_keyword = keywords[static_cast<std::size_t>(uniform(0, static_cast<int>(keywords.size()) - 1))];
    }
    if (n.construct == Construct::metadata_def) {
      if (chance(0.5)) n.short_name = identifier();
      n.name = identifier();
    } else if (chance(0.8)) {
      n.name = identifier();
    }
    if (chance(0.2)) {
      Multiplicity m;
      m.lower = static_cast<std::uint64_t>(uniform(0, 3));
      if (chance(0.6)) m.upper = m.lower + static_cast<std::uint64_t>(uniform(0, 2));
      n.multiplicity = m;
    }
    if (chance(0.25)) n.typed_by = qualified();
    const int specs = chance(0.3) ? uniform(1, 2) : 0;
    for (int i = 0; i < specs; ++i) n.specializes.push_back(qualified());
    if (chance(0.2)) n.redefines = qualified();
    if (chance(0.2)) {
      n.connect = EndpointClause{qualified(), qualified()};
    } else if (chance(0.15)) {
      n.allocate = EndpointClause{qualified(), qualified()};
    }
    if (chance(0.25)) n.doc = doc_text();
    children(n, depth);
    return n;
  }

  void children(Node& n, int depth) {
    if (depth >= 3) return;
    const int count = chance(0.5) ? uniform(1, 3) : 0;
    for (int i = 0; i < count; ++i) n.children.push_back(node(depth + 1));
  }

  std::mt19937 rng_;
};

// ---------------------------------------------------------------------------
// Random specialization DAGs and a set-based oracle
// ---------------------------------------------------------------------------

struct OracleMember {
  std::set<std::string> sources;  // qualified declarations that contributed
  std::map<std::string, OracleMember> members;

  friend bool operator==(const OracleMember&, const OracleMember&) = default;
};

using OracleScope = std::map<std::string, OracleMember>;

struct MemberSpec {
  std::string name;
  std::optional<int> type;          // `part name : Dj`
  std::optional<int> redefined_in;  // `part :>> Dj.name`
};

struct DefSpec {
  std::vector<int> bases;
  std::vector<MemberSpec> members;
};

struct DagCase {
  std::vector<DefSpec> defs;
  std::vector<std::optional<OracleScope>> expected;  // nullopt: ambiguous

  std::string text() const {
    std::string out = "package P {\n";
    for (std::size_t k = 0; k < defs.size(); ++k) {
      out += "    part def D" + std::to_string(k);
      for (std::size_t b = 0; b < defs[k].bases.size(); ++b) {
        out += (b ? ", D" : " :> D") + std::to_string(defs[k].bases[b]);
      }
      out += " {\n";
      for (const MemberSpec& m : defs[k].members) {
        if (m.redefined_in) {
          out += "        part :>> D" + std::to_string(*m.redefined_in) + "." + m.name + ";\n";
        } else if (m.type) {
          out += "        part " + m.name + " : D" + std::to_string(*m.type) + ";\n";
        } else {
          out += "        part " + m.name + ";\n";
        }
      }
      out += "    }\n";
    }
    out += "}\n";
    return out;
  }
};

/// Closes the specialization edges explicitly: every name reachable from the
/// bases is collected with its candidate source sets, and a candidate wins
/// only if it contains every other one.
inline std::optional<OracleScope> oracle_scope(const DagCase& c, int k) {
  const DefSpec& def = c.defs[static_cast<std::size_t>(k)];
  std::map<std::string, std::vector<OracleMember>> candidates;
  for (int b : def.bases) {
    const auto& base = c.expected[static_cast<std::size_t>(b)];
    if (!base) return std::nullopt;
    for (const auto& [name, member] : *base) candidates[name].push_back(member);
  }
  OracleScope out;
  for (auto& [name, list] : candidates) {
    const OracleMember* winner = nullptr;
    for (const OracleMember& candidate : list) {
      const bool covers_all = std::all_of(list.begin(), list.end(), [&](const OracleMember& other) {
        return std::includes(candidate.sources.begin(), candidate.sources.end(), other.sources.begin(),
                             other.sources.end());
      });
      if (covers_all) winner = &candidate;
    }
    if (!winner) return std::nullopt;
    out[name] = *winner;
  }
  const std::string prefix = "P.D" + std::to_string(k) + ".";
  for (const MemberSpec& m : def.members) {
    if (m.redefined_in) {
      OracleMember& slot = out.at(m.name);
      slot.sources.insert(prefix + m.name);
      continue;
    }
    OracleMember own;
    own.sources = {prefix + m.name};
    if (m.type) {
      const auto& typed = c.expected[static_cast<std::size_t>(*m.type)];
      if (!typed) return std::nullopt;
      own.members = *typed;
    }
    out[m.name] = std::move(own);
  }
  return out;
}

inline DagCase random_dag(std::uint32_t seed) {
  std::mt19937 rng(seed);
  auto uniform = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  static const std::vector<std::string> names = {"a", "b", "c", "d", "e", "f"};

  DagCase c;
  const int n = uniform(1, 6);
  for (int k = 0; k < n; ++k) {
    DefSpec def;
    std::vector<int> pool;
    for (int j = 0; j < k; ++j) pool.push_back(j);
    std::shuffle(pool.begin(), pool.end(), rng);
    const int base_count = std::min(k, uniform(0, 3));
    def.bases.assign(pool.begin(), pool.begin() + base_count);
    c.defs.push_back(def);

    // Inherited view before own members, to pick safe redefinition targets.
    c.expected.push_back(std::nullopt);
    const auto inherited = oracle_scope(c, k);
    DefSpec& spec = c.defs.back();

    std::set<std::string> used;
    const int member_count = uniform(0, 5);
    for (int i = 0; i < member_count; ++i) {
      MemberSpec m;
      if (inherited && !inherited->empty() && uniform(0, 9) < 3) {
        auto it = inherited->begin();
        std::advance(it, uniform(0, static_cast<int>(inherited->size()) - 1));
        if (!used.count(it->first)) {
          for (int b : spec.bases) {
            const auto& base = c.expected[static_cast<std::size_t>(b)];
            if (base && base->count(it->first)) {
              m.name = it->first;
              m.redefined_in = b;
              break;
            }
          }
        }
      }
      if (!m.redefined_in) {
        m.name = names[static_cast<std::size_t>(uniform(0, static_cast<int>(names.size()) - 1))];
        if (used.count(m.name)) continue;
        if (k > 0 && uniform(0, 9) < 3) m.type = uniform(0, k - 1);
      }
      used.insert(m.name);
      spec.members.push_back(m);
    }
    c.expected.back() = oracle_scope(c, k);
  }
  return c;
}

/// Converts implementation output to the oracle's shape. Duplicate sibling
/// names make the conversion fail.
inline std::optional<OracleScope> observed_scope(const std::vector<EffectiveElement>& members,
                                                 const SemanticModel& model) {
  OracleScope out;
  for (const EffectiveElement& e : members) {
    OracleMember m;
    for (const Provenance& p : e.provenance) m.sources.insert(model.qualified_name(p.source));
    auto nested = observed_scope(e.members, model);
    if (!nested) return std::nullopt;
    m.members = std::move(*nested);
    if (!out.emplace(e.name, std::move(m)).second) return std::nullopt;
  }
  return out;
}

inline std::string describe(const OracleScope& scope, int depth = 0) {
  std::string out;
  for (const auto& [name, m] : scope) {
    out += std::string(static_cast<std::size_t>(depth) * 2, ' ') + name + " {";
    for (const auto& s : m.sources) out += " " + s;
    out += " }\n" + describe(m.members, depth + 1);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Structural comparison of dartwin trees, ordering ignored
// ---------------------------------------------------------------------------

/// One line per effective element: path, kind, endpoints.
inline std::set<std::string> shape_lines(const EffectiveModel& m) {
  std::set<std::string> out;
  out.insert("<root> " + m.root.name + " " + std::string(to_string(m.root.kind)));
  for (const auto& path : m.paths()) {
    const EffectiveElement* e = m.find(path);
    std::string line = path + " " + std::string(to_string(e->kind));
    if (e->connect) line += " connect " + e->connect->first + " -> " + e->connect->second;
    if (e->allocate) line += " allocate " + e->allocate->first + " -> " + e->allocate->second;
    out.insert(line);
  }
  return out;
}

inline std::vector<std::string> set_difference(const std::set<std::string>& a, const std::set<std::string>& b) {
  std::vector<std::string> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

/// Declared element paths of a source tree and, per declaration, the
/// qualified names its `:>` / `:>>` clauses resolve to in `model`.
struct StepShape {
  std::set<std::string> elements;
  std::set<std::string> specializations;  // "path :> Target.Qualified", "?" when unresolved
};

inline void collect_shape(const Node& node, const std::string& prefix, std::optional<ElementId> owner,
                          const SemanticModel& model, StepShape& out) {
  if (!node.name) return;
  const std::string path = prefix.empty() ? *node.name : prefix + "." + *node.name;
  out.elements.insert(path);
  const Resolution self = try_resolve(make_name(path), std::nullopt, model);
  for (const QualifiedName& s : node.specializes) {
    const Resolution r = try_resolve(s, owner, model);
    out.specializations.insert(path + " :> " + (r.id ? model.qualified_name(*r.id) : "?" + s.str()));
  }
  for (const Node& child : node.children) collect_shape(child, path, self.id, model, out);
}

inline StepShape step_shape(const SourceTree& tree, const SemanticModel& model) {
  StepShape out;
  for (const Node& root : tree.roots) collect_shape(root, "", std::nullopt, model, out);
  return out;
}

}  // namespace dartwin::testing
