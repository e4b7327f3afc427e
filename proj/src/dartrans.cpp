#include "dartwin/dartrans.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <sstream>

namespace dartwin {

// ---------------------------------------------------------------------------
// Binding files
// ---------------------------------------------------------------------------

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  const auto head = static_cast<unsigned char>(s.front());
  if (!(std::isalpha(head) || head == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    const auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || u == '_';
  });
}

bool is_path(std::string_view s) {
  std::size_t start = 0;
  while (true) {
    const auto dot = s.find('.', start);
    const auto part = s.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start);
    if (!is_identifier(part)) return false;
    if (dot == std::string_view::npos) return true;
    start = dot + 1;
  }
}

}  // namespace

Binding parse_binding(std::string_view text, std::string_view origin) {
  Binding out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    std::string_view line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    auto fail = [&](const std::string& why) -> Binding {
      throw Error(ErrorCode::malformed_input,
                  std::string(origin) + ":" + std::to_string(line_no) + ": " + why);
    };
    const auto arrow = line.find("->");
    const auto rename = line.find("=>");
    if ((arrow == std::string_view::npos) == (rename == std::string_view::npos)) {
      fail("expected 'pattern.path -> target.path' or 'pattern.path => name'");
    }
    const bool is_rename = rename != std::string_view::npos;
    const auto op = is_rename ? rename : arrow;
    const std::string_view lhs = trim(line.substr(0, op));
    const std::string_view rhs = trim(line.substr(op + 2));
    if (!is_path(lhs)) fail("'" + std::string(lhs) + "' is not a dotted name");
    if (is_rename) {
      if (!is_identifier(rhs)) fail("'" + std::string(rhs) + "' is not an identifier");
      if (!out.renames.emplace(lhs, rhs).second) fail("'" + std::string(lhs) + "' is renamed twice");
    } else {
      if (!is_path(rhs)) fail("'" + std::string(rhs) + "' is not a dotted name");
      if (!out.map.emplace(lhs, rhs).second) fail("'" + std::string(lhs) + "' is bound twice");
    }
  }
  return out;
}

std::string print_binding(const Binding& binding) {
  std::ostringstream os;
  for (const auto& [from, to] : binding.map) os << from << " -> " << to << "\n";
  for (const auto& [from, to] : binding.renames) os << from << " => " << to << "\n";
  return os.str();
}

std::string_view to_string(ViolationReason reason) {
  switch (reason) {
    case ViolationReason::unbound:
      return "unbound";
    case ViolationReason::non_injective:
      return "non-injective";
    case ViolationReason::kind_mismatch:
      return "kind-mismatch";
    case ViolationReason::containment_broken:
      return "containment-broken";
    case ViolationReason::endpoint_inconsistent:
      return "endpoint-inconsistent";
    case ViolationReason::name_collision:
      return "name-collision";
  }
  return "unbound";
}

// ---------------------------------------------------------------------------
// Shared machinery
// ---------------------------------------------------------------------------

namespace {

struct Pattern {
  DarTransParts parts;
  EffectiveModel before;
  EffectiveModel core;
  EffectiveModel after;
  std::set<EffectivePath> kept;
  std::set<EffectivePath> removed;
  std::set<EffectivePath> added;
  std::string before_name;  // root-qualified
  std::string core_name;
  std::string after_name;
};

Pattern load_pattern(ElementId id, const SemanticModel& model) {
  Pattern p{dartrans_parts(id, model), {}, {}, {}, {}, {}, {}, {}, {}, {}};
  p.core = flatten(p.parts.core, model);
  p.before = p.parts.before ? flatten(*p.parts.before, model) : p.core;
  p.after = p.parts.after ? flatten(*p.parts.after, model) : p.core;
  p.kept = p.core.path_set();
  for (const auto& path : p.before.paths()) {
    if (!p.kept.count(path)) p.removed.insert(path);
  }
  for (const auto& path : p.after.paths()) {
    if (!p.kept.count(path)) p.added.insert(path);
  }
  p.core_name = model.qualified_name(p.parts.core);
  p.before_name = p.parts.before ? model.qualified_name(*p.parts.before) : p.core_name;
  p.after_name = p.parts.after ? model.qualified_name(*p.parts.after) : p.core_name;
  return p;
}

const EffectivePath* lookup(const std::map<EffectivePath, EffectivePath>& m, const EffectivePath& key) {
  auto it = m.find(key);
  return it == m.end() ? nullptr : &it->second;
}

bool within(const EffectivePath& path, const EffectivePath& root) {
  return path == root || (path.size() > root.size() && path.compare(0, root.size(), root) == 0 &&
                          path[root.size()] == '.');
}

EffectiveModel reduce_unchecked(const EffectiveModel& target, const Pattern& pattern, const Binding& binding) {
  std::vector<EffectivePath> gone;
  for (const auto& path : pattern.removed) {
    if (const auto* image = lookup(binding.map, path)) gone.push_back(*image);
  }
  auto is_gone = [&](const EffectivePath& path) {
    return std::any_of(gone.begin(), gone.end(), [&](const EffectivePath& g) { return within(path, g); });
  };
  auto dangles = [&](const std::optional<std::pair<EffectivePath, EffectivePath>>& ends) {
    return ends && (is_gone(ends->first) || is_gone(ends->second));
  };

  EffectiveModel out = target;
  std::function<void(EffectiveElement&, const EffectivePath&)> prune = [&](EffectiveElement& e,
                                                                           const EffectivePath& prefix) {
    std::vector<EffectiveElement> survivors;
    for (EffectiveElement& m : e.members) {
      const EffectivePath path = join_path(prefix, m.name);
      if (is_gone(path) || dangles(m.connect) || dangles(m.allocate)) continue;
      prune(m, path);
      survivors.push_back(std::move(m));
    }
    e.members = std::move(survivors);
  };
  prune(out.root, "");
  return out;
}

/// Where each added pattern element lands in the target. Elements whose
/// container cannot be determined are left out.
std::vector<std::pair<EffectivePath, EffectivePath>> place_added(const Pattern& pattern, const Binding& binding,
                                                                 const EffectiveModel& reduced) {
  std::vector<std::pair<EffectivePath, EffectivePath>> out;
  std::map<EffectivePath, EffectivePath> placed;
  for (const auto& path : pattern.after.paths()) {
    if (!pattern.added.count(path)) continue;
    const EffectivePath parent = parent_path(path);
    const EffectivePath* original = pattern.removed.count(path) ? lookup(binding.map, path) : nullptr;

    std::string name = last_segment(original ? *original : path);
    if (auto it = binding.renames.find(path); it != binding.renames.end()) name = it->second;

    std::optional<EffectivePath> container;
    if (original && reduced.find(parent_path(*original)) != nullptr) {
      container = parent_path(*original);
    } else if (parent.empty()) {
      container = EffectivePath();
    } else if (const auto* p = lookup(placed, parent)) {
      container = *p;
    } else if (pattern.kept.count(parent)) {
      if (const auto* image = lookup(binding.map, parent)) container = *image;
    }
    if (!container) continue;
    const EffectivePath result = join_path(*container, name);
    placed.emplace(path, result);
    out.emplace_back(path, result);
  }
  return out;
}

std::string describe(const std::pair<EffectivePath, EffectivePath>& ends) {
  return "'" + ends.first + "' to '" + ends.second + "'";
}

}  // namespace

// ---------------------------------------------------------------------------
// Step 2: applicability
// ---------------------------------------------------------------------------

ApplicabilityReport check_applicability(ElementId pattern_id, ElementId target_id, const Binding& binding,
                                        const SemanticModel& model) {
  const Pattern pattern = load_pattern(pattern_id, model);
  const EffectiveModel target = flatten(target_id, model);
  const std::string target_name = target.root.name;
  ApplicabilityReport report;
  auto violate = [&](const EffectivePath& path, ViolationReason reason, std::string message) {
    report.violations.push_back({path, reason, std::move(message)});
  };

  for (const auto& [key, value] : binding.map) {
    if (pattern.before.find(key) == nullptr || key.empty()) {
      violate(key, ViolationReason::unbound, "'" + key + "' is not an element of '" + pattern.before_name + "'");
    }
  }
  for (const auto& [key, value] : binding.renames) {
    if (!pattern.added.count(key)) {
      violate(key, ViolationReason::unbound, "renamed '" + key + "' is not added by '" + pattern.after_name + "'");
    }
  }

  std::map<EffectivePath, EffectivePath> first_source;
  for (const auto& path : pattern.before.paths()) {
    const EffectivePath* image = lookup(binding.map, path);
    if (image == nullptr) {
      violate(path, ViolationReason::unbound, "'" + path + "' is not bound to an element of '" + target_name + "'");
      continue;
    }
    const EffectiveElement* bound = target.find(*image);
    if (bound == nullptr || image->empty()) {
      violate(path, ViolationReason::unbound, "'" + *image + "' does not exist in '" + target_name + "'");
      continue;
    }
    if (auto [it, fresh] = first_source.emplace(*image, path); !fresh) {
      violate(path, ViolationReason::non_injective,
              "'" + path + "' and '" + it->second + "' are both bound to '" + *image + "'");
    }
    const EffectiveElement& element = *pattern.before.find(path);
    if (element.kind != bound->kind) {
      violate(path, ViolationReason::kind_mismatch,
              "'" + path + "' is a " + std::string(to_string(element.kind)) + " but '" + *image + "' is a " +
                  std::string(to_string(bound->kind)));
      continue;
    }
    const EffectivePath parent = parent_path(path);
    if (!parent.empty() && element.kind != ElementKind::Connection && element.kind != ElementKind::Allocation) {
      if (const EffectivePath* parent_image = lookup(binding.map, parent);
          parent_image && parent_path(*image) != *parent_image) {
        violate(path, ViolationReason::containment_broken,
                "'" + parent + "' owns '" + path + "' but '" + *parent_image + "' does not own '" + *image + "'");
      }
    }
    auto check_ends = [&](const auto& pattern_ends, const auto& target_ends, std::string_view what) {
      if (!pattern_ends) return;
      const EffectivePath* source = lookup(binding.map, pattern_ends->first);
      const EffectivePath* sink = lookup(binding.map, pattern_ends->second);
      if (source == nullptr || sink == nullptr) return;
      const std::pair<EffectivePath, EffectivePath> expected{*source, *sink};
      if (!target_ends) {
        violate(path, ViolationReason::endpoint_inconsistent,
                "'" + *image + "' has no " + std::string(what) + " clause; expected " + describe(expected));
      } else if (*target_ends != expected) {
        violate(path, ViolationReason::endpoint_inconsistent,
                "'" + *image + "' " + std::string(what) + "s " + describe(*target_ends) + " but '" + path +
                    "' requires " + describe(expected));
      }
    };
    check_ends(element.connect, bound->connect, "connect");
    check_ends(element.allocate, bound->allocate, "allocate");
  }

  const EffectiveModel reduced = reduce_unchecked(target, pattern, binding);
  std::set<EffectivePath> occupied = reduced.path_set();
  for (const auto& [path, result] : place_added(pattern, binding, reduced)) {
    const std::string name = last_segment(result);
    if (occupied.count(result)) {
      violate(path, ViolationReason::name_collision, "'" + result + "' already exists in '" + target_name + "'");
      continue;
    }
    EffectivePath scope = parent_path(result);
    while (!scope.empty()) {
      scope = parent_path(scope);
      if (occupied.count(join_path(scope, name))) {
        violate(path, ViolationReason::name_collision,
                "'" + result + "' would shadow '" + join_path(scope, name) + "'");
        break;
      }
    }
    occupied.insert(result);
  }

  report.ok = report.violations.empty();
  return report;
}

// ---------------------------------------------------------------------------
// Steps 3 and 4
// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void throw_not_applicable(const ApplicabilityReport& report) {
  std::string message = "pattern is not applicable:";
  for (const Violation& v : report.violations) {
    message += "\n  " + v.pattern_path + ": " + std::string(to_string(v.reason)) + ": " + v.message;
  }
  throw Error(ErrorCode::invalid_argument, message);
}

EffectiveModel reduce_checked(const EffectiveModel& target, const Pattern& pattern, const Binding& binding) {
  EffectiveModel out = reduce_unchecked(target, pattern, binding);
  for (const auto& path : pattern.kept) {
    const EffectivePath* image = lookup(binding.map, path);
    if (image == nullptr || out.find(*image) == nullptr) {
      throw Error(ErrorCode::invariant_violation,
                  "core element '" + path + "' lost its image '" + (image ? *image : std::string()) +
                      "' during reduction");
    }
  }
  return out;
}

EffectiveModel extend(const EffectiveModel& reduced, const Pattern& pattern, const Binding& binding,
                      const std::vector<std::pair<EffectivePath, EffectivePath>>& placement) {
  std::map<EffectivePath, EffectivePath> placed(placement.begin(), placement.end());
  auto image = [&](const EffectivePath& path, const EffectivePath& site) -> EffectivePath {
    if (const auto* p = lookup(placed, path)) return *p;
    if (pattern.kept.count(path)) {
      if (const auto* p = lookup(binding.map, path)) return *p;
    }
    throw Error(ErrorCode::dangling_endpoint,
                "'" + site + "' refers to '" + path + "', which is neither kept nor added");
  };

  EffectiveModel out = reduced;
  for (const auto& [path, result] : placement) {
    const EffectiveElement& source = *pattern.after.find(path);
    EffectiveElement copy = source;
    copy.members.clear();
    copy.name = last_segment(result);
    copy.anonymous = source.anonymous && !binding.renames.count(path) && !pattern.removed.count(path);
    copy.connect_ids.reset();
    copy.allocate_ids.reset();
    if (source.connect) copy.connect = {image(source.connect->first, path), image(source.connect->second, path)};
    if (source.allocate) {
      copy.allocate = {image(source.allocate->first, path), image(source.allocate->second, path)};
    }
    EffectiveElement* container = out.find(parent_path(result));
    if (container == nullptr || container->member(copy.name) != nullptr) {
      throw Error(ErrorCode::invariant_violation, "cannot place '" + path + "' at '" + result + "'");
    }
    container->members.push_back(std::move(copy));
  }

  std::function<void(const EffectiveElement&, const EffectivePath&)> audit = [&](const EffectiveElement& e,
                                                                                 const EffectivePath& prefix) {
    for (const EffectiveElement& m : e.members) {
      const EffectivePath path = join_path(prefix, m.name);
      for (const auto* ends : {&m.connect, &m.allocate}) {
        if (*ends && (out.find((*ends)->first) == nullptr || out.find((*ends)->second) == nullptr)) {
          throw Error(ErrorCode::dangling_endpoint, "'" + path + "' has an endpoint outside the model");
        }
      }
      audit(m, path);
    }
  };
  audit(out.root, "");
  return out;
}

}  // namespace

EffectiveModel reduce_to_core(ElementId target, ElementId pattern_id, const Binding& binding,
                              const SemanticModel& model) {
  const ApplicabilityReport report = check_applicability(pattern_id, target, binding, model);
  if (!report.ok) throw_not_applicable(report);
  return reduce_checked(flatten(target, model), load_pattern(pattern_id, model), binding);
}

EffectiveModel extend_with_after(const EffectiveModel& intermediate, ElementId pattern_id,
                                 const Binding& binding, const SemanticModel& model) {
  const Pattern pattern = load_pattern(pattern_id, model);
  return extend(intermediate, pattern, binding, place_added(pattern, binding, intermediate));
}

// ---------------------------------------------------------------------------
// Step 5 and text trees
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split_path(const EffectivePath& path) { return make_name(path).segments; }

std::optional<EffectivePath> lookup_reference(const EffectiveModel& tree, const EffectivePath& scope,
                                              const std::vector<std::string>& segments) {
  std::optional<EffectivePath> base;
  for (EffectivePath s = scope;; s = parent_path(s)) {
    const EffectiveElement* element = tree.find(s);
    if (element != nullptr && element->member(segments.front()) != nullptr) {
      base = join_path(s, segments.front());
      break;
    }
    if (s.empty()) {
      if (segments.front() == tree.root.name) base = EffectivePath();
      break;
    }
  }
  if (!base) return std::nullopt;
  for (std::size_t i = 1; i < segments.size(); ++i) {
    const EffectiveElement* element = tree.find(*base);
    if (element == nullptr || element->member(segments[i]) == nullptr) return std::nullopt;
    base = join_path(*base, segments[i]);
  }
  return base;
}

struct NodeShape {
  Construct construct;
  std::optional<std::string> keyword;
};

NodeShape shape_for(const EffectiveElement& e) {
  switch (e.kind) {
    case ElementKind::DarTwin:
      return {Construct::keyword_usage, "dartwin"};
    case ElementKind::TwinSystem:
      return {Construct::keyword_usage, "twinsystem"};
    case ElementKind::DigitalTwin:
      return {Construct::keyword_usage, "digitaltwin"};
    case ElementKind::Goal:
      return {Construct::keyword_usage, "goal"};
    case ElementKind::Arbiter:
      return {Construct::keyword_usage, "arbiter"};
    case ElementKind::Conflict:
      return {Construct::keyword_usage, "vs"};
    case ElementKind::DarTrans:
      return {Construct::keyword_usage, "dartrans"};
    case ElementKind::DartwinCore:
      return {Construct::keyword_usage, "dartwin_core"};
    case ElementKind::DartwinBefore:
      return {Construct::keyword_usage, "dartwin_before"};
    case ElementKind::DartwinAfter:
      return {Construct::keyword_usage, "dartwin_after"};
    case ElementKind::Part:
      return {e.is_definition ? Construct::part_def : Construct::part, std::nullopt};
    case ElementKind::Port:
      return {Construct::port, std::nullopt};
    case ElementKind::Connection:
      return {e.is_definition ? Construct::connection_def : Construct::connection, std::nullopt};
    case ElementKind::Allocation:
      return {Construct::allocation, std::nullopt};
    case ElementKind::Package:
      return {Construct::package, std::nullopt};
  }
  return {Construct::part, std::nullopt};
}

/// `origin` maps a tree path to the pattern element it stands for.
Node to_node(const EffectiveModel& tree, const EffectiveElement& e, const EffectivePath& path,
             const std::map<EffectivePath, EffectivePath>* origin, const std::string& pattern_root) {
  Node node;
  const NodeShape shape = shape_for(e);
  node.construct = shape.construct;
  node.hash_keyword = shape.keyword;
  if (!e.anonymous || path.empty()) node.name = e.name;
  node.doc = e.doc ? e.doc : e.conflict_explanation;
  node.multiplicity = e.multiplicity;
  if (origin != nullptr) {
    if (path.empty()) {
      node.specializes.push_back(make_name(pattern_root));
    } else if (const auto* o = lookup(*origin, path)) {
      node.specializes.push_back(make_name(pattern_root + "." + *o));
    }
  }
  const EffectivePath scope = parent_path(path);
  if (e.connect) {
    node.connect = EndpointClause{relative_reference(tree, scope, e.connect->first),
                                  relative_reference(tree, scope, e.connect->second)};
  }
  if (e.allocate) {
    node.allocate = EndpointClause{relative_reference(tree, scope, e.allocate->first),
                                   relative_reference(tree, scope, e.allocate->second)};
  }
  for (const EffectiveElement& m : e.members) {
    node.children.push_back(to_node(tree, m, join_path(path, m.name), origin, pattern_root));
  }
  return node;
}

SourceTree tree_of(const EffectiveModel& model, const std::map<EffectivePath, EffectivePath>* origin = nullptr,
                   const std::string& pattern_root = {}) {
  SourceTree out;
  out.roots.push_back(to_node(model, model.root, "", origin, pattern_root));
  return out;
}

}  // namespace

QualifiedName relative_reference(const EffectiveModel& tree, const EffectivePath& scope,
                                 const EffectivePath& path) {
  const std::vector<std::string> segments = split_path(path);
  for (std::size_t k = 1; k <= segments.size(); ++k) {
    std::vector<std::string> suffix(segments.end() - static_cast<std::ptrdiff_t>(k), segments.end());
    if (lookup_reference(tree, scope, suffix) == path) {
      QualifiedName out;
      out.segments = std::move(suffix);
      return out;
    }
  }
  QualifiedName out;
  out.segments.push_back(tree.root.name);
  out.segments.insert(out.segments.end(), segments.begin(), segments.end());
  return out;
}

SourceTree finalize(const EffectiveModel& extended) { return tree_of(extended); }

ApplyResult apply_transformation(ElementId pattern_id, ElementId target_id, const Binding& binding,
                                 const SemanticModel& model) {
  ApplyResult result;
  result.report = check_applicability(pattern_id, target_id, binding, model);
  if (!result.report.ok) return result;

  const Pattern pattern = load_pattern(pattern_id, model);
  const EffectiveModel target = flatten(target_id, model);
  const EffectiveModel reduced = reduce_checked(target, pattern, binding);
  const auto placement = place_added(pattern, binding, reduced);
  const EffectiveModel extended = extend(reduced, pattern, binding, placement);
  result.final_tree = finalize(extended);

  std::map<EffectivePath, EffectivePath> before_origin;
  std::map<EffectivePath, EffectivePath> core_origin;
  for (const auto& [from, to] : binding.map) {
    if (pattern.before.find(from) == nullptr) continue;
    before_origin.emplace(to, from);
    if (pattern.kept.count(from)) core_origin.emplace(to, from);
  }
  std::map<EffectivePath, EffectivePath> after_origin = core_origin;
  for (const auto& [from, to] : placement) after_origin[to] = from;

  result.steps.specialized = tree_of(target, &before_origin, pattern.before_name);
  result.steps.reduced = tree_of(reduced, &core_origin, pattern.core_name);
  result.steps.extended = tree_of(extended, &after_origin, pattern.after_name);

  ChangeSet& changes = result.changes;
  changes.kept = reduced.path_set();
  for (const auto& path : target.paths()) {
    if (!changes.kept.count(path)) changes.removed.insert(path);
  }
  for (const auto& path : extended.paths()) {
    if (!changes.kept.count(path)) changes.added.insert(path);
  }
  std::set_intersection(changes.removed.begin(), changes.removed.end(), changes.added.begin(),
                        changes.added.end(), std::inserter(changes.modified, changes.modified.end()));
  return result;
}

}  // namespace dartwin
