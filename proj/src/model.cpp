#include "dartwin/model.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace dartwin {

std::string_view to_string(ElementKind kind) {
  switch (kind) {
    case ElementKind::DarTwin:
      return "DarTwin";
    case ElementKind::TwinSystem:
      return "TwinSystem";
    case ElementKind::DigitalTwin:
      return "DigitalTwin";
    case ElementKind::Goal:
      return "Goal";
    case ElementKind::Arbiter:
      return "Arbiter";
    case ElementKind::Conflict:
      return "Conflict";
    case ElementKind::DarTrans:
      return "DarTrans";
    case ElementKind::DartwinCore:
      return "DartwinCore";
    case ElementKind::DartwinBefore:
      return "DartwinBefore";
    case ElementKind::DartwinAfter:
      return "DartwinAfter";
    case ElementKind::Part:
      return "Part";
    case ElementKind::Port:
      return "Port";
    case ElementKind::Connection:
      return "Connection";
    case ElementKind::Allocation:
      return "Allocation";
    case ElementKind::Package:
      return "Package";
  }
  return "Unknown";
}

std::optional<ElementKind> kind_for_keyword(std::string_view keyword) {
  static const std::map<std::string_view, ElementKind> table = {
      {"dartwin", ElementKind::DarTwin},
      {"twinsystem", ElementKind::TwinSystem},
      {"digitaltwin", ElementKind::DigitalTwin},
      {"goal", ElementKind::Goal},
      {"arbiter", ElementKind::Arbiter},
      {"vs", ElementKind::Conflict},
      {"dartrans", ElementKind::DarTrans},
      {"dartwin_core", ElementKind::DartwinCore},
      {"dartwin_before", ElementKind::DartwinBefore},
      {"dartwin_after", ElementKind::DartwinAfter},
  };
  auto it = table.find(keyword);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

bool is_dartwin_model_kind(ElementKind kind) {
  return kind == ElementKind::DarTwin || kind == ElementKind::DartwinCore ||
         kind == ElementKind::DartwinBefore || kind == ElementKind::DartwinAfter;
}

// ---------------------------------------------------------------------------
// SemanticModel queries
// ---------------------------------------------------------------------------

const std::map<std::string, ElementId>& SemanticModel::scope(std::optional<ElementId> owner) const {
  return owner ? scopes_.at(owner->value) : root_scope_;
}

std::optional<ElementId> SemanticModel::find_root(std::string_view name) const {
  auto it = root_scope_.find(std::string(name));
  if (it == root_scope_.end()) return std::nullopt;
  return it->second;
}

std::vector<ElementId> SemanticModel::bases(ElementId id) const {
  const Element& e = element(id);
  std::vector<ElementId> out;
  if (e.redefines) out.push_back(*e.redefines);
  if (e.typed_by) out.push_back(*e.typed_by);
  for (ElementId s : e.specializes) {
    if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
  }
  return out;
}

std::string SemanticModel::qualified_name(ElementId id) const {
  std::vector<std::string> parts;
  std::optional<ElementId> cur = id;
  while (cur) {
    const Element& e = element(*cur);
    parts.push_back(e.name.value_or("<anonymous>"));
    cur = e.owner;
  }
  std::string out;
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
    if (!out.empty()) out += '.';
    out += *it;
  }
  return out;
}

std::vector<ElementId> SemanticModel::children_of_kind(ElementId owner, ElementKind kind) const {
  std::vector<ElementId> out;
  for (ElementId m : element(owner).members) {
    if (element(m).kind == kind) out.push_back(m);
  }
  return out;
}

bool SemanticModel::specializes_transitively(ElementId id, ElementId base) const {
  std::set<ElementId> seen;
  std::vector<ElementId> stack = bases(id);
  while (!stack.empty()) {
    ElementId cur = stack.back();
    stack.pop_back();
    if (cur == base) return true;
    if (!seen.insert(cur).second) continue;
    for (ElementId b : bases(cur)) stack.push_back(b);
  }
  return false;
}

// ---------------------------------------------------------------------------
// Name resolution
// ---------------------------------------------------------------------------

class Resolver {
 public:
  using Hook = std::function<void(ElementId)>;

  explicit Resolver(const SemanticModel& model, Hook ensure_bases = {})
      : model_(model), ensure_bases_(std::move(ensure_bases)) {}

  Resolution resolve(const QualifiedName& path, std::optional<ElementId> scope,
                     std::optional<ElementId> exclude = std::nullopt) const {
    Resolution out;
    if (path.segments.empty()) return out;

    std::vector<ElementId> found;
    for (std::optional<ElementId> s = scope; s && found.empty(); s = model_.element(*s).owner) {
      found = find_member(*s, path.segments[0], exclude);
    }
    if (found.empty()) {
      auto it = model_.root_scope_.find(path.segments[0]);
      if (it != model_.root_scope_.end() && (!exclude || it->second != *exclude)) {
        found.push_back(it->second);
      }
    }
    for (std::size_t i = 0;; ++i) {
      if (found.empty()) {
        out.failed_segment = path.segments[i];
        return out;
      }
      if (found.size() > 1) {
        out.ambiguous = found;
        out.failed_segment = path.segments[i];
        return out;
      }
      if (i + 1 == path.segments.size()) break;
      found = find_member(found.front(), path.segments[i + 1], std::nullopt);
    }
    out.id = found.front();
    return out;
  }

  std::vector<ElementId> find_member(ElementId owner, const std::string& name,
                                     std::optional<ElementId> exclude) const {
    std::set<ElementId> visited;
    return find_member(owner, name, exclude, visited);
  }

 private:
  std::vector<ElementId> find_member(ElementId owner, const std::string& name,
                                     std::optional<ElementId> exclude,
                                     std::set<ElementId>& visited) const {
    if (!visited.insert(owner).second) return {};
    if (ensure_bases_) ensure_bases_(owner);
    const auto& table = model_.scopes_.at(owner.value);
    if (auto it = table.find(name); it != table.end() && (!exclude || it->second != *exclude)) {
      return {it->second};
    }
    std::vector<ElementId> found;
    for (ElementId base : model_.bases(owner)) {
      for (ElementId c : find_member(base, name, std::nullopt, visited)) {
        if (std::find(found.begin(), found.end(), c) == found.end()) found.push_back(c);
      }
    }
    if (found.size() > 1) {
      // A candidate redefined by another candidate is hidden by it.
      std::vector<ElementId> kept;
      for (ElementId c : found) {
        bool hidden = false;
        for (ElementId d : found) {
          if (d != c && redefines_chain(d, c)) hidden = true;
        }
        if (!hidden) kept.push_back(c);
      }
      found = std::move(kept);
    }
    return found;
  }

  bool redefines_chain(ElementId from, ElementId target) const {
    std::set<ElementId> seen;
    std::optional<ElementId> cur = model_.element(from).redefines;
    while (cur && seen.insert(*cur).second) {
      if (*cur == target) return true;
      cur = model_.element(*cur).redefines;
    }
    return false;
  }

  const SemanticModel& model_;
  Hook ensure_bases_;
};

Resolution try_resolve(const QualifiedName& path, std::optional<ElementId> scope,
                       const SemanticModel& model) {
  return Resolver(model).resolve(path, scope);
}

ElementId resolve(const QualifiedName& path, std::optional<ElementId> scope,
                  const SemanticModel& model) {
  Resolution r = try_resolve(path, scope, model);
  if (r.id) return *r.id;
  const std::string where = scope ? model.qualified_name(*scope) : std::string("<root>");
  if (!r.ambiguous.empty()) {
    throw Error(ErrorCode::ambiguous_name,
                "ambiguous name '" + r.failed_segment + "' in '" + path.str() + "' from " + where);
  }
  throw Error(ErrorCode::unresolved_name,
              "cannot resolve '" + r.failed_segment + "' in '" + path.str() + "' from " + where);
}

// ---------------------------------------------------------------------------
// Building
// ---------------------------------------------------------------------------

class ModelBuilder {
 public:
  SemanticModel build(std::span<const SourceTree> trees) {
    for (const SourceTree& tree : trees) {
      for (const Node& node : tree.roots) add(node, std::nullopt);
    }
    state_.assign(model_.elements_.size(), State::pending);
    for (std::size_t i = 0; i < model_.elements_.size(); ++i) {
      ensure_bases(ElementId{static_cast<std::uint32_t>(i)});
    }
    for (std::size_t i = 0; i < model_.elements_.size(); ++i) {
      resolve_endpoints(model_.elements_[i]);
    }
    return std::move(model_);
  }

 private:
  enum class State { pending, in_progress, done };

  void diag(Severity severity, Span span, std::string code, std::string message) {
    model_.diagnostics_.push_back({severity, span, std::move(code), std::move(message)});
  }

  static std::optional<ElementKind> core_kind(Construct c) {
    switch (c) {
      case Construct::package:
      case Construct::library_package:
        return ElementKind::Package;
      case Construct::part:
      case Construct::part_def:
        return ElementKind::Part;
      case Construct::port:
        return ElementKind::Port;
      case Construct::connection:
      case Construct::connection_def:
        return ElementKind::Connection;
      case Construct::allocation:
        return ElementKind::Allocation;
      case Construct::requirement:
      case Construct::requirement_def:
        return ElementKind::Goal;
      default:
        return std::nullopt;
    }
  }

  void add(const Node& node, std::optional<ElementId> owner) {
    if (node.construct == Construct::import) {
      model_.imports_.push_back({node.import_path.value_or(QualifiedName{}), node.import_wildcard,
                                 owner});
      return;
    }
    if (node.construct == Construct::metadata_def) {
      const std::string keyword = node.short_name.value_or(node.name.value_or(""));
      model_.metadata_.push_back({keyword, node.name, node.span});
      if (!is_dartwin_keyword(keyword)) {
        diag(Severity::warning, node.span, "UnknownKeyword",
             "unknown DarTwin keyword '" + keyword + "' declared by metadata def");
      }
      return;
    }

    std::optional<ElementKind> kind;
    if (node.construct == Construct::keyword_usage) {
      kind = kind_for_keyword(node.hash_keyword.value_or(""));
      if (!kind) {
        diag(Severity::error, node.span, "UnknownKeyword",
             "unknown DarTwin keyword '#" + node.hash_keyword.value_or("") + "'");
        return;
      }
    } else {
      kind = core_kind(node.construct);
    }
    if (!kind) return;

    std::optional<std::string> name = node.name;
    if (!name && node.redefines && !node.redefines->segments.empty()) {
      name = node.redefines->segments.back();
    }
    auto& table = owner ? model_.scopes_[owner->value] : model_.root_scope_;
    if (name && table.count(*name)) {
      diag(Severity::error, node.span, "DuplicateName",
           "duplicate name '" + *name + "'; the first declaration wins");
      return;
    }

    const ElementId id{static_cast<std::uint32_t>(model_.elements_.size())};
    Element e;
    e.id = id;
    e.kind = *kind;
    e.name = name;
    e.declared_name = node.name.has_value();
    e.owner = owner;
    e.doc = node.doc;
    e.multiplicity = node.multiplicity;
    e.is_definition = node.construct == Construct::part_def ||
                      node.construct == Construct::requirement_def ||
                      node.construct == Construct::connection_def;
    e.span = node.span;
    e.specializes_paths = node.specializes;
    e.redefines_path = node.redefines;
    e.typed_by_path = node.typed_by;
    e.connect_paths = node.connect;
    e.allocate_paths = node.allocate;
    if (*kind == ElementKind::Conflict) e.conflict_explanation = node.doc;

    if (name) table.emplace(*name, id);
    model_.elements_.push_back(std::move(e));
    model_.scopes_.emplace_back();  // invalidates `table`
    if (owner) {
      model_.elements_[owner->value].members.push_back(id);
    } else {
      model_.roots_.push_back(id);
    }
    for (const Node& child : node.children) add(child, id);
  }

  Resolver resolver() {
    return Resolver(model_, [this](ElementId id) { ensure_bases(id); });
  }

  std::optional<ElementId> resolve_reported(const QualifiedName& path,
                                            std::optional<ElementId> scope, Span site,
                                            std::optional<ElementId> exclude = std::nullopt) {
    Resolution r = resolver().resolve(path, scope, exclude);
    if (r.id) return r.id;
    const std::string where = scope ? model_.qualified_name(*scope) : std::string("<root>");
    Span span = path.span.end > path.span.begin ? path.span : site;
    if (!r.ambiguous.empty()) {
      diag(Severity::error, span, "AmbiguousName",
           "ambiguous name '" + r.failed_segment + "' in '" + path.str() + "' (scope " + where + ")");
    } else {
      diag(Severity::error, span, "UnresolvedName",
           "cannot resolve '" + r.failed_segment + "' in '" + path.str() + "' (scope " + where + ")");
    }
    return std::nullopt;
  }

  void ensure_bases(ElementId id) {
    if (state_[id.value] != State::pending) return;
    state_[id.value] = State::in_progress;
    // Copy the paths: resolution may touch other elements but never reallocates.
    const Element snapshot = model_.elements_[id.value];
    const std::optional<ElementId> scope = snapshot.owner;
    if (snapshot.redefines_path) {
      auto target = resolve_reported(*snapshot.redefines_path, scope, snapshot.span, id);
      if (target && *target == id) target.reset();
      model_.elements_[id.value].redefines = target;
    }
    if (snapshot.typed_by_path) {
      model_.elements_[id.value].typed_by =
          resolve_reported(*snapshot.typed_by_path, scope, snapshot.span);
    }
    for (const QualifiedName& p : snapshot.specializes_paths) {
      if (auto target = resolve_reported(p, scope, snapshot.span)) {
        model_.elements_[id.value].specializes.push_back(*target);
      }
    }
    state_[id.value] = State::done;
  }

  void resolve_endpoints(Element& e) {
    const std::optional<ElementId> scope = e.owner;
    if (e.connect_paths) {
      auto s = resolve_reported(e.connect_paths->source, scope, e.span);
      auto t = resolve_reported(e.connect_paths->target, scope, e.span);
      if (s && t) {
        e.connect = EndpointIds{*s, *t};
        if (e.kind == ElementKind::Connection) {
          check_port(*s, e.connect_paths->source, e);
          check_port(*t, e.connect_paths->target, e);
        }
      }
    }
    if (e.allocate_paths) {
      auto s = resolve_reported(e.allocate_paths->source, scope, e.span);
      auto t = resolve_reported(e.allocate_paths->target, scope, e.span);
      if (s && t) e.allocate = EndpointIds{*s, *t};
    }
  }

  void check_port(ElementId endpoint, const QualifiedName& path, const Element& connection) {
    const Element& target = model_.element(endpoint);
    if (target.kind != ElementKind::Port) {
      diag(Severity::error, path.span.end > path.span.begin ? path.span : connection.span,
           "KindMismatch",
           "connection '" + connection.name.value_or("<anonymous>") + "' endpoint '" + path.str() +
               "' is a " + std::string(to_string(target.kind)) + ", not a Port");
    }
  }

  SemanticModel model_;
  std::vector<State> state_;
};

SemanticModel build_model(const SourceTree& tree) {
  return build_model(std::span<const SourceTree>(&tree, 1));
}

SemanticModel build_model(std::span<const SourceTree> trees) {
  return ModelBuilder().build(trees);
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

namespace {

std::string display_name(const SemanticModel& model, ElementId id) {
  return model.element(id).name.value_or("<anonymous>");
}

// Ports visible on an element, own first then through bases.
std::vector<ElementId> visible_ports(const SemanticModel& model, ElementId id) {
  std::vector<ElementId> out;
  std::set<std::string> names;
  std::set<ElementId> seen;
  std::function<void(ElementId)> walk = [&](ElementId cur) {
    if (!seen.insert(cur).second) return;
    for (ElementId m : model.element(cur).members) {
      const Element& me = model.element(m);
      if (me.kind != ElementKind::Port) continue;
      if (me.name && !names.insert(*me.name).second) continue;
      out.push_back(m);
    }
    for (ElementId b : model.bases(cur)) walk(b);
  };
  walk(id);
  return out;
}

bool starts_with(const std::optional<std::string>& s, std::string_view prefix) {
  return s && s->compare(0, prefix.size(), prefix) == 0;
}

void validate_dartrans(const SemanticModel& model, const Element& e, std::vector<Diagnostic>& out) {
  const auto cores = model.children_of_kind(e.id, ElementKind::DartwinCore);
  const auto befores = model.children_of_kind(e.id, ElementKind::DartwinBefore);
  const auto afters = model.children_of_kind(e.id, ElementKind::DartwinAfter);
  const std::string name = display_name(model, e.id);
  if (cores.empty()) {
    out.push_back({Severity::error, e.span, "MissingCore",
                   "dartrans '" + name + "' has no #dartwin_core"});
  }
  if (cores.size() > 1) {
    out.push_back({Severity::error, e.span, "DuplicateCore",
                   "dartrans '" + name + "' has more than one #dartwin_core"});
  }
  if (befores.size() > 1) {
    out.push_back({Severity::error, e.span, "DuplicateBefore",
                   "dartrans '" + name + "' has more than one #dartwin_before"});
  }
  if (afters.size() > 1) {
    out.push_back({Severity::error, e.span, "DuplicateAfter",
                   "dartrans '" + name + "' has more than one #dartwin_after"});
  }
  if (cores.size() != 1) return;
  const ElementId core = cores.front();
  std::vector<ElementId> sides = befores;
  sides.insert(sides.end(), afters.begin(), afters.end());
  for (ElementId side : sides) {
    if (model.specializes_transitively(side, core)) continue;
    const Element& se = model.element(side);
    bool via_core_base = false;
    for (ElementId core_base : model.bases(core)) {
      if (side == core_base || model.specializes_transitively(side, core_base)) via_core_base = true;
    }
    std::string targets;
    for (ElementId s : se.specializes) {
      if (!targets.empty()) targets += ", ";
      targets += "'" + display_name(model, s) + "'";
    }
    if (via_core_base && !targets.empty()) {
      out.push_back({Severity::warning, se.span, "CoreNotSpecialized",
                     "'" + display_name(model, side) + "' specializes " + targets + ", not '" +
                         display_name(model, core) + "'"});
    } else {
      out.push_back({Severity::warning, se.span, "CoreNotSpecialized",
                     "'" + display_name(model, side) + "' does not specialize '" +
                         display_name(model, core) + "'"});
    }
  }
}

}  // namespace

std::vector<Diagnostic> validate(const SemanticModel& model) {
  std::vector<Diagnostic> out;
  for (const Element& e : model.elements()) {
    switch (e.kind) {
      case ElementKind::DarTrans:
        validate_dartrans(model, e, out);
        break;
      case ElementKind::Allocation: {
        if (!e.allocate) break;
        const Element& goal = model.element(e.allocate->first);
        const Element& target = model.element(e.allocate->second);
        if (goal.kind != ElementKind::Goal) {
          out.push_back({Severity::error, e.span, "KindMismatch",
                         "allocation '" + e.name.value_or("<anonymous>") +
                             "' must allocate a Goal, found " + std::string(to_string(goal.kind)) +
                             " '" + goal.name.value_or("<anonymous>") + "'"});
        }
        if (target.kind != ElementKind::DigitalTwin && target.kind != ElementKind::TwinSystem) {
          out.push_back({Severity::warning, e.span, "KindMismatch",
                         "allocation '" + e.name.value_or("<anonymous>") +
                             "' targets a " + std::string(to_string(target.kind)) +
                             "; expected a DigitalTwin or TwinSystem"});
        }
        break;
      }
      case ElementKind::Arbiter: {
        std::uint64_t inputs = 0;
        std::uint64_t outputs = 0;
        bool unbounded_output = false;
        for (ElementId p : visible_ports(model, e.id)) {
          const Element& pe = model.element(p);
          if (starts_with(pe.name, "input")) {
            inputs += pe.multiplicity ? pe.multiplicity->lower : 1;
          } else if (starts_with(pe.name, "output")) {
            if (pe.multiplicity && !pe.multiplicity->upper) unbounded_output = true;
            outputs += pe.multiplicity ? pe.multiplicity->upper.value_or(0) : 1;
          }
        }
        if (inputs < 2) {
          out.push_back({Severity::error, e.span, "ArbiterInputs",
                         "arbiter '" + e.name.value_or("<anonymous>") + "' needs at least 2 inputs, has " +
                             std::to_string(inputs)});
        }
        if (outputs != 1 || unbounded_output) {
          out.push_back({Severity::error, e.span, "ArbiterOutput",
                         "arbiter '" + e.name.value_or("<anonymous>") +
                             "' needs exactly 1 output"});
        }
        break;
      }
      case ElementKind::Conflict: {
        const bool ok = e.connect && model.element(e.connect->first).kind == ElementKind::Goal &&
                        model.element(e.connect->second).kind == ElementKind::Goal &&
                        e.connect->first != e.connect->second;
        if (!ok) {
          out.push_back({Severity::error, e.span, "ConflictEnds",
                         "conflict '" + e.name.value_or("<anonymous>") +
                             "' must relate exactly two goals"});
        }
        break;
      }
      default:
        break;
    }
  }
  return out;
}

}  // namespace dartwin
