#include "dartwin/flatten.hpp"

#include <algorithm>
#include <map>

#include <json.hpp>

namespace dartwin {

std::string_view to_string(Contribution contribution) {
  switch (contribution) {
    case Contribution::own:
      return "own";
    case Contribution::inherited:
      return "inherited";
    case Contribution::redefined:
      return "redefined";
  }
  return "own";
}

// ---------------------------------------------------------------------------
// Paths
// ---------------------------------------------------------------------------

EffectivePath join_path(std::string_view parent, std::string_view name) {
  if (parent.empty()) return std::string(name);
  return std::string(parent) + "." + std::string(name);
}

EffectivePath parent_path(std::string_view path) {
  const auto dot = path.rfind('.');
  return dot == std::string_view::npos ? std::string() : std::string(path.substr(0, dot));
}

std::string last_segment(std::string_view path) {
  const auto dot = path.rfind('.');
  return std::string(dot == std::string_view::npos ? path : path.substr(dot + 1));
}

const EffectiveElement* EffectiveElement::member(std::string_view name) const {
  for (const EffectiveElement& m : members) {
    if (m.name == name) return &m;
  }
  return nullptr;
}

EffectiveElement* EffectiveElement::member(std::string_view name) {
  for (EffectiveElement& m : members) {
    if (m.name == name) return &m;
  }
  return nullptr;
}

const EffectiveElement* EffectiveModel::find(std::string_view path) const {
  return const_cast<EffectiveModel*>(this)->find(path);
}

EffectiveElement* EffectiveModel::find(std::string_view path) {
  EffectiveElement* cur = &root;
  std::size_t start = 0;
  while (cur != nullptr && start < path.size()) {
    const auto dot = path.find('.', start);
    const auto end = dot == std::string_view::npos ? path.size() : dot;
    cur = cur->member(path.substr(start, end - start));
    start = end + 1;
  }
  return cur;
}

namespace {

void collect_paths(const EffectiveElement& e, const EffectivePath& prefix,
                   std::vector<EffectivePath>& out) {
  for (const EffectiveElement& m : e.members) {
    EffectivePath p = join_path(prefix, m.name);
    out.push_back(p);
    collect_paths(m, p, out);
  }
}

}  // namespace

std::vector<EffectivePath> EffectiveModel::paths() const {
  std::vector<EffectivePath> out;
  collect_paths(root, "", out);
  return out;
}

std::set<EffectivePath> EffectiveModel::path_set() const {
  auto p = paths();
  return {p.begin(), p.end()};
}

// ---------------------------------------------------------------------------
// Flattening
// ---------------------------------------------------------------------------

namespace {

std::set<ElementId> sources(const EffectiveElement& e) {
  std::set<ElementId> out;
  for (const Provenance& p : e.provenance) out.insert(p.source);
  return out;
}

void mark_inherited(EffectiveElement& e) {
  for (Provenance& p : e.provenance) p.contribution = Contribution::inherited;
  for (EffectiveElement& m : e.members) mark_inherited(m);
}

class Flattener {
 public:
  explicit Flattener(const SemanticModel& model) : model_(model) {}

  EffectiveElement expand(ElementId id, const EffectiveElement* inherited) {
    if (std::find(stack_.begin(), stack_.end(), id) != stack_.end()) throw_cycle(id);
    stack_.push_back(id);
    const Element& e = model_.element(id);

    EffectiveElement out;
    out.name = effective_name(e);
    out.anonymous = !e.name.has_value();
    out.kind = e.kind;
    out.doc = e.doc;
    out.multiplicity = e.multiplicity;
    out.conflict_explanation = e.conflict_explanation;
    out.is_definition = e.is_definition;
    out.connect_ids = e.connect;
    out.allocate_ids = e.allocate;
    if (inherited != nullptr) {
      out.provenance = inherited->provenance;
      out.provenance.push_back({id, Contribution::redefined});
      out.members = inherited->members;
      if (!out.doc) out.doc = inherited->doc;
      if (!out.multiplicity) out.multiplicity = inherited->multiplicity;
      if (!out.conflict_explanation) out.conflict_explanation = inherited->conflict_explanation;
      if (!out.connect_ids) out.connect_ids = inherited->connect_ids;
      if (!out.allocate_ids) out.allocate_ids = inherited->allocate_ids;
    } else {
      out.provenance.push_back({id, Contribution::own});
    }

    std::vector<ElementId> bases;
    if (e.redefines && inherited == nullptr) bases.push_back(*e.redefines);
    if (e.typed_by) bases.push_back(*e.typed_by);
    for (ElementId s : e.specializes) bases.push_back(s);

    for (ElementId base : bases) {
      const EffectiveElement& expanded = context_free(base);
      for (EffectiveElement m : expanded.members) {
        mark_inherited(m);
        merge_inherited(out.members, std::move(m), out.name);
      }
    }

    for (ElementId member_id : e.members) {
      const Element& me = model_.element(member_id);
      std::optional<std::size_t> slot;
      if (me.redefines) {
        for (std::size_t i = 0; i < out.members.size(); ++i) {
          const auto& prov = out.members[i].provenance;
          if (std::any_of(prov.begin(), prov.end(),
                          [&](const Provenance& p) { return p.source == *me.redefines; })) {
            slot = i;
            break;
          }
        }
        if (slot) {
          const EffectiveElement previous = out.members[*slot];
          out.members[*slot] = expand(member_id, &previous);
          continue;
        }
      }
      EffectiveElement expanded = expand(member_id, nullptr);
      for (std::size_t i = 0; i < out.members.size(); ++i) {
        if (out.members[i].name == expanded.name) slot = i;
      }
      if (slot) {
        out.members[*slot] = std::move(expanded);  // own declaration shadows the inherited one
      } else {
        out.members.push_back(std::move(expanded));
      }
    }

    stack_.pop_back();
    return out;
  }

  const EffectiveElement& context_free(ElementId id) {
    auto it = cache_.find(id);
    if (it != cache_.end()) return it->second;
    EffectiveElement e = expand(id, nullptr);
    return cache_.emplace(id, std::move(e)).first->second;
  }

 private:
  std::string effective_name(const Element& e) const {
    if (e.name) return *e.name;
    std::size_t position = 0;
    if (e.owner) {
      const auto& siblings = model_.element(*e.owner).members;
      position = static_cast<std::size_t>(std::find(siblings.begin(), siblings.end(), e.id) -
                                          siblings.begin());
    }
    return "_" + std::string(to_string(e.kind)) + std::to_string(position);
  }

  [[noreturn]] void throw_cycle(ElementId id) const {
    std::string path;
    auto it = std::find(stack_.begin(), stack_.end(), id);
    for (; it != stack_.end(); ++it) path += model_.qualified_name(*it) + " -> ";
    path += model_.qualified_name(id);
    throw Error(ErrorCode::specialization_cycle, "specialization cycle: " + path);
  }

  void merge_inherited(std::vector<EffectiveElement>& members, EffectiveElement incoming,
                       const std::string& owner_name) const {
    for (EffectiveElement& existing : members) {
      if (existing.name != incoming.name) continue;
      const auto have = sources(existing);
      const auto got = sources(incoming);
      if (have == got || std::includes(have.begin(), have.end(), got.begin(), got.end())) return;
      if (std::includes(got.begin(), got.end(), have.begin(), have.end())) {
        existing = std::move(incoming);
        return;
      }
      throw Error(ErrorCode::ambiguous_name, "'" + owner_name + "' inherits two distinct members named '" +
                                                 incoming.name + "'");
    }
    members.push_back(std::move(incoming));
  }

  const SemanticModel& model_;
  std::vector<ElementId> stack_;
  std::map<ElementId, EffectiveElement> cache_;
};

std::size_t common_prefix(std::string_view a, std::string_view b) {
  std::size_t segments = 0;
  std::size_t i = 0;
  while (i < a.size() && i < b.size() && a[i] == b[i]) {
    if (a[i] == '.') ++segments;
    ++i;
  }
  const bool a_done = i == a.size() || a[i] == '.';
  const bool b_done = i == b.size() || b[i] == '.';
  if (i > 0 && a_done && b_done) ++segments;
  return segments;
}

class EndpointRewriter {
 public:
  EndpointRewriter(const SemanticModel& model, EffectiveModel& effective)
      : model_(model), effective_(effective) {
    index(effective_.root, "");
  }

  void run() { rewrite(effective_.root, ""); }

 private:
  void index(const EffectiveElement& e, const EffectivePath& path) {
    for (const EffectiveElement& m : e.members) {
      EffectivePath p = join_path(path, m.name);
      for (const Provenance& prov : m.provenance) {
        auto& list = by_source_[prov.source];
        if (std::find(list.begin(), list.end(), p) == list.end()) list.push_back(p);
      }
      index(m, p);
    }
  }

  EffectivePath locate(ElementId target, const EffectivePath& site) const {
    auto it = by_source_.find(target);
    if (it == by_source_.end() || it->second.empty()) {
      throw Error(ErrorCode::dangling_endpoint,
                  "endpoint '" + model_.qualified_name(target) + "' of '" + site +
                      "' is not part of the flattened '" + effective_.root.name + "'");
    }
    const EffectivePath* best = &it->second.front();
    std::size_t best_score = common_prefix(*best, site);
    for (const EffectivePath& candidate : it->second) {
      const std::size_t score = common_prefix(candidate, site);
      if (score > best_score) {
        best = &candidate;
        best_score = score;
      }
    }
    return *best;
  }

  void rewrite(EffectiveElement& e, const EffectivePath& path) {
    for (EffectiveElement& m : e.members) {
      EffectivePath p = join_path(path, m.name);
      if (m.connect_ids) {
        m.connect = {locate(m.connect_ids->first, p), locate(m.connect_ids->second, p)};
      }
      if (m.allocate_ids) {
        m.allocate = {locate(m.allocate_ids->first, p), locate(m.allocate_ids->second, p)};
      }
      rewrite(m, p);
    }
  }

  const SemanticModel& model_;
  EffectiveModel& effective_;
  std::map<ElementId, std::vector<EffectivePath>> by_source_;
};

}  // namespace

std::vector<EffectiveElement> effective_members(ElementId id, const SemanticModel& model) {
  return Flattener(model).expand(id, nullptr).members;
}

EffectiveModel flatten(ElementId id, const SemanticModel& model) {
  const Element& e = model.element(id);
  if (!is_dartwin_model_kind(e.kind)) {
    throw Error(ErrorCode::invalid_argument,
                "cannot flatten '" + model.qualified_name(id) + "': it is a " +
                    std::string(to_string(e.kind)) + ", not a dartwin model");
  }
  EffectiveModel out;
  out.root = Flattener(model).expand(id, nullptr);
  EndpointRewriter(model, out).run();
  return out;
}

// ---------------------------------------------------------------------------
// DarTrans change sets
// ---------------------------------------------------------------------------

DarTransParts dartrans_parts(ElementId id, const SemanticModel& model) {
  const Element& e = model.element(id);
  if (e.kind != ElementKind::DarTrans) {
    throw Error(ErrorCode::invalid_argument,
                "'" + model.qualified_name(id) + "' is not a #dartrans");
  }
  const auto cores = model.children_of_kind(id, ElementKind::DartwinCore);
  if (cores.size() != 1) {
    throw Error(ErrorCode::invalid_argument,
                "dartrans '" + model.qualified_name(id) + "' must own exactly one #dartwin_core");
  }
  DarTransParts parts{id, cores.front(), std::nullopt, std::nullopt};
  if (auto b = model.children_of_kind(id, ElementKind::DartwinBefore); !b.empty()) parts.before = b.front();
  if (auto a = model.children_of_kind(id, ElementKind::DartwinAfter); !a.empty()) parts.after = a.front();
  return parts;
}

namespace {

void check_side(const SemanticModel& model, ElementId side, ElementId core,
                const std::set<EffectivePath>& kept, ChangeSet& out) {
  if (model.specializes_transitively(side, core)) return;
  const std::string side_name = model.element(side).name.value_or("<anonymous>");
  const std::string core_name = model.element(core).name.value_or("<anonymous>");
  for (ElementId base : model.bases(core)) {
    if (side != base && !model.specializes_transitively(side, base)) continue;
    if (flatten(base, model).path_set() == kept) {
      out.notes.push_back({Severity::note, model.element(side).span, "CoreEquivalentBase",
                           "'" + side_name + "' specializes '" +
                               model.element(base).name.value_or("<anonymous>") +
                               "', which flattens to the same elements as '" + core_name + "'"});
      return;
    }
  }
  out.notes.push_back({Severity::warning, model.element(side).span, "CoreNotSpecialized",
                       "'" + side_name + "' does not specialize '" + core_name +
                           "'; changes are computed against the core"});
}

}  // namespace

ChangeSet diff(ElementId dartrans, const SemanticModel& model) {
  const DarTransParts parts = dartrans_parts(dartrans, model);
  ChangeSet out;
  out.kept = flatten(parts.core, model).path_set();
  const auto before = parts.before ? flatten(*parts.before, model).path_set() : out.kept;
  const auto after = parts.after ? flatten(*parts.after, model).path_set() : out.kept;
  if (parts.before) check_side(model, *parts.before, parts.core, out.kept, out);
  if (parts.after) check_side(model, *parts.after, parts.core, out.kept, out);

  std::set_difference(before.begin(), before.end(), out.kept.begin(), out.kept.end(),
                      std::inserter(out.removed, out.removed.end()));
  std::set_difference(after.begin(), after.end(), out.kept.begin(), out.kept.end(),
                      std::inserter(out.added, out.added.end()));
  std::set_intersection(out.removed.begin(), out.removed.end(), out.added.begin(), out.added.end(),
                        std::inserter(out.modified, out.modified.end()));
  return out;
}

std::string changeset_json(const ChangeSet& changes) {
  nlohmann::ordered_json j;
  j["kept"] = changes.kept;
  j["removed"] = changes.removed;
  j["added"] = changes.added;
  j["modified"] = changes.modified;
  return j.dump(2) + "\n";
}

namespace {

nlohmann::ordered_json effective_element_json(const EffectiveElement& e, const SemanticModel& model) {
  nlohmann::ordered_json j;
  j["name"] = e.name;
  j["kind"] = std::string(to_string(e.kind));
  nlohmann::ordered_json provenance = nlohmann::ordered_json::array();
  for (const Provenance& p : e.provenance) {
    provenance.push_back({{"source", model.qualified_name(p.source)},
                          {"contribution", std::string(to_string(p.contribution))}});
  }
  j["provenance"] = std::move(provenance);
  if (e.doc) j["doc"] = *e.doc;
  if (e.connect) j["connect"] = {{"source", e.connect->first}, {"target", e.connect->second}};
  if (e.allocate) j["allocate"] = {{"source", e.allocate->first}, {"target", e.allocate->second}};
  nlohmann::ordered_json members = nlohmann::ordered_json::array();
  for (const EffectiveElement& m : e.members) members.push_back(effective_element_json(m, model));
  j["members"] = std::move(members);
  return j;
}

}  // namespace

std::string effective_json(const EffectiveModel& effective, const SemanticModel& model) {
  return effective_element_json(effective.root, model).dump(2) + "\n";
}

}  // namespace dartwin
