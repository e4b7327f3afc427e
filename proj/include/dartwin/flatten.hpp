#pragma once

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dartwin/model.hpp"

namespace dartwin {

enum class Contribution { own, inherited, redefined };

std::string_view to_string(Contribution contribution);

struct Provenance {
  ElementId source;
  Contribution contribution = Contribution::own;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

/// Dotted path relative to the flattened root ("TwinSystem.DT1.p11").
using EffectivePath = std::string;

struct EffectiveElement {
  std::string name;
  bool anonymous = false;  // name was synthesized
  ElementKind kind = ElementKind::Part;
  std::vector<Provenance> provenance;  // never empty
  std::vector<EffectiveElement> members;
  std::optional<std::string> doc;
  std::optional<Multiplicity> multiplicity;
  std::optional<std::string> conflict_explanation;
  bool is_definition = false;

  /// Endpoints as effective paths; filled by flatten().
  std::optional<std::pair<EffectivePath, EffectivePath>> connect;
  std::optional<std::pair<EffectivePath, EffectivePath>> allocate;

  /// Endpoints as source element ids, before rewriting.
  std::optional<EndpointIds> connect_ids;
  std::optional<EndpointIds> allocate_ids;

  const EffectiveElement* member(std::string_view name) const;
  EffectiveElement* member(std::string_view name);
};

struct EffectiveModel {
  EffectiveElement root;

  /// Empty path means the root itself.
  const EffectiveElement* find(std::string_view path) const;
  EffectiveElement* find(std::string_view path);

  /// Every descendant path of the root, pre-order, declaration order.
  std::vector<EffectivePath> paths() const;
  std::set<EffectivePath> path_set() const;
};

EffectivePath join_path(std::string_view parent, std::string_view name);
EffectivePath parent_path(std::string_view path);
std::string last_segment(std::string_view path);

/// Members of `id` after closing `:>` chains: inherited first (base order),
/// then own; a `:>>` member replaces its target in place and keeps the
/// target's members beneath it. Throws Error(specialization_cycle |
/// ambiguous_name).
std::vector<EffectiveElement> effective_members(ElementId id, const SemanticModel& model);

/// Recursively flattened model with endpoints rewritten to effective paths.
/// Throws Error(dangling_endpoint) when an endpoint leaves the tree.
EffectiveModel flatten(ElementId id, const SemanticModel& model);

struct ChangeSet {
  std::set<EffectivePath> kept;
  std::set<EffectivePath> removed;
  std::set<EffectivePath> added;
  std::set<EffectivePath> modified;  // removed ∩ added
  std::vector<Diagnostic> notes;
};

struct DarTransParts {
  ElementId dartrans;
  ElementId core;
  std::optional<ElementId> before;  // absent means "same as core"
  std::optional<ElementId> after;
};

/// Throws Error(invalid_argument) when `id` is not a dartrans with one core.
DarTransParts dartrans_parts(ElementId id, const SemanticModel& model);

/// Kept/removed/added/modified partition of a dartrans.
ChangeSet diff(ElementId dartrans, const SemanticModel& model);

std::string changeset_json(const ChangeSet& changes);

/// Effective tree as JSON; provenance sources are qualified names.
std::string effective_json(const EffectiveModel& effective, const SemanticModel& model);

}  // namespace dartwin
