#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dartwin/diagnostics.hpp"
#include "dartwin/syntax.hpp"

namespace dartwin {

enum class ElementKind {
  DarTwin,
  TwinSystem,
  DigitalTwin,
  Goal,
  Arbiter,
  Conflict,
  DarTrans,
  DartwinCore,
  DartwinBefore,
  DartwinAfter,
  Part,
  Port,
  Connection,
  Allocation,
  Package,
};

std::string_view to_string(ElementKind kind);

/// Kind for a `#keyword`; nullopt outside the fixed DarTwin keyword set.
std::optional<ElementKind> kind_for_keyword(std::string_view keyword);

bool is_dartwin_model_kind(ElementKind kind);  // DarTwin, core, before, after

struct ElementId {
  std::uint32_t value = 0;
  friend auto operator<=>(const ElementId&, const ElementId&) = default;
};

using EndpointIds = std::pair<ElementId, ElementId>;

struct Element {
  ElementId id;
  ElementKind kind = ElementKind::Part;
  /// Effective name. Anonymous redefinitions take the redefined name.
  std::optional<std::string> name;
  bool declared_name = false;
  std::optional<ElementId> owner;
  std::vector<ElementId> members;
  std::vector<ElementId> specializes;
  std::optional<ElementId> redefines;
  std::optional<ElementId> typed_by;
  std::optional<std::string> doc;
  std::optional<EndpointIds> connect;
  std::optional<EndpointIds> allocate;
  std::optional<Multiplicity> multiplicity;
  std::optional<std::string> conflict_explanation;
  bool is_definition = false;
  Span span;

  // Unresolved source references, kept for diagnostics.
  std::vector<QualifiedName> specializes_paths;
  std::optional<QualifiedName> redefines_path;
  std::optional<QualifiedName> typed_by_path;
  std::optional<EndpointClause> connect_paths;
  std::optional<EndpointClause> allocate_paths;
};

struct Import {
  QualifiedName path;
  bool wildcard = false;
  std::optional<ElementId> owner;
};

struct MetadataDeclaration {
  std::string keyword;
  std::optional<std::string> definition_name;
  Span span;
};

/// Immutable once built; every query is const.
class SemanticModel {
 public:
  const std::vector<Element>& elements() const { return elements_; }
  const Element& element(ElementId id) const { return elements_.at(id.value); }
  std::size_t size() const { return elements_.size(); }
  const std::vector<ElementId>& roots() const { return roots_; }
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }
  const std::vector<Import>& imports() const { return imports_; }
  const std::vector<MetadataDeclaration>& metadata() const { return metadata_; }

  /// Direct named members of `owner`; nullopt means the root namespace.
  const std::map<std::string, ElementId>& scope(std::optional<ElementId> owner) const;

  std::optional<ElementId> find_root(std::string_view name) const;

  /// Bases whose members an element inherits: redefined element, type, then `:>` targets.
  std::vector<ElementId> bases(ElementId id) const;

  /// Root-qualified dotted path, e.g. "Basic.TwinSystem.DT1".
  std::string qualified_name(ElementId id) const;

  std::vector<ElementId> children_of_kind(ElementId owner, ElementKind kind) const;

  /// True when `id` reaches `base` through `:>`, `:>>` or typing edges.
  bool specializes_transitively(ElementId id, ElementId base) const;

 private:
  friend class ModelBuilder;
  friend class Resolver;

  std::vector<Element> elements_;
  std::vector<ElementId> roots_;
  std::vector<std::map<std::string, ElementId>> scopes_;
  std::map<std::string, ElementId> root_scope_;
  std::vector<Diagnostic> diagnostics_;
  std::vector<Import> imports_;
  std::vector<MetadataDeclaration> metadata_;
};

/// Builds one namespace from one or more parsed files. Never throws for
/// model problems: they land in `SemanticModel::diagnostics()`.
SemanticModel build_model(const SourceTree& tree);
SemanticModel build_model(std::span<const SourceTree> trees);

struct Resolution {
  std::optional<ElementId> id;
  std::vector<ElementId> ambiguous;  // non-empty on AmbiguousName
  std::string failed_segment;        // set on UnresolvedName
};

/// Name lookup: own members, inherited members, then the owner chain, then
/// the root namespace for the first segment; inherited-inclusive member
/// lookup for the rest. `scope` nullopt starts at the root namespace.
Resolution try_resolve(const QualifiedName& path, std::optional<ElementId> scope,
                       const SemanticModel& model);

/// Throwing form of try_resolve.
ElementId resolve(const QualifiedName& path, std::optional<ElementId> scope,
                  const SemanticModel& model);

/// Structural well-formedness against the DarTwin metamodel.
std::vector<Diagnostic> validate(const SemanticModel& model);

/// Stable JSON export; ids are arena indices.
std::string export_json(const SemanticModel& model);

}  // namespace dartwin
