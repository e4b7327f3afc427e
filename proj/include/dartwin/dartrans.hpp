#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "dartwin/flatten.hpp"
#include "dartwin/model.hpp"
#include "dartwin/syntax.hpp"

namespace dartwin {

/// Pattern-to-target correspondence for one application of a dartrans.
/// Keys are effective paths inside the pattern (relative to its before/after
/// root); values of `map` are effective paths inside the target.
struct Binding {
  std::map<EffectivePath, EffectivePath> map;      // `pattern.path -> target.path`
  std::map<EffectivePath, std::string> renames;    // `pattern.path => fresh`
};

/// Reads the binding file format. `#` starts a comment; one entry per line.
/// Throws Error(malformed_input) naming the offending line.
Binding parse_binding(std::string_view text, std::string_view origin = "<binding>");
std::string print_binding(const Binding& binding);

enum class ViolationReason {
  unbound,
  non_injective,
  kind_mismatch,
  containment_broken,
  endpoint_inconsistent,
  name_collision,
};

std::string_view to_string(ViolationReason reason);

struct Violation {
  EffectivePath pattern_path;
  ViolationReason reason = ViolationReason::unbound;
  std::string message;
};

struct ApplicabilityReport {
  bool ok = true;
  std::vector<Violation> violations;
};

ApplicabilityReport check_applicability(ElementId pattern, ElementId target, const Binding& binding,
                                        const SemanticModel& model);

/// Target with the images of the pattern's removed elements deleted, along
/// with connections and allocations left dangling. Throws
/// Error(invalid_argument) when the binding is not applicable.
EffectiveModel reduce_to_core(ElementId target, ElementId pattern, const Binding& binding,
                              const SemanticModel& model);

/// Copies every added pattern element into the reduced target. Throws
/// Error(dangling_endpoint) when an added connection points outside core and
/// added elements.
EffectiveModel extend_with_after(const EffectiveModel& intermediate, ElementId pattern,
                                 const Binding& binding, const SemanticModel& model);

/// Standalone dartwin text tree, free of specializations.
SourceTree finalize(const EffectiveModel& extended);

/// Intermediate artifacts of the procedure, each still pointing into the pattern.
struct StepTrees {
  SourceTree specialized;  // target specializing the pattern's before
  SourceTree reduced;      // what is left, specializing the core
  SourceTree extended;     // with additions, specializing the after
};

struct ApplyResult {
  ApplicabilityReport report;
  SourceTree final_tree;  // empty when !report.ok
  ChangeSet changes;      // in target paths
  StepTrees steps;
};

ApplyResult apply_transformation(ElementId pattern, ElementId target, const Binding& binding,
                                 const SemanticModel& model);

/// Shortest trailing part of `path` that resolves to it from `scope` in `tree`.
QualifiedName relative_reference(const EffectiveModel& tree, const EffectivePath& scope,
                                 const EffectivePath& path);

}  // namespace dartwin
