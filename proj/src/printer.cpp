#include <string>

#include "dartwin/syntax.hpp"

namespace dartwin {
namespace {

constexpr std::string_view kIndent = "    ";

std::string multiplicity_text(const Multiplicity& m) {
  if (m.lower == 0 && !m.upper) return "[*]";
  if (m.upper && *m.upper == m.lower) return "[" + std::to_string(m.lower) + "]";
  return "[" + std::to_string(m.lower) + ".." + (m.upper ? std::to_string(*m.upper) : "*") + "]";
}

bool braces_when_empty(const Node& n) {
  switch (n.construct) {
    case Construct::keyword_usage:
      return n.hash_keyword != "goal" && n.hash_keyword != "vs";
    case Construct::package:
    case Construct::library_package:
    case Construct::part:
    case Construct::part_def:
      return true;
    default:
      return false;
  }
}

bool is_bare_allocate(const Node& n) {
  return n.construct == Construct::allocation && !n.name && !n.multiplicity && !n.typed_by &&
         n.specializes.empty() && !n.redefines && n.allocate && n.children.empty() && !n.doc;
}

std::string keyword_text(const Node& n) {
  switch (n.construct) {
    case Construct::keyword_usage:
      return "#" + n.hash_keyword.value_or("");
    case Construct::package:
      return "package";
    case Construct::library_package:
      return "library package";
    case Construct::import:
      return "import";
    case Construct::part:
      return "part";
    case Construct::part_def:
      return "part def";
    case Construct::port:
      return "port";
    case Construct::connection:
      return "connection";
    case Construct::connection_def:
      return "connection def";
    case Construct::allocation:
      return "allocation";
    case Construct::requirement:
      return "requirement";
    case Construct::requirement_def:
      return "requirement def";
    case Construct::metadata_def:
      return n.short_name ? "metadata def <" + *n.short_name + ">" : "metadata def";
  }
  return {};
}

void print_node(std::string& out, const Node& n, std::size_t depth) {
  std::string indent;
  for (std::size_t i = 0; i < depth; ++i) indent += kIndent;
  out += indent;

  if (n.construct == Construct::import) {
    if (n.visibility) out += *n.visibility + " ";
    out += "import ";
    if (n.import_path) {
      for (std::size_t i = 0; i < n.import_path->segments.size(); ++i) {
        if (i) out += "::";
        out += n.import_path->segments[i];
      }
    }
    if (n.import_wildcard) out += "::*";
    out += ";\n";
    return;
  }
  if (is_bare_allocate(n)) {
    out += "allocate " + n.allocate->source.str() + " to " + n.allocate->target.str() + ";\n";
    return;
  }

  out += keyword_text(n);
  if (n.name) out += " " + *n.name;
  if (n.multiplicity) out += multiplicity_text(*n.multiplicity);
  if (n.typed_by) out += " : " + n.typed_by->str();
  if (!n.specializes.empty()) {
    out += " :> ";
    for (std::size_t i = 0; i < n.specializes.size(); ++i) {
      if (i) out += ", ";
      out += n.specializes[i].str();
    }
  }
  if (n.redefines) out += " :>> " + n.redefines->str();
  if (n.connect) out += " connect " + n.connect->source.str() + " to " + n.connect->target.str();
  if (n.allocate) {
    out += " allocate " + n.allocate->source.str() + " to " + n.allocate->target.str();
  }

  if (n.children.empty() && !n.doc) {
    out += braces_when_empty(n) ? " {\n" + indent + "}\n" : ";\n";
    return;
  }
  out += " {\n";
  if (n.doc) out += indent + std::string(kIndent) + "doc /* " + *n.doc + " */\n";
  for (const Node& child : n.children) print_node(out, child, depth + 1);
  out += indent + "}\n";
}

}  // namespace

std::string print(const Node& node) {
  std::string out;
  print_node(out, node, 0);
  return out;
}

std::string print(const SourceTree& tree) {
  std::string out;
  for (std::size_t i = 0; i < tree.roots.size(); ++i) {
    if (i) out += "\n";
    print_node(out, tree.roots[i], 0);
  }
  return out;
}

}  // namespace dartwin
