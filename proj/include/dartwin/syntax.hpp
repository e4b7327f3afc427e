#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dartwin/diagnostics.hpp"

namespace dartwin {

// ---------------------------------------------------------------------------
// Lexing
// ---------------------------------------------------------------------------

enum class TokenKind {
  keyword,
  hash_keyword,
  identifier,
  number,
  punctuation,
  doc_comment,  // any /* ... */ block
  line_comment,
};

std::string_view to_string(TokenKind kind);

struct Token {
  TokenKind kind = TokenKind::punctuation;
  std::string text;            // raw characters, e.g. "#dartwin"
  Span span;
  std::string leading_trivia;  // whitespace between the previous token and this one

  /// Text without decoration: hash keywords lose their `#`.
  std::string_view value() const;
};

struct LexResult {
  std::vector<Token> tokens;
  std::string trailing_trivia;
  std::vector<Diagnostic> diagnostics;
};

/// Splits `source` into tokens. Trivia is whitespace only; comments are
/// tokens. Illegal bytes are reported and skipped, so the stream stays usable.
LexResult tokenize(std::string_view source, std::uint32_t file = 0);

/// Inverse of tokenize for inputs that lexed without diagnostics.
std::string reassemble(const LexResult& lexed);

bool is_dartwin_keyword(std::string_view name);

// ---------------------------------------------------------------------------
// Parse tree
// ---------------------------------------------------------------------------

/// Dotted (or `::`-separated) name path. Equality ignores the span.
struct QualifiedName {
  std::vector<std::string> segments;
  Span span;

  std::string str() const;
  bool empty() const { return segments.empty(); }
  friend bool operator==(const QualifiedName& a, const QualifiedName& b) {
    return a.segments == b.segments;
  }
};

QualifiedName make_name(std::string_view dotted);

/// `[lower..upper]`; an absent upper bound means `*`.
struct Multiplicity {
  std::uint64_t lower = 0;
  std::optional<std::uint64_t> upper;

  friend bool operator==(const Multiplicity&, const Multiplicity&) = default;
};

enum class Construct {
  package,
  library_package,
  import,
  part,
  part_def,
  port,
  connection,
  allocation,
  requirement,
  requirement_def,
  connection_def,
  metadata_def,
  keyword_usage,
};

std::string_view to_string(Construct construct);

struct EndpointClause {
  QualifiedName source;
  QualifiedName target;

  friend bool operator==(const EndpointClause&, const EndpointClause&) = default;
};

struct Node {
  Construct construct = Construct::part;
  std::optional<std::string> hash_keyword;  // without '#'
  std::optional<std::string> name;
  std::optional<std::string> short_name;    // `metadata def <short> Name`
  std::optional<std::string> visibility;    // imports only
  std::optional<Multiplicity> multiplicity;
  std::optional<QualifiedName> typed_by;    // `name : Type`
  std::vector<QualifiedName> specializes;   // `:>`
  std::optional<QualifiedName> redefines;   // `:>>`
  std::optional<QualifiedName> import_path;
  bool import_wildcard = false;
  std::optional<std::string> doc;
  std::optional<EndpointClause> connect;
  std::optional<EndpointClause> allocate;
  std::vector<Node> children;
  Span span;
};

struct SourceTree {
  std::vector<Node> roots;
};

/// Structural equality: every field except spans.
bool structurally_equal(const Node& a, const Node& b);
bool structurally_equal(const SourceTree& a, const SourceTree& b);

struct ParseResult {
  SourceTree tree;
  std::vector<Diagnostic> diagnostics;
};

/// Parses one source text. Each top-level definition fails independently;
/// the parser resynchronises after the failing definition's closing brace.
ParseResult parse(std::string_view source, std::uint32_t file = 0);

/// Canonical text: one member per line, four-space indentation.
std::string print(const SourceTree& tree);
std::string print(const Node& node);

}  // namespace dartwin
