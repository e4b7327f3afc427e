#include <array>
#include <set>
#include <string>
#include <utility>

#include "dartwin/syntax.hpp"

namespace dartwin {
namespace {

// SysML v2 member keywords outside the supported subset. They lex as plain
// identifiers, so the parser recognises them at member position only.
constexpr std::array<std::string_view, 40> kUnsupported = {
    "action",     "state",       "constraint", "require",    "item",       "flow",
    "interface",  "enum",        "calc",       "use",        "case",       "view",
    "viewpoint",  "rendering",   "occurrence", "individual", "snapshot",   "timeslice",
    "analysis",   "verification", "concern",   "stakeholder", "satisfy",   "assert",
    "assume",     "subject",     "actor",      "objective",  "perform",    "exhibit",
    "include",    "bind",        "succession", "attribute",  "ref",        "abstract",
    "variation",  "alias",       "comment",    "dependency"};

bool is_unsupported(std::string_view word) {
  for (auto w : kUnsupported) {
    if (w == word) return true;
  }
  return false;
}

struct ParseFailure {
  Diagnostic diagnostic;
};

class Parser {
 public:
  Parser(std::vector<Token> tokens, std::uint32_t file, std::size_t source_size)
      : tokens_(std::move(tokens)), file_(file), source_size_(source_size) {}

  SourceTree parse_file(std::vector<Diagnostic>& diagnostics) {
    SourceTree tree;
    while (!at_end()) {
      const std::size_t start = pos_;
      try {
        tree.roots.push_back(member());
      } catch (const ParseFailure& failure) {
        diagnostics.push_back(failure.diagnostic);
        recover(start);
      }
    }
    return tree;
  }

 private:
  bool at_end() const { return pos_ >= tokens_.size(); }

  const Token* peek(std::size_t ahead = 0) const {
    return pos_ + ahead < tokens_.size() ? &tokens_[pos_ + ahead] : nullptr;
  }

  bool check(TokenKind kind, std::string_view text, std::size_t ahead = 0) const {
    const Token* t = peek(ahead);
    return t != nullptr && t->kind == kind && t->text == text;
  }
  bool check_punct(std::string_view text) const { return check(TokenKind::punctuation, text); }
  bool check_keyword(std::string_view text, std::size_t ahead = 0) const {
    return check(TokenKind::keyword, text, ahead);
  }

  Span here() const {
    if (const Token* t = peek()) return t->span;
    return Span{file_, source_size_, source_size_};
  }

  [[noreturn]] void fail(std::string expected) const {
    const Token* t = peek();
    std::string found = t ? "'" + t->text + "'" : "end of input";
    throw ParseFailure{Diagnostic{Severity::error, here(), "ParseError",
                                  "expected " + expected + ", found " + found}};
  }

  [[noreturn]] void fail_unsupported(const Token& t) const {
    throw ParseFailure{Diagnostic{Severity::error, t.span, "ParseError",
                                  "unsupported SysML v2 construct '" + t.text + "'"}};
  }

  const Token& advance() { return tokens_[pos_++]; }

  const Token& expect_punct(std::string_view text) {
    if (!check_punct(text)) fail("'" + std::string(text) + "'");
    return advance();
  }
  const Token& expect_keyword(std::string_view text) {
    if (!check_keyword(text)) fail("'" + std::string(text) + "'");
    return advance();
  }
  const Token& expect_identifier() {
    const Token* t = peek();
    if (t == nullptr || t->kind != TokenKind::identifier) fail("identifier");
    return advance();
  }

  void recover(std::size_t start) {
    pos_ = start;
    int depth = 0;
    while (!at_end()) {
      const Token& t = advance();
      if (t.kind != TokenKind::punctuation) continue;
      if (t.text == "{") {
        ++depth;
      } else if (t.text == "}") {
        if (--depth <= 0) return;
      } else if (t.text == ";" && depth == 0) {
        return;
      }
    }
  }

  QualifiedName path() {
    QualifiedName name;
    const Token& first = expect_identifier();
    name.segments.push_back(first.text);
    name.span = first.span;
    while (check_punct(".") || check_punct("::")) {
      if (check_punct("::") && peek(1) && peek(1)->kind == TokenKind::punctuation &&
          peek(1)->text == "*") {
        break;  // import wildcard, handled by the caller
      }
      advance();
      const Token& seg = expect_identifier();
      name.segments.push_back(seg.text);
      name.span.end = seg.span.end;
    }
    return name;
  }

  std::uint64_t number() {
    const Token* t = peek();
    if (t == nullptr || t->kind != TokenKind::number) fail("number");
    return std::stoull(advance().text);
  }

  Multiplicity multiplicity() {
    expect_punct("[");
    Multiplicity m;
    if (check_punct("*")) {
      advance();
      m.lower = 0;
    } else {
      m.lower = number();
      m.upper = m.lower;
      if (check_punct("..")) {
        advance();
        if (check_punct("*")) {
          advance();
          m.upper.reset();
        } else {
          m.upper = number();
        }
      }
    }
    expect_punct("]");
    return m;
  }

  void set_multiplicity(Node& node) {
    if (node.multiplicity) fail("a single multiplicity");
    node.multiplicity = multiplicity();
  }

  // name? ([mult] | ': Type' | ':> a, b' | ':>> a)* (connect|allocate clause)? body
  void usage_rest(Node& node, bool allow_name = true) {
    if (allow_name) {
      if (const Token* t = peek(); t && t->kind == TokenKind::identifier) {
        node.name = advance().text;
      }
    }
    for (;;) {
      if (check_punct("[")) {
        set_multiplicity(node);
      } else if (check_punct(":")) {
        advance();
        if (node.typed_by) fail("a single type");
        node.typed_by = path();
        if (check_punct("[")) set_multiplicity(node);
      } else if (check_punct(":>")) {
        advance();
        node.specializes.push_back(path());
        while (check_punct(",")) {
          advance();
          node.specializes.push_back(path());
        }
      } else if (check_punct(":>>")) {
        advance();
        if (node.redefines) fail("a single redefinition");
        node.redefines = path();
      } else {
        break;
      }
    }
    if (check_keyword("connect")) {
      advance();
      EndpointClause clause;
      clause.source = path();
      expect_keyword("to");
      clause.target = path();
      node.connect = std::move(clause);
    } else if (check_keyword("allocate")) {
      advance();
      EndpointClause clause;
      clause.source = path();
      expect_keyword("to");
      clause.target = path();
      node.allocate = std::move(clause);
    }
    body(node);
  }

  void body(Node& node) {
    if (check_punct(";")) {
      node.span.end = advance().span.end;
      return;
    }
    if (!check_punct("{")) fail("'{' or ';'");
    advance();
    while (!check_punct("}")) {
      if (at_end()) fail("'}'");
      if (check_keyword("doc")) {
        advance();
        const Token* t = peek();
        if (t == nullptr || t->kind != TokenKind::doc_comment) fail("doc comment '/* ... */'");
        if (node.doc) fail("a single doc comment");
        node.doc = strip_doc(advance().text);
        continue;
      }
      node.children.push_back(member());
    }
    node.span.end = advance().span.end;
  }

  static std::string strip_doc(std::string_view raw) {
    raw.remove_prefix(2);
    if (raw.size() >= 2 && raw.substr(raw.size() - 2) == "*/") raw.remove_suffix(2);
    const auto first = raw.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = raw.find_last_not_of(" \t\r\n");
    return std::string(raw.substr(first, last - first + 1));
  }

  Node member() {
    const Token* t = peek();
    if (t == nullptr) fail("member declaration");
    Node node;
    node.span = Span{file_, t->span.begin, t->span.end};

    if (t->kind == TokenKind::hash_keyword) {
      node.construct = Construct::keyword_usage;
      node.hash_keyword = std::string(advance().value());
      usage_rest(node);
      return node;
    }
    if (t->kind == TokenKind::identifier && is_unsupported(t->text)) fail_unsupported(*t);
    if (t->kind != TokenKind::keyword) fail("member declaration");

    const std::string kw = t->text;
    if (kw == "library") {
      advance();
      expect_keyword("package");
      node.construct = Construct::library_package;
      package_rest(node);
    } else if (kw == "package") {
      advance();
      node.construct = Construct::package;
      package_rest(node);
    } else if (kw == "private" || kw == "public") {
      advance();
      node.visibility = kw;
      if (!check_keyword("import")) fail("'import'");
      import_rest(node);
    } else if (kw == "import") {
      import_rest(node);
    } else if (kw == "part" || kw == "connection" || kw == "requirement") {
      advance();
      const bool def = check_keyword("def");
      if (def) advance();
      if (kw == "part") node.construct = def ? Construct::part_def : Construct::part;
      if (kw == "connection") node.construct = def ? Construct::connection_def : Construct::connection;
      if (kw == "requirement") node.construct = def ? Construct::requirement_def : Construct::requirement;
      usage_rest(node);
    } else if (kw == "port" || kw == "allocation") {
      advance();
      if (check_keyword("def")) fail_unsupported(*peek());
      node.construct = kw == "port" ? Construct::port : Construct::allocation;
      usage_rest(node);
    } else if (kw == "allocate") {
      node.construct = Construct::allocation;
      usage_rest(node, /*allow_name=*/false);
    } else if (kw == "metadata") {
      advance();
      expect_keyword("def");
      node.construct = Construct::metadata_def;
      if (check_punct("<")) {
        advance();
        node.short_name = expect_identifier().text;
        expect_punct(">");
      }
      usage_rest(node);
    } else {
      fail("member declaration");
    }
    return node;
  }

  void package_rest(Node& node) {
    node.name = expect_identifier().text;
    body(node);
  }

  void import_rest(Node& node) {
    expect_keyword("import");
    node.construct = Construct::import;
    node.import_path = path();
    if (check_punct("::")) {
      advance();
      expect_punct("*");
      node.import_wildcard = true;
    }
    node.span.end = expect_punct(";").span.end;
  }

  std::vector<Token> tokens_;
  std::uint32_t file_;
  std::size_t source_size_;
  std::size_t pos_ = 0;
};

// Comments are dropped, except the block comment that follows `doc`.
std::vector<Token> significant_tokens(std::vector<Token> tokens) {
  std::vector<Token> out;
  out.reserve(tokens.size());
  for (Token& t : tokens) {
    if (t.kind == TokenKind::line_comment) continue;
    if (t.kind == TokenKind::doc_comment) {
      const bool after_doc =
          !out.empty() && out.back().kind == TokenKind::keyword && out.back().text == "doc";
      if (!after_doc) continue;
    }
    out.push_back(std::move(t));
  }
  return out;
}

bool equal_optional_name(const std::optional<QualifiedName>& a,
                         const std::optional<QualifiedName>& b) {
  return a.has_value() == b.has_value() && (!a || *a == *b);
}

}  // namespace

std::string QualifiedName::str() const {
  std::string out;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (i) out += '.';
    out += segments[i];
  }
  return out;
}

QualifiedName make_name(std::string_view dotted) {
  QualifiedName name;
  std::size_t start = 0;
  while (start <= dotted.size()) {
    const auto dot = dotted.find('.', start);
    const auto end = dot == std::string_view::npos ? dotted.size() : dot;
    if (end > start) name.segments.emplace_back(dotted.substr(start, end - start));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return name;
}

std::string_view to_string(Construct construct) {
  switch (construct) {
    case Construct::package:
      return "package";
    case Construct::library_package:
      return "library-package";
    case Construct::import:
      return "import";
    case Construct::part:
      return "part";
    case Construct::part_def:
      return "part-def";
    case Construct::port:
      return "port";
    case Construct::connection:
      return "connection";
    case Construct::allocation:
      return "allocation";
    case Construct::requirement:
      return "requirement";
    case Construct::requirement_def:
      return "requirement-def";
    case Construct::connection_def:
      return "connection-def";
    case Construct::metadata_def:
      return "metadata-def";
    case Construct::keyword_usage:
      return "keyword-usage";
  }
  return "unknown";
}

ParseResult parse(std::string_view source, std::uint32_t file) {
  ParseResult result;
  LexResult lexed = tokenize(source, file);
  result.diagnostics = std::move(lexed.diagnostics);
  Parser parser(significant_tokens(std::move(lexed.tokens)), file, source.size());
  result.tree = parser.parse_file(result.diagnostics);
  return result;
}

bool structurally_equal(const Node& a, const Node& b) {
  if (a.construct != b.construct || a.hash_keyword != b.hash_keyword || a.name != b.name ||
      a.short_name != b.short_name || a.visibility != b.visibility ||
      a.multiplicity != b.multiplicity || !equal_optional_name(a.typed_by, b.typed_by) ||
      a.specializes != b.specializes || !equal_optional_name(a.redefines, b.redefines) ||
      !equal_optional_name(a.import_path, b.import_path) ||
      a.import_wildcard != b.import_wildcard || a.doc != b.doc || a.connect != b.connect ||
      a.allocate != b.allocate || a.children.size() != b.children.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.children.size(); ++i) {
    if (!structurally_equal(a.children[i], b.children[i])) return false;
  }
  return true;
}

bool structurally_equal(const SourceTree& a, const SourceTree& b) {
  if (a.roots.size() != b.roots.size()) return false;
  for (std::size_t i = 0; i < a.roots.size(); ++i) {
    if (!structurally_equal(a.roots[i], b.roots[i])) return false;
  }
  return true;
}

}  // namespace dartwin
