#include <array>
#include <string_view>

#include "dartwin/syntax.hpp"

namespace dartwin {
namespace {

constexpr std::array<std::string_view, 16> kKeywords = {
    "library", "package",  "import",   "private", "public", "part",
    "port",    "connection", "requirement", "allocation", "allocate",
    "metadata", "def",     "doc",      "connect", "to"};

constexpr std::array<std::string_view, 10> kDartwinKeywords = {
    "dartwin", "twinsystem", "digitaltwin",   "goal",           "arbiter",
    "vs",      "dartrans",   "dartwin_core",  "dartwin_before", "dartwin_after"};

// Longest first, so ":>>" wins over ":>" and ":".
constexpr std::array<std::string_view, 15> kPunctuation = {
    ":>>", ":>", "::", "..", ":", ".", "{", "}", ";", ",", "[", "]", "*", "<", ">"};

bool is_ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_keyword(std::string_view word) {
  for (auto k : kKeywords) {
    if (k == word) return true;
  }
  return false;
}

}  // namespace

bool is_dartwin_keyword(std::string_view name) {
  for (auto k : kDartwinKeywords) {
    if (k == name) return true;
  }
  return false;
}

std::string_view to_string(TokenKind kind) {
  switch (kind) {
    case TokenKind::keyword:
      return "keyword";
    case TokenKind::hash_keyword:
      return "hash-keyword";
    case TokenKind::identifier:
      return "identifier";
    case TokenKind::number:
      return "number";
    case TokenKind::punctuation:
      return "punctuation";
    case TokenKind::doc_comment:
      return "doc-comment";
    case TokenKind::line_comment:
      return "line-comment";
  }
  return "token";
}

std::string_view Token::value() const {
  std::string_view v = text;
  if (kind == TokenKind::hash_keyword && !v.empty()) v.remove_prefix(1);
  return v;
}

LexResult tokenize(std::string_view source, std::uint32_t file) {
  LexResult out;
  std::size_t pos = 0;
  std::size_t trivia_start = 0;
  const std::size_t n = source.size();

  auto emit = [&](TokenKind kind, std::size_t begin, std::size_t end) {
    Token t;
    t.kind = kind;
    t.text = std::string(source.substr(begin, end - begin));
    t.span = Span{file, begin, end};
    t.leading_trivia = std::string(source.substr(trivia_start, begin - trivia_start));
    out.tokens.push_back(std::move(t));
    trivia_start = end;
  };

  while (pos < n) {
    const char c = source[pos];
    if (is_space(c)) {
      ++pos;
      continue;
    }
    const std::size_t begin = pos;
    if (c == '/' && pos + 1 < n && source[pos + 1] == '/') {
      while (pos < n && source[pos] != '\n') ++pos;
      emit(TokenKind::line_comment, begin, pos);
      continue;
    }
    if (c == '/' && pos + 1 < n && source[pos + 1] == '*') {
      const std::size_t close = source.find("*/", pos + 2);
      if (close == std::string_view::npos) {
        out.diagnostics.push_back({Severity::error, Span{file, begin, n}, "UnterminatedComment",
                                   "unterminated block comment"});
        pos = n;
      } else {
        pos = close + 2;
      }
      emit(TokenKind::doc_comment, begin, pos);
      continue;
    }
    if (c == '#' && pos + 1 < n && is_ident_start(source[pos + 1])) {
      pos += 1;
      while (pos < n && is_ident_char(source[pos])) ++pos;
      emit(TokenKind::hash_keyword, begin, pos);
      continue;
    }
    if (is_ident_start(c)) {
      while (pos < n && is_ident_char(source[pos])) ++pos;
      emit(is_keyword(source.substr(begin, pos - begin)) ? TokenKind::keyword
                                                         : TokenKind::identifier,
           begin, pos);
      continue;
    }
    if (is_digit(c)) {
      while (pos < n && is_digit(source[pos])) ++pos;
      emit(TokenKind::number, begin, pos);
      continue;
    }
    bool matched = false;
    for (auto p : kPunctuation) {
      if (source.substr(pos, p.size()) == p) {
        pos += p.size();
        emit(TokenKind::punctuation, begin, pos);
        matched = true;
        break;
      }
    }
    if (matched) continue;

    // Illegal byte; swallow a whole UTF-8 sequence so one bad glyph is one diagnostic.
    ++pos;
    if (static_cast<unsigned char>(c) >= 0xC0) {
      while (pos < n && (static_cast<unsigned char>(source[pos]) & 0xC0) == 0x80) ++pos;
    }
    out.diagnostics.push_back({Severity::error, Span{file, begin, pos}, "IllegalCharacter",
                               "illegal character '" + std::string(source.substr(begin, pos - begin)) +
                                   "'"});
    trivia_start = pos;
  }
  out.trailing_trivia = std::string(source.substr(trivia_start));
  return out;
}

std::string reassemble(const LexResult& lexed) {
  std::string out;
  for (const Token& t : lexed.tokens) {
    out += t.leading_trivia;
    out += t.text;
  }
  out += lexed.trailing_trivia;
  return out;
}

}  // namespace dartwin
