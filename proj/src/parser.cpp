#include "sepolml/parser.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <unordered_set>

namespace sepolml {

namespace {

enum class TokenKind { Identifier, Semi, Colon, Comma, LBrace, RBrace, End };

struct Token {
  TokenKind kind;
  std::string text;
  int line;
  int column;
};

const char* token_kind_name(TokenKind kind) {
  switch (kind) {
    case TokenKind::Identifier: return "identifier";
    case TokenKind::Semi: return "';'";
    case TokenKind::Colon: return "':'";
    case TokenKind::Comma: return "','";
    case TokenKind::LBrace: return "'{'";
    case TokenKind::RBrace: return "'}'";
    case TokenKind::End: return "end of input";
  }
  return "?";
}

bool is_identifier_start(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '/' || c == '.' ||
         c == '-';
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  Token next() {
    skip_trivia();
    if (pos_ >= text_.size()) return {TokenKind::End, "", line_, column_};
    const int line = line_;
    const int column = column_;
    const char c = text_[pos_];
    switch (c) {
      case ';': advance(); return {TokenKind::Semi, ";", line, column};
      case ':': advance(); return {TokenKind::Colon, ":", line, column};
      case ',': advance(); return {TokenKind::Comma, ",", line, column};
      case '{': advance(); return {TokenKind::LBrace, "{", line, column};
      case '}': advance(); return {TokenKind::RBrace, "}", line, column};
      default: break;
    }
    if (is_identifier_start(c)) {
      std::string text;
      while (pos_ < text_.size() && is_identifier_start(text_[pos_])) {
        text.push_back(text_[pos_]);
        advance();
      }
      return {TokenKind::Identifier, std::move(text), line, column};
    }
    throw ParseError(line, column, "identifier or punctuation",
                     "'" + std::string(1, c) + "'");
  }

 private:
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  void skip_trivia() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c)) != 0) {
        advance();
      } else {
        return;
      }
    }
  }

  std::string_view text_;
  size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

class Parser {
 public:
  Parser(std::string_view text, ParseMode mode, std::string source_name)
      : lexer_(text), mode_(mode) {
    doc_.source_name = std::move(source_name);
    advance();
  }

  PolicyDocument run() {
    while (current_.kind != TokenKind::End) {
      parse_statement();
    }
    if (mode_ == ParseMode::Strict) {
      auto undeclared = validate_references(doc_);
      if (!undeclared.empty()) {
        throw UndeclaredTypeError(undeclared.front().name, undeclared.front().span);
      }
    }
    return std::move(doc_);
  }

 private:
  void advance() { current_ = lexer_.next(); }

  [[noreturn]] void fail(const std::string& expected) {
    const std::string found = current_.kind == TokenKind::Identifier
                                  ? "'" + current_.text + "'"
                                  : token_kind_name(current_.kind);
    throw ParseError(current_.line, current_.column, expected, found);
  }

  Token expect_identifier(const std::string& expected) {
    if (current_.kind != TokenKind::Identifier) fail(expected);
    Token token = current_;
    advance();
    return token;
  }

  void expect(TokenKind kind) {
    if (current_.kind != kind) fail(token_kind_name(kind));
    advance();
  }

  void parse_statement() {
    if (current_.kind != TokenKind::Identifier) fail("statement keyword");
    const Token keyword = current_;
    if (keyword.text == "type") {
      parse_type_decl(keyword);
    } else if (keyword.text == "attribute") {
      parse_attribute_decl(keyword);
    } else if (keyword.text == "typeattribute") {
      parse_typeattribute(keyword);
    } else if (keyword.text == "allow") {
      parse_allow(keyword);
    } else if (keyword.text == "type_transition") {
      parse_type_transition(keyword);
    } else {
      fail("statement keyword ('type', 'attribute', 'typeattribute', 'allow', or "
           "'type_transition')");
    }
  }

  void parse_type_decl(const Token& keyword) {
    advance();
    TypeDecl decl;
    decl.span = {keyword.line, keyword.column};
    decl.name = expect_identifier("type name").text;
    while (current_.kind == TokenKind::Comma) {
      advance();
      decl.attributes.push_back(expect_identifier("attribute name").text);
    }
    expect(TokenKind::Semi);
    doc_.statements.emplace_back(std::move(decl));
  }

  void parse_attribute_decl(const Token& keyword) {
    advance();
    AttributeDecl decl;
    decl.span = {keyword.line, keyword.column};
    decl.name = expect_identifier("attribute name").text;
    expect(TokenKind::Semi);
    doc_.statements.emplace_back(std::move(decl));
  }

  void parse_typeattribute(const Token& keyword) {
    advance();
    TypeAttributeAssoc assoc;
    assoc.span = {keyword.line, keyword.column};
    assoc.type_name = expect_identifier("type name").text;
    assoc.attributes.push_back(expect_identifier("attribute name").text);
    while (current_.kind == TokenKind::Comma) {
      advance();
      assoc.attributes.push_back(expect_identifier("attribute name").text);
    }
    expect(TokenKind::Semi);
    doc_.statements.emplace_back(std::move(assoc));
  }

  void parse_allow(const Token& keyword) {
    advance();
    AllowRule rule;
    rule.span = {keyword.line, keyword.column};
    rule.source = expect_identifier("source type").text;
    rule.target = expect_identifier("target type").text;
    expect(TokenKind::Colon);
    rule.security_class = expect_identifier("security class").text;
    if (current_.kind == TokenKind::LBrace) {
      advance();
      if (current_.kind != TokenKind::Identifier) fail("permission");
      while (current_.kind == TokenKind::Identifier) {
        add_permission(rule, current_);
        advance();
      }
      expect(TokenKind::RBrace);
    } else if (current_.kind == TokenKind::Identifier) {
      add_permission(rule, current_);
      advance();
    } else {
      fail("permission or '{'");
    }
    expect(TokenKind::Semi);
    doc_.statements.emplace_back(std::move(rule));
  }

  void add_permission(AllowRule& rule, const Token& token) {
    if (std::find(rule.permissions.begin(), rule.permissions.end(), token.text) !=
        rule.permissions.end()) {
      if (mode_ == ParseMode::Strict) {
        throw ParseError(token.line, token.column, "distinct permission",
                         "duplicate '" + token.text + "'");
      }
      doc_.warnings.push_back({{token.line, token.column},
                               "duplicate permission '" + token.text + "' dropped"});
      return;
    }
    rule.permissions.push_back(token.text);
  }

  void parse_type_transition(const Token& keyword) {
    advance();
    TypeTransitionRule rule;
    rule.span = {keyword.line, keyword.column};
    rule.source_domain = expect_identifier("source domain").text;
    rule.target_type = expect_identifier("target type").text;
    expect(TokenKind::Colon);
    rule.security_class = expect_identifier("security class").text;
    rule.new_type = expect_identifier("new type").text;
    expect(TokenKind::Semi);
    doc_.statements.emplace_back(std::move(rule));
  }

  Lexer lexer_;
  ParseMode mode_;
  Token current_{TokenKind::End, "", 1, 1};
  PolicyDocument doc_;
};

struct SpanVisitor {
  SourceSpan operator()(const TypeDecl& s) const { return s.span; }
  SourceSpan operator()(const AttributeDecl& s) const { return s.span; }
  SourceSpan operator()(const TypeAttributeAssoc& s) const { return s.span; }
  SourceSpan operator()(const AllowRule& s) const { return s.span; }
  SourceSpan operator()(const TypeTransitionRule& s) const { return s.span; }
};

struct SerializeVisitor {
  std::string operator()(const TypeDecl& s) const {
    std::string out = "type " + s.name;
    for (const auto& attr : s.attributes) out += ", " + attr;
    return out + ";";
  }
  std::string operator()(const AttributeDecl& s) const { return "attribute " + s.name + ";"; }
  std::string operator()(const TypeAttributeAssoc& s) const {
    std::string out = "typeattribute " + s.type_name;
    for (size_t i = 0; i < s.attributes.size(); ++i) {
      out += (i == 0 ? " " : ", ") + s.attributes[i];
    }
    return out + ";";
  }
  std::string operator()(const AllowRule& s) const {
    std::string out = "allow " + s.source + " " + s.target + ":" + s.security_class + " { ";
    for (const auto& perm : s.permissions) out += perm + " ";
    return out + "};";
  }
  std::string operator()(const TypeTransitionRule& s) const {
    return "type_transition " + s.source_domain + " " + s.target_type + ":" + s.security_class +
           " " + s.new_type + ";";
  }
};

}  // namespace

SourceSpan statement_span(const Statement& statement) {
  return std::visit(SpanVisitor{}, statement);
}

PolicyDocument parse_document(std::string_view text, ParseMode mode, std::string source_name) {
  return Parser(text, mode, std::move(source_name)).run();
}

std::string serialize(const Statement& statement) {
  return std::visit(SerializeVisitor{}, statement);
}

std::string serialize(const PolicyDocument& doc) {
  std::string out;
  for (const auto& statement : doc.statements) {
    out += serialize(statement);
    out += '\n';
  }
  return out;
}

std::vector<UndeclaredType> validate_references(const PolicyDocument& doc) {
  std::unordered_set<std::string> declared;
  for (const auto& statement : doc.statements) {
    if (const auto* type_decl = std::get_if<TypeDecl>(&statement)) {
      declared.insert(type_decl->name);
    } else if (const auto* attr_decl = std::get_if<AttributeDecl>(&statement)) {
      declared.insert(attr_decl->name);
    }
  }

  std::vector<UndeclaredType> undeclared;
  std::unordered_set<std::string> reported;
  auto check = [&](const std::string& name, SourceSpan span) {
    if (declared.contains(name) || reported.contains(name)) return;
    reported.insert(name);
    undeclared.push_back({name, span});
  };
  for (const auto& statement : doc.statements) {
    if (const auto* allow = std::get_if<AllowRule>(&statement)) {
      check(allow->source, allow->span);
      check(allow->target, allow->span);
    } else if (const auto* transition = std::get_if<TypeTransitionRule>(&statement)) {
      check(transition->source_domain, transition->span);
      check(transition->target_type, transition->span);
      check(transition->new_type, transition->span);
    }
  }
  return undeclared;
}

bool same_statements(const PolicyDocument& a, const PolicyDocument& b) {
  return a.statements == b.statements;
}

bool is_valid_identifier(std::string_view text) {
  if (text.empty()) return false;
  return std::all_of(text.begin(), text.end(), [](char c) { return is_identifier_start(c); });
}

}  // namespace sepolml
