#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sepolml/errors.hpp"

namespace sepolml {

using TypeName = std::string;
using SecurityClassName = std::string;
using Permission = std::string;

/// 1-based source position of a statement or token.
struct SourceSpan {
  int line = 0;
  int column = 0;

  bool operator==(const SourceSpan&) const = default;
};

// Statement kinds. Equality compares content only, never spans, so a
// document equals its canonical re-parse.

struct TypeDecl {
  TypeName name;
  std::vector<std::string> attributes;
  SourceSpan span;

  bool operator==(const TypeDecl& other) const {
    return name == other.name && attributes == other.attributes;
  }
};

struct AttributeDecl {
  std::string name;
  SourceSpan span;

  bool operator==(const AttributeDecl& other) const { return name == other.name; }
};

struct TypeAttributeAssoc {
  TypeName type_name;
  std::vector<std::string> attributes;
  SourceSpan span;

  bool operator==(const TypeAttributeAssoc& other) const {
    return type_name == other.type_name && attributes == other.attributes;
  }
};

struct AllowRule {
  TypeName source;
  TypeName target;
  SecurityClassName security_class;
  std::vector<Permission> permissions;  // nonempty, duplicate-free, original order
  SourceSpan span;

  bool operator==(const AllowRule& other) const {
    return source == other.source && target == other.target &&
           security_class == other.security_class && permissions == other.permissions;
  }
};

struct TypeTransitionRule {
  TypeName source_domain;
  TypeName target_type;
  SecurityClassName security_class;
  TypeName new_type;
  SourceSpan span;

  bool operator==(const TypeTransitionRule& other) const {
    return source_domain == other.source_domain && target_type == other.target_type &&
           security_class == other.security_class && new_type == other.new_type;
  }
};

using Statement =
    std::variant<TypeDecl, AttributeDecl, TypeAttributeAssoc, AllowRule, TypeTransitionRule>;

SourceSpan statement_span(const Statement& statement);

struct ParseWarning {
  SourceSpan span;
  std::string message;
};

struct PolicyDocument {
  std::vector<Statement> statements;  // input order preserved
  std::string source_name;
  std::vector<ParseWarning> warnings;  // lenient-mode deduplications etc.
};

enum class ParseMode { Strict, Lenient };

/// Syntax error with the exact position of the offending token.
class ParseError : public Error {
 public:
  ParseError(int line, int column, std::string expected, std::string found)
      : Error("parse error at " + std::to_string(line) + ":" + std::to_string(column) +
              ": expected " + expected + ", found " + found),
        line_(line),
        column_(column),
        expected_(std::move(expected)),
        found_(std::move(found)) {}

  int line() const { return line_; }
  int column() const { return column_; }
  const std::string& expected() const { return expected_; }
  const std::string& found() const { return found_; }

 private:
  int line_;
  int column_;
  std::string expected_;
  std::string found_;
};

struct UndeclaredType {
  std::string name;
  SourceSpan span;
};

class UndeclaredTypeError : public Error {
 public:
  UndeclaredTypeError(std::string name, SourceSpan span)
      : Error("undeclared type '" + name + "' referenced at " + std::to_string(span.line) + ":" +
              std::to_string(span.column)),
        name_(std::move(name)),
        span_(span) {}

  const std::string& name() const { return name_; }
  SourceSpan span() const { return span_; }

 private:
  std::string name_;
  SourceSpan span_;
};

/// Parses the Type-Enforcement subset:
///
///   type NAME (, ATTR)* ;
///   attribute NAME ;
///   typeattribute NAME ATTR (, ATTR)* ;
///   allow NAME NAME : NAME ( PERM | { PERM+ } ) ;
///   type_transition NAME NAME : NAME NAME ;
///
/// `#` comments run to end of line. Whitespace around `:` is optional.
/// Strict mode requires every type referenced by a rule to be declared
/// somewhere in the document and rejects duplicate permissions; lenient mode
/// auto-registers names and deduplicates with a warning.
PolicyDocument parse_document(std::string_view text, ParseMode mode,
                              std::string source_name = "<memory>");

/// Canonical text: one statement per line, permissions brace-wrapped in
/// original order. parse(serialize(d)) == d modulo spans.
std::string serialize(const PolicyDocument& doc);
std::string serialize(const Statement& statement);

/// Every rule-referenced type name lacking a `type`/`attribute` declaration,
/// one entry per name in first-reference order.
std::vector<UndeclaredType> validate_references(const PolicyDocument& doc);

bool same_statements(const PolicyDocument& a, const PolicyDocument& b);

bool is_valid_identifier(std::string_view text);

}  // namespace sepolml
