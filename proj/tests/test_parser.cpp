#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <string>
#include <variant>
#include <vector>

#include "sepolml/parser.hpp"

using namespace sepolml;

TEST_CASE("grammar covers every statement kind") {
  const std::string text =
      "type httpd_t, domain, webserver;\n"
      "attribute domain;\n"
      "typeattribute httpd_t trusted, online;\n"
      "allow httpd_t etc_conf_t : file { read getattr open };\n"
      "allow httpd_t port_t:tcp_socket name_connect;\n"
      "type_transition httpd_t httpd_exec_t : process httpd_child_t;\n";
  const PolicyDocument doc = parse_document(text, ParseMode::Lenient);
  REQUIRE(doc.statements.size() == 6);

  const auto& type_decl = std::get<TypeDecl>(doc.statements[0]);
  CHECK(type_decl.name == "httpd_t");
  CHECK(type_decl.attributes == std::vector<std::string>{"domain", "webserver"});
  CHECK(type_decl.span == SourceSpan{1, 1});

  const auto& attr = std::get<AttributeDecl>(doc.statements[1]);
  CHECK(attr.name == "domain");

  const auto& assoc = std::get<TypeAttributeAssoc>(doc.statements[2]);
  CHECK(assoc.type_name == "httpd_t");
  CHECK(assoc.attributes == std::vector<std::string>{"trusted", "online"});

  const auto& allow = std::get<AllowRule>(doc.statements[3]);
  CHECK(allow.source == "httpd_t");
  CHECK(allow.target == "etc_conf_t");
  CHECK(allow.security_class == "file");
  CHECK(allow.permissions == std::vector<std::string>{"read", "getattr", "open"});
  CHECK(allow.span == SourceSpan{4, 1});

  const auto& single = std::get<AllowRule>(doc.statements[4]);
  CHECK(single.permissions == std::vector<std::string>{"name_connect"});

  const auto& tt = std::get<TypeTransitionRule>(doc.statements[5]);
  CHECK(tt.source_domain == "httpd_t");
  CHECK(tt.target_type == "httpd_exec_t");
  CHECK(tt.security_class == "process");
  CHECK(tt.new_type == "httpd_child_t");
}

TEST_CASE("comments and whitespace are trivia") {
  const std::string text =
      "# full-line comment\n"
      "type shadow_t;  # trailing comment\n"
      "\n"
      "   allow   sshd_t   shadow_t:file    read ;\n";
  const PolicyDocument doc = parse_document(text, ParseMode::Lenient);
  REQUIRE(doc.statements.size() == 2);
  CHECK(std::get<TypeDecl>(doc.statements[0]).span == SourceSpan{2, 1});
  const auto& allow = std::get<AllowRule>(doc.statements[1]);
  CHECK(allow.span == SourceSpan{4, 4});
  CHECK(allow.permissions == std::vector<std::string>{"read"});
}

TEST_CASE("identifiers may carry path and version characters") {
  const PolicyDocument doc =
      parse_document("type var-log.d/2_t;\n", ParseMode::Lenient);
  CHECK(std::get<TypeDecl>(doc.statements[0]).name == "var-log.d/2_t");
  CHECK(is_valid_identifier("var-log.d/2_t"));
  CHECK(!is_valid_identifier(""));
  CHECK(!is_valid_identifier("has space"));
  CHECK(!is_valid_identifier("semi;colon"));
}

TEST_CASE("serialize emits canonical one-line statements") {
  const std::string text =
      "type httpd_t ,domain;\n"
      "allow httpd_t etc_conf_t\n"
      "  : file\n"
      "  { read getattr };\n"
      "allow httpd_t etc_conf_t:file open;\n";
  const PolicyDocument doc = parse_document(text, ParseMode::Lenient);
  CHECK(serialize(doc) ==
        "type httpd_t, domain;\n"
        "allow httpd_t etc_conf_t:file { read getattr };\n"
        "allow httpd_t etc_conf_t:file { open };\n");
}

TEST_CASE("parse of serialize is a fixpoint") {
  const std::string text =
      "attribute domain;\n"
      "type a_t, domain;\n"
      "type b_t;\n"
      "typeattribute b_t domain;\n"
      "allow a_t b_t:file { write create unlink };\n"
      "type_transition a_t b_t:process a_t;\n";
  const PolicyDocument first = parse_document(text, ParseMode::Strict);
  const std::string canonical = serialize(first);
  const PolicyDocument second = parse_document(canonical, ParseMode::Strict);
  CHECK(same_statements(first, second));
  CHECK(serialize(second) == canonical);
}

TEST_CASE("exact positions for corrupted inputs") {
  struct Fixture {
    const char* text;
    int line;
    int column;
    const char* expected;
    const char* found;
  };
  // Positions are hand-counted against the 1-based line:column convention.
  const Fixture fixtures[] = {
      // 1: colon missing between target and class
      {"allow httpd_t etc_t file { read };", 1, 21, "':'", "'file'"},
      // 2: semicolon missing; next statement keyword is the witness
      {"type httpd_t\nallow httpd_t etc_t:file read;", 2, 1, "';'", "'allow'"},
      // 3: permission set never closed
      {"allow a b:file { read write;", 1, 28, "'}'", "';'"},
      // 4: unknown statement keyword
      {"permit a b:file read;", 1, 1,
       "statement keyword ('type', 'attribute', 'typeattribute', 'allow', or "
       "'type_transition')",
       "'permit'"},
      // 5: character outside the token alphabet
      {"type a@b;", 1, 7, "identifier or punctuation", "'@'"},
      // 6: empty permission block
      {"allow a b:file { };", 1, 18, "permission", "'}'"},
      // 7: type_transition missing the new type
      {"type_transition a b:process;", 1, 28, "new type", "';'"},
      // 8: input ends mid-rule
      {"allow a b:file", 1, 15, "permission or '{'", "end of input"},
      // 9: duplicate permission rejected in strict mode
      {"allow a b:file { read read };", 1, 23, "distinct permission", "duplicate 'read'"},
      // 10: class name missing before the permission block
      {"allow a b: { read };", 1, 12, "security class", "'{'"},
  };
  for (const auto& fixture : fixtures) {
    CAPTURE(fixture.text);
    try {
      parse_document(fixture.text, ParseMode::Strict);
      FAIL_CHECK("expected ParseError for: " << fixture.text);
    } catch (const ParseError& e) {
      CHECK(e.line() == fixture.line);
      CHECK(e.column() == fixture.column);
      CHECK(e.expected() == fixture.expected);
      CHECK(e.found() == fixture.found);
    }
  }
}

TEST_CASE("strict mode rejects undeclared rule types") {
  const std::string text = "type a;\nallow a b:file read;\n";
  try {
    parse_document(text, ParseMode::Strict);
    FAIL_CHECK("expected UndeclaredTypeError");
  } catch (const UndeclaredTypeError& e) {
    CHECK(e.name() == "b");
    CHECK(e.span().line == 2);
    CHECK(e.span().column == 1);
  }
}

TEST_CASE("lenient mode tolerates undeclared types and deduplicates") {
  const std::string text = "allow a b:file { read read write };\n";
  const PolicyDocument doc = parse_document(text, ParseMode::Lenient);
  const auto& allow = std::get<AllowRule>(doc.statements[0]);
  CHECK(allow.permissions == std::vector<std::string>{"read", "write"});
  REQUIRE(doc.warnings.size() == 1);
  CHECK(doc.warnings[0].span == SourceSpan{1, 23});
  CHECK(doc.warnings[0].message == "duplicate permission 'read' dropped");
}

TEST_CASE("validate_references reports first-reference order") {
  const std::string text =
      "type a;\n"
      "allow a b:file read;\n"
      "type_transition c a:process b;\n";
  const PolicyDocument doc = parse_document(text, ParseMode::Lenient);
  const auto undeclared = validate_references(doc);
  REQUIRE(undeclared.size() == 2);
  CHECK(undeclared[0].name == "b");
  CHECK(undeclared[0].span.line == 2);
  CHECK(undeclared[1].name == "c");
  CHECK(undeclared[1].span.line == 3);
}

TEST_CASE("attribute declarations satisfy strict reference checks") {
  const std::string text =
      "attribute domain;\n"
      "type a;\n"
      "allow a domain:file read;\n";
  CHECK_NOTHROW(parse_document(text, ParseMode::Strict));
}

TEST_CASE("statement equality ignores spans") {
  const PolicyDocument a = parse_document("allow x y:file read;", ParseMode::Lenient);
  const PolicyDocument b = parse_document("\n\n  allow x y : file { read };", ParseMode::Lenient);
  CHECK(same_statements(a, b));
  CHECK(statement_span(a.statements[0]) == SourceSpan{1, 1});
  CHECK(statement_span(b.statements[0]) == SourceSpan{3, 3});
}
