#include "doctest.h"

#include "quarry/rulemodel.hpp"
#include "support/support.hpp"

using namespace quarry;
using quarry::testing::load_rules;

namespace {

std::string wrap(const std::string& body) {
  return "<RuleSet ID=\"RS\" xmlns:text=\"urn:t\">" + body + "</RuleSet>";
}

std::string block_with_rule(const std::string& rule) {
  return wrap("<Block ID=\"b\"><Definition><Start matches=\"/p\"/></Definition><Rules>" + rule +
              "</Rules></Block>");
}

}  // namespace

TEST_CASE("the assembled snippets load") {
  auto rs = load_rules(quarry::testing::grammar_snippets());
  CHECK(rs->id == "RS:default");
  REQUIRE(rs->block_types.size() == 4);

  const BlockType& body = rs->block_types[0];
  CHECK(body.id == "body");
  CHECK(body.start.branches.size() == 2);
  REQUIRE(body.condition);
  CHECK(body.condition->kind == ConditionKind::all_of);
  REQUIRE(body.condition->children.size() == 2);
  CHECK(body.condition->children[0].kind == ConditionKind::paragraph_start);
  CHECK(body.condition->children[1].kind == ConditionKind::exists);
  CHECK(body.condition->children[1].selector.params.at("regexp") == "\\s*(.*)\\s*:");
  CHECK(body.grouping.kind == GroupingKind::end_expression);

  REQUIRE(body.rules.size() == 1);
  const Rule& r1 = body.rules[0];
  CHECK(r1.id == "R1");
  REQUIRE(r1.condition);
  CHECK(r1.condition->kind == ConditionKind::text_contains);
  REQUIRE(r1.action);
  CHECK(r1.action->params.at("path") == "@title");
  CHECK(r1.action->params.at("overwrite") == "false");
  REQUIRE(r1.action->source);
  CHECK(r1.action->source->name == "example.selectors.StartingNodeSelector");
  REQUIRE(r1.inner);
  CHECK(r1.inner->id == "RS:R1");

  CHECK(rs->block_types[1].grouping.kind == GroupingKind::grouping_expression);
  CHECK(rs->block_types[3].grouping.kind == GroupingKind::next_block);
  const Rule& seq = rs->block_types[3].rules.at(0);
  REQUIRE(seq.inner);
  CHECK(seq.inner->pre);
  CHECK(seq.inner->post);
  // The unclosed <Condition type="and"> and the "..." placeholder are tolerated with warnings.
  CHECK(rs->warnings.size() == 2);
}

TEST_CASE("every seeded mutation is rejected with a position") {
  for (const auto& m : quarry::testing::grammar_mutations()) {
    CAPTURE(m.name);
    std::string xml = quarry::testing::mutated_snippets(m);
    try {
      load_rules(xml);
      FAIL("mutation loaded");
    } catch (const RuleSetError& e) {
      CHECK(e.line() > 0);
    }
  }
}

TEST_CASE("a rule needs an action or a rule set") {
  CHECK_THROWS_AS(load_rules(block_with_rule("<Rule ID=\"x\"><Condition type=\"exists\"/></Rule>")),
                  RuleSetError);
}

TEST_CASE("rule IDs are synthesized with a warning") {
  auto rs = load_rules(block_with_rule("<Rule><Action class=\"trace\"/></Rule>"));
  CHECK(rs->block_types[0].rules[0].id == "#1");
  CHECK(rs->warnings.size() == 1);
}

TEST_CASE("structural errors") {
  CHECK_THROWS_AS(load_rules("<Rules/>"), RuleSetError);
  CHECK_THROWS_AS(load_rules(wrap("<Block ID=\"b\"/>")), RuleSetError);
  CHECK_THROWS_AS(load_rules(wrap("<Block ID=\"b\"><Definition/></Block>")), RuleSetError);
  CHECK_THROWS_AS(load_rules(wrap("<Block ID=\"b\"><Definition><Start matches=\"/p\"/>"
                                  "<Grouping type=\"NEXT_BLOCK\"><GroupingExpression matches=\"p\"/>"
                                  "</Grouping></Definition></Block>")),
                  RuleSetError);
  CHECK_THROWS_AS(load_rules(wrap("<Block ID=\"b\"><Definition><Start matches=\"/p\"/>"
                                  "<Grouping type=\"SOMETIMES\"/></Definition></Block>")),
                  RuleSetError);
  CHECK_THROWS_AS(load_rules(block_with_rule("<Rule ID=\"a\"><Action class=\"trace\"/></Rule>"
                                              "<Rule ID=\"a\"><Action class=\"trace\"/></Rule>")),
                  RuleSetError);
  CHECK_THROWS_AS(load_rules("<RuleSet ID=\"x\"><Block"), RuleSetError);
}

TEST_CASE("errors name their location") {
  try {
    load_rules(block_with_rule("<Rule ID=\"r\"><Action class=\"nope\"/></Rule>"));
    FAIL("expected an error");
  } catch (const RuleSetError& e) {
    CHECK(e.location().find("Rule 'r'") != std::string::npos);
    CHECK(std::string(e.what()).find("nope") != std::string::npos);
  }
}

TEST_CASE("role checks") {
  // set-node cannot create a child user object.
  CHECK_THROWS_AS(load_rules(wrap("<Block ID=\"b\"><Definition><Start matches=\"/p\"/></Definition>"
                                  "<Rules><Rule ID=\"r\"><RuleSet ID=\"in\" pre=\"set-node\" "
                                  "preParameters=\"path=x\"/></Rule></Rules></Block>")),
                  RuleSetError);
  CHECK_THROWS_AS(load_rules(block_with_rule("<Rule ID=\"r\"><Action class=\"descend\" "
                                             "parameters=\"path=x\"/></Rule>")),
                  RuleSetError);
}

TEST_CASE("grouping names are case-insensitive and NONE is explicit or omitted") {
  auto rs = load_rules(wrap("<Block ID=\"a\"><Definition><Start matches=\"/p\"/>"
                            "<Grouping type=\"next_block\"/></Definition></Block>"
                            "<Block ID=\"b\"><Definition><Start matches=\"/q\"/>"
                            "<Grouping type=\"NONE\"/></Definition></Block>"
                            "<Block ID=\"c\"><Definition><Start matches=\"/r\"/></Definition></Block>"));
  CHECK(rs->block_types[0].grouping.kind == GroupingKind::next_block);
  CHECK(rs->block_types[1].grouping.kind == GroupingKind::none);
  CHECK(rs->block_types[2].grouping.kind == GroupingKind::none);
}

TEST_CASE("unknown attributes and elements only warn") {
  auto rs = load_rules("<RuleSet ID=\"x\" colour=\"red\"><Note/></RuleSet>");
  CHECK(rs->warnings.size() == 2);
}

TEST_CASE("parameter strings") {
  auto p = parse_params("path=@title;overwrite=false");
  CHECK(p.size() == 2);
  CHECK(p.at("path") == "@title");
  CHECK(p.at("overwrite") == "false");
  CHECK(parse_params("regexp=\\s*(.*)\\s*:").at("regexp") == "\\s*(.*)\\s*:");
  CHECK(parse_params("a=b=c").at("a") == "b=c");
  CHECK(parse_params("").empty());
  CHECK_THROWS_AS(parse_params("novalue"), ConfigError);
  CHECK_THROWS_AS(parse_params("=v"), ConfigError);
}

TEST_CASE("registry lookups") {
  Registry r = quarry::testing::full_registry();
  CHECK(r.find_selector("identity") != nullptr);
  CHECK(r.find_selector("de.knowit.phoenix.selectors.RegexpSelector") != nullptr);
  CHECK(r.find_selector("nonexistent") == nullptr);
  CHECK(r.find_action("de.knowit.phoenix.xmlUserObject.SetNodeAction") != nullptr);
  CHECK_THROWS_AS(r.add_selector({"identity"}, [](const Params&) { return make_identity_selector(); }),
                  std::logic_error);
}

TEST_CASE("describe is a stable structural dump") {
  auto a = load_rules(quarry::testing::grammar_snippets());
  auto b = load_rules(quarry::testing::grammar_snippets());
  CHECK(describe(*a) == describe(*b));
  CHECK(describe(*a).find("Block body") != std::string::npos);
}
