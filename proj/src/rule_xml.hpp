#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace quarry::detail {

struct RuleXmlElement {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attributes;
  std::vector<RuleXmlElement> children;
  std::string text;
  long line = 0;
  long column = 0;

  const std::string* attribute(std::string_view key) const {
    for (const auto& [k, v] : attributes)
      if (k == key) return &v;
    return nullptr;
  }
};

/// Reads a rule-set file. Knows the rule grammar's nesting, so a grammar
/// element that cannot appear inside the currently open element implicitly
/// closes it (reported in `warnings`), the way HTML parsers close <p>.
/// Everything else that is not well-formed raises RuleSetError.
RuleXmlElement parse_rule_xml(std::string_view text, std::vector<std::string>& warnings);

}  // namespace quarry::detail
