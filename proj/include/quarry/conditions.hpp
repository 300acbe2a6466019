#pragma once

#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "quarry/selectors.hpp"

namespace quarry {

enum class ConditionKind {
  exists,
  int_equals,
  text_equals,
  text_contains,
  text_starts_with,
  text_ends_with,
  text_matches,
  paragraph_start,
  all_of,
  any_of,
  negation,
  min_max,
};

bool is_terminal(ConditionKind k);
std::string_view to_string(ConditionKind k);
/// Accepts the canonical names (exists, intEquals, textEquals, ..., and, or,
/// not, minmax) case-insensitively, plus short aliases such as "contains".
std::optional<ConditionKind> parse_condition_kind(std::string_view name);

struct Condition {
  ConditionKind kind = ConditionKind::exists;

  // terminal
  SelectorSpec selector = identity_spec();
  std::optional<std::string> value;
  std::optional<long long> int_value;
  std::shared_ptr<const std::regex> pattern;

  // composite
  std::vector<Condition> children;
  int min = 0;
  int max = 0;
};

/// Builders validate on construction and throw ConfigError on violations.
Condition make_terminal(ConditionKind kind, SelectorSpec selector = identity_spec(),
                        std::optional<std::string> value = std::nullopt);
Condition make_composite(ConditionKind kind, std::vector<Condition> children);
Condition make_min_max(std::vector<Condition> children, int min, int max);

bool evaluate(const Condition& cond, const Block& block, ExtractionContext& ctx);

}  // namespace quarry
