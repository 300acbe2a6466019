#include "quarry/conditions.hpp"

#include <algorithm>

#include "quarry/text.hpp"

namespace quarry {

bool is_terminal(ConditionKind k) {
  switch (k) {
    case ConditionKind::all_of:
    case ConditionKind::any_of:
    case ConditionKind::negation:
    case ConditionKind::min_max:
      return false;
    default:
      return true;
  }
}

std::string_view to_string(ConditionKind k) {
  switch (k) {
    case ConditionKind::exists: return "exists";
    case ConditionKind::int_equals: return "intEquals";
    case ConditionKind::text_equals: return "textEquals";
    case ConditionKind::text_contains: return "textContains";
    case ConditionKind::text_starts_with: return "textStartsWith";
    case ConditionKind::text_ends_with: return "textEndsWith";
    case ConditionKind::text_matches: return "textMatches";
    case ConditionKind::paragraph_start: return "paragraphStart";
    case ConditionKind::all_of: return "and";
    case ConditionKind::any_of: return "or";
    case ConditionKind::negation: return "not";
    case ConditionKind::min_max: return "minmax";
  }
  return "?";
}

std::optional<ConditionKind> parse_condition_kind(std::string_view name) {
  static const std::pair<std::string_view, ConditionKind> kNames[] = {
      {"exists", ConditionKind::exists},
      {"intequals", ConditionKind::int_equals},
      {"textequals", ConditionKind::text_equals},
      {"equals", ConditionKind::text_equals},
      {"textcontains", ConditionKind::text_contains},
      {"contains", ConditionKind::text_contains},
      {"textstartswith", ConditionKind::text_starts_with},
      {"startswith", ConditionKind::text_starts_with},
      {"textendswith", ConditionKind::text_ends_with},
      {"endswith", ConditionKind::text_ends_with},
      {"textmatches", ConditionKind::text_matches},
      {"matches", ConditionKind::text_matches},
      {"paragraphstart", ConditionKind::paragraph_start},
      {"and", ConditionKind::all_of},
      {"or", ConditionKind::any_of},
      {"not", ConditionKind::negation},
      {"minmax", ConditionKind::min_max},
      {"min-max", ConditionKind::min_max},
  };
  std::string lower = to_lower_ascii(name);
  for (const auto& [n, k] : kNames)
    if (n == lower) return k;
  return std::nullopt;
}

Condition make_terminal(ConditionKind kind, SelectorSpec selector,
                        std::optional<std::string> value) {
  if (!is_terminal(kind))
    throw ConfigError("condition '" + std::string(to_string(kind)) + "' is not terminal");
  Condition c;
  c.kind = kind;
  c.selector = std::move(selector);
  bool needs_value = kind != ConditionKind::exists && kind != ConditionKind::paragraph_start;
  if (needs_value && !value)
    throw ConfigError("condition '" + std::string(to_string(kind)) + "' requires a value");
  if (kind == ConditionKind::int_equals) {
    c.int_value = parse_integer(trim(*value));
    if (!c.int_value)
      throw ConfigError("condition 'intEquals': value '" + *value + "' is not an integer");
  }
  if (kind == ConditionKind::text_matches)
    c.pattern = std::make_shared<const std::regex>(compile_regex(*value));
  c.value = std::move(value);
  return c;
}

Condition make_composite(ConditionKind kind, std::vector<Condition> children) {
  if (is_terminal(kind) || kind == ConditionKind::min_max)
    throw ConfigError("condition '" + std::string(to_string(kind)) +
                      "' cannot be built as a plain combinator");
  if (kind == ConditionKind::negation && children.size() != 1)
    throw ConfigError("condition 'not' takes exactly one child, got " +
                      std::to_string(children.size()));
  Condition c;
  c.kind = kind;
  c.children = std::move(children);
  return c;
}

Condition make_min_max(std::vector<Condition> children, int min, int max) {
  if (min < 0 || min > max || max > static_cast<int>(children.size()))
    throw ConfigError("condition 'minmax': need 0 <= min <= max <= " +
                      std::to_string(children.size()) + ", got min=" + std::to_string(min) +
                      " max=" + std::to_string(max));
  Condition c;
  c.kind = ConditionKind::min_max;
  c.children = std::move(children);
  c.min = min;
  c.max = max;
  return c;
}

namespace {

bool evaluate_terminal(const Condition& cond, const Block& block, ExtractionContext& ctx) {
  if (cond.kind == ConditionKind::paragraph_start) {
    NodeRef first = block.start();
    return first && first.is_element() && ctx.config().paragraph_elements.count(first.name()) > 0;
  }
  SelectorResult r = select(cond.selector, block, ctx);
  if (!r.present()) return false;
  if (cond.kind == ConditionKind::exists) return true;

  std::string t = normalize_space(r.text());
  const std::string& v = *cond.value;
  switch (cond.kind) {
    case ConditionKind::text_equals: return t == v;
    case ConditionKind::text_contains: return t.find(v) != std::string::npos;
    case ConditionKind::text_starts_with: return std::string_view(t).starts_with(v);
    case ConditionKind::text_ends_with: return std::string_view(t).ends_with(v);
    case ConditionKind::text_matches: return std::regex_match(t, *cond.pattern);
    case ConditionKind::int_equals: {
      auto parsed = parse_integer(t);
      return parsed && parsed == cond.int_value;
    }
    default: return false;
  }
}

}  // namespace

bool evaluate(const Condition& cond, const Block& block, ExtractionContext& ctx) {
  switch (cond.kind) {
    case ConditionKind::all_of:
      return std::all_of(cond.children.begin(), cond.children.end(),
                         [&](const Condition& c) { return evaluate(c, block, ctx); });
    case ConditionKind::any_of:
      return std::any_of(cond.children.begin(), cond.children.end(),
                         [&](const Condition& c) { return evaluate(c, block, ctx); });
    case ConditionKind::negation:
      return !evaluate(cond.children.front(), block, ctx);
    case ConditionKind::min_max: {
      int count = 0;
      for (const auto& c : cond.children) count += evaluate(c, block, ctx) ? 1 : 0;
      return count >= cond.min && count <= cond.max;
    }
    default:
      return evaluate_terminal(cond, block, ctx);
  }
}

}  // namespace quarry
