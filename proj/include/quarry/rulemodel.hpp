#pragma once

#include <any>
#include <functional>
#include <initializer_list>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "quarry/conditions.hpp"
#include "quarry/pathlang.hpp"
#include "quarry/selectors.hpp"

namespace quarry {

/// Effect fired on a block. One class may serve as rule action, rule-set
/// pre-action (creates the child user object) and post-action (merges it back);
/// roles() declares which, and the loader checks it.
class Action {
 public:
  enum Role : unsigned { rule = 1u, pre = 2u, post = 4u };

  virtual ~Action() = default;
  virtual unsigned roles() const { return rule; }

  virtual void perform(const Block& block, std::any& user_object, ExtractionContext& ctx) const;
  virtual std::any make_child(const std::any& parent, const Block& block,
                              ExtractionContext& ctx) const;
  virtual void merge_back(std::any& parent, std::any& child, const Block& block,
                          ExtractionContext& ctx) const;
};

struct ActionSpec {
  std::string name;
  Params params;
  std::optional<SelectorSpec> source;
  std::shared_ptr<const Action> impl;
};

using SelectorFactory = std::function<std::shared_ptr<const Selector>(const Params&)>;
using ActionFactory = std::function<std::shared_ptr<const Action>(
    const Params&, const std::optional<SelectorSpec>& source)>;

/// Name -> implementation bindings. Populate fully, then load rule sets.
class Registry {
 public:
  /// Throws std::logic_error on a name that is already taken.
  void add_selector(std::initializer_list<std::string_view> names, SelectorFactory factory);
  void add_action(std::initializer_list<std::string_view> names, ActionFactory factory);

  const SelectorFactory* find_selector(std::string_view name) const;
  const ActionFactory* find_action(std::string_view name) const;

  /// Resolve and construct; ConfigError on unknown names or bad parameters.
  SelectorSpec make_selector(std::string_view name, const Params& params = {}) const;
  ActionSpec make_action(std::string_view name, const Params& params = {},
                         std::optional<SelectorSpec> source = std::nullopt) const;

 private:
  std::map<std::string, SelectorFactory, std::less<>> selectors_;
  std::map<std::string, ActionFactory, std::less<>> actions_;
};

/// Installs identity/position/start/xpath/regexp/styled selectors and the
/// trace/descend/set-node actions under short and legacy class names.
Registry& register_builtin(Registry& registry);

// --- grammar model -------------------------------------------------------

enum class GroupingKind { none, grouping_expression, end_expression, next_block };
std::string_view to_string(GroupingKind k);

struct Grouping {
  GroupingKind kind = GroupingKind::none;
  std::optional<PathExpr> expr;
};

struct RuleSet;

struct Rule {
  std::string id;
  /// Absent means always true.
  std::optional<Condition> condition;
  std::optional<ActionSpec> action;
  std::shared_ptr<const RuleSet> inner;
};

struct BlockType {
  std::string id;
  PathExpr start;
  std::optional<Condition> condition;
  Grouping grouping;
  std::vector<Rule> rules;
};

struct RuleSet {
  std::string id;
  std::optional<ActionSpec> pre;
  std::optional<ActionSpec> post;
  std::vector<BlockType> block_types;
  /// Root element name for XML output (top-level rule sets only).
  std::string output_root;
  /// Recoverable problems found while loading (advisory).
  std::vector<std::string> warnings;
};

class RuleSetError : public std::runtime_error {
 public:
  RuleSetError(std::string location, const std::string& message, long line = 0, long column = 0);
  const std::string& location() const noexcept { return location_; }
  long line() const noexcept { return line_; }

 private:
  std::string location_;
  long line_;
};

/// "k=v;k=v" -> map. Splits each piece on its first '='; keys are trimmed.
Params parse_params(std::string_view s);

std::shared_ptr<const RuleSet> load_ruleset(std::string_view xml, const Registry& registry);

/// Canonical multi-line dump; equal dumps mean structurally equal rule sets.
std::string describe(const RuleSet& rs);

}  // namespace quarry
