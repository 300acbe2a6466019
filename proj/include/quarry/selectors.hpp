#pragma once

#include <map>
#include <memory>
#include <regex>
#include <string>

#include "quarry/context.hpp"
#include "quarry/pathlang.hpp"

namespace quarry {

using Params = std::map<std::string, std::string, std::less<>>;

/// Raised while building rule-set components (bad parameters, unknown names).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Content extractor: maps a block to nothing, a node or a fragment.
/// Implementations must not modify the document.
class Selector {
 public:
  virtual ~Selector() = default;
  virtual SelectorResult get(const Block& block, ExtractionContext& ctx) const = 0;
  /// True when the result depends on the block's nodes alone.
  virtual bool cacheable() const { return false; }
};

struct SelectorSpec {
  std::string name;
  Params params;
  std::shared_ptr<const Selector> impl;
};

/// Runs the selector; cacheable ones go through the run cache. A throwing
/// implementation yields absent plus a yellow event.
SelectorResult select(const SelectorSpec& spec, const Block& block, ExtractionContext& ctx);
SelectorResult cached_select(const SelectorSpec& spec, const Block& block,
                             ExtractionContext& ctx);

// --- built-ins -------------------------------------------------------------

std::shared_ptr<const Selector> make_identity_selector(const Params& params = {});
std::shared_ptr<const Selector> make_position_selector(const Params& params = {});
std::shared_ptr<const Selector> make_start_node_selector(const Params& params = {});
std::shared_ptr<const Selector> make_xpath_selector(const Params& params);
std::shared_ptr<const Selector> make_regexp_selector(const Params& params);
std::shared_ptr<const Selector> make_styled_selector(const Params& params);

SelectorSpec identity_spec();

SelectorResult identity_selector(const Block& block);
SelectorResult position_selector(const Block& block);
SelectorResult xpath_selector(const PathExpr& expr, const Block& block);
SelectorResult regexp_selector(const std::regex& pattern, std::span<const NodeRef> nodes);

enum class RunScope { all, first, leading };

/// Text nodes whose effective `property` equals `value`, grouped into runs of
/// adjacent matching text (whitespace-only text neither breaks nor starts a run).
std::vector<Fragment> styled_runs(std::span<const NodeRef> nodes, std::string_view property,
                                  std::string_view value);
SelectorResult styled_selector(std::span<const NodeRef> nodes, std::string_view property,
                               std::string_view value, RunScope scope);

/// Throws ConfigError if `params` holds keys outside `allowed`.
void check_param_keys(const Params& params, std::initializer_list<std::string_view> allowed,
                      std::string_view owner);
const std::string& require_param(const Params& params, std::string_view key,
                                 std::string_view owner);

std::regex compile_regex(const std::string& pattern);

}  // namespace quarry
