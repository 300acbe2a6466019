#pragma once

#include <any>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <typeindex>
#include <vector>

#include "quarry/docmodel.hpp"

namespace quarry {

/// Traffic-light severity. Ordered so that max() yields the worst.
enum class Severity { green = 0, yellow = 1, red = 2 };

std::string_view to_string(Severity s);

struct Event {
  Severity severity = Severity::green;
  std::string code;
  std::string ruleset;
  std::string block_type;
  std::string rule;
  std::string action;
  std::string message;
  std::string location;

  friend bool operator==(const Event&, const Event&) = default;
};

/// A block type tag plus a run of consecutive sibling nodes.
struct Block {
  std::string type_id;
  Fragment nodes;
  /// 1-based position among all blocks of one rule-set application; 0 while provisional.
  std::size_t ordinal = 0;

  NodeRef start() const { return nodes.empty() ? NodeRef{} : nodes.front(); }
  friend bool operator==(const Block&, const Block&) = default;
};

/// What a selector hands back: nothing, one node, or a fragment. Nodes that
/// were generated (not taken from the input) live in `owner`.
struct SelectorResult {
  enum class Kind { absent, node, fragment };
  Kind kind = Kind::absent;
  Fragment nodes;
  DocumentPtr owner;

  static SelectorResult absent() { return {}; }
  static SelectorResult node(NodeRef n, DocumentPtr owner = nullptr) {
    return {Kind::node, {n}, std::move(owner)};
  }
  static SelectorResult fragment(Fragment nodes, DocumentPtr owner = nullptr) {
    return {Kind::fragment, std::move(nodes), std::move(owner)};
  }

  bool present() const { return kind != Kind::absent; }
  bool synthetic() const { return owner != nullptr; }
  std::string text() const { return text_of(nodes); }
};

std::set<std::string, std::less<>> default_paragraph_elements();

struct RunConfig {
  std::set<std::string, std::less<>> paragraph_elements = default_paragraph_elements();
  /// Where actions may write side files (extracted images). Empty disables writing.
  std::filesystem::path output_dir;
  /// Mirror trace events to `trace_stream`.
  bool trace = false;
  std::ostream* trace_stream = nullptr;
};

class Selector;

/// Per-run state: the user-object stack, the event log, the selector cache.
/// Confined to one run; never shared between threads.
class ExtractionContext {
 public:
  explicit ExtractionContext(RunConfig config = {});

  const RunConfig& config() const { return config_; }

  DocumentPtr document;

  // --- user objects ---
  std::size_t depth() const { return stack_.size(); }
  std::any& user_object() { return stack_.back(); }
  std::any& user_object_at(std::size_t i) { return stack_.at(i); }
  void push(std::any object) { stack_.push_back(std::move(object)); }
  std::any pop();

  // --- events ---
  void emit(Severity severity, std::string code, std::string message, NodeRef where = {});
  const std::vector<Event>& events() const { return events_; }
  std::vector<Event> take_events() { return std::move(events_); }

  /// Labels attached to events emitted while alive; restores the previous labels.
  class Attribution {
   public:
    Attribution(ExtractionContext& ctx, std::string ruleset, std::string block_type,
                std::string rule, std::string action);
    Attribution(const Attribution&) = delete;
    Attribution& operator=(const Attribution&) = delete;
    ~Attribution();

   private:
    ExtractionContext& ctx_;
    std::tuple<std::string, std::string, std::string, std::string> saved_;
  };
  Attribution attribute_to(std::string ruleset, std::string block_type, std::string rule,
                           std::string action) {
    return Attribution(*this, std::move(ruleset), std::move(block_type), std::move(rule),
                       std::move(action));
  }
  const std::string& current_ruleset() const { return ruleset_; }
  const std::string& current_block_type() const { return block_type_; }
  const std::string& current_rule() const { return rule_; }

  // --- selector cache ---
  struct CacheKey {
    const Selector* selector;
    NodeRef first;
    NodeRef last;
    std::size_t size;
    auto operator<=>(const CacheKey&) const = default;
  };
  std::map<CacheKey, SelectorResult>& selector_cache() { return cache_; }

  // --- statistics for reports ---
  std::map<std::string, std::size_t> block_counts;
  std::map<std::string, std::size_t> rule_fires;

  /// Per-run scratch state for extensions, created on first use.
  template <class T>
  T& state() {
    auto& slot = extensions_[std::type_index(typeid(T))];
    if (!slot.has_value()) slot = std::make_shared<T>();
    return *std::any_cast<std::shared_ptr<T>&>(slot);
  }

 private:
  RunConfig config_;
  std::vector<std::any> stack_;
  std::vector<Event> events_;
  std::string ruleset_, block_type_, rule_, action_;
  std::map<CacheKey, SelectorResult> cache_;
  std::map<std::type_index, std::any> extensions_;
};

}  // namespace quarry
