#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "quarry/context.hpp"
#include "quarry/pathlang.hpp"
#include "quarry/rulemodel.hpp"

namespace quarry {

/// Mutable output tree. Node 0 is the root element; nodes are never removed.
class OutputDocument {
 public:
  using NodeId = std::size_t;
  static constexpr NodeId npos = static_cast<NodeId>(-1);

  explicit OutputDocument(std::string root_name = "output");

  NodeId root() const { return 0; }
  std::size_t size() const { return nodes_.size(); }

  NodeId add_element(NodeId parent, std::string name);
  /// Appends text, merging with a preceding text child.
  void add_text(NodeId parent, std::string_view text);
  /// Replaces the value in place if the attribute exists, else appends it.
  void set_attribute(NodeId element, std::string name, std::string value);

  bool is_text(NodeId id) const { return nodes_.at(id).is_text; }
  const std::string& name(NodeId id) const { return nodes_.at(id).name; }
  const std::string& text(NodeId id) const { return nodes_.at(id).value; }
  NodeId parent(NodeId id) const { return nodes_.at(id).parent; }
  const std::vector<NodeId>& children(NodeId id) const { return nodes_.at(id).children; }
  const std::vector<std::pair<std::string, std::string>>& attributes(NodeId id) const {
    return nodes_.at(id).attributes;
  }
  std::optional<std::string_view> attribute(NodeId id, std::string_view name) const;
  /// Last element child called `name`, or npos.
  NodeId last_child_named(NodeId parent, std::string_view name) const;
  std::vector<NodeId> children_named(NodeId parent, std::string_view name) const;

  /// Deep-copies an input node under `parent`. Attribute nodes become
  /// attributes of `parent`. Namespace prefixes used by the copy are
  /// declared on the root when serialized.
  void import(NodeId parent, NodeRef node);
  void declare_namespace(std::string prefix, std::string uri);

  /// UTF-8 with declaration, two-space indentation. Elements holding text and
  /// paragraph elements are written inline so no whitespace enters their content.
  std::string serialize() const;

 private:
  struct Node {
    bool is_text = false;
    std::string name;
    std::string value;
    NodeId parent = npos;
    std::vector<std::pair<std::string, std::string>> attributes;
    std::vector<NodeId> children;
  };

  void note_prefix(const std::string& qname, const Document* source);
  void write(NodeId id, int indent, bool inline_mode, std::string& out) const;

  std::vector<Node> nodes_;
  std::map<std::string, std::string> namespaces_;
};

/// The XML backend's user object: an output document plus a current element.
struct OutputCursor {
  std::shared_ptr<OutputDocument> doc;
  OutputDocument::NodeId node = 0;
};

OutputCursor make_output(std::string root_name = "output");

/// Walks `path` (element steps only) from the cursor. With `overwrite` the
/// last step always creates a new element; otherwise the last same-named
/// child is reused at every step. Throws ConfigError on attribute paths.
OutputCursor descend(const WritePath& path, bool overwrite, const OutputCursor& cursor);

/// Writes a selector result at `path`: an attribute path receives the
/// normalized text, an element path receives deep copies of the nodes.
/// Returns false (and writes nothing) when the result is absent.
bool set_node(const WritePath& path, bool overwrite, const SelectorResult& result,
              const OutputCursor& cursor);

/// "block <type> #<ordinal>: <preview>" with an 80-byte normalized preview.
std::string trace_message(const Block& block);

/// Pulls the cursor out of a user object; throws std::invalid_argument if it
/// holds something else.
OutputCursor& cursor_of(std::any& user_object);
const OutputCursor& cursor_of(const std::any& user_object);

class TraceAction : public Action {
 public:
  unsigned roles() const override { return rule | pre | post; }
  void perform(const Block& block, std::any& user_object, ExtractionContext& ctx) const override;
  std::any make_child(const std::any& parent, const Block& block,
                      ExtractionContext& ctx) const override;
  void merge_back(std::any& parent, std::any& child, const Block& block,
                  ExtractionContext& ctx) const override;
};

class DescendNodeAction : public Action {
 public:
  DescendNodeAction(WritePath path, bool overwrite);
  static std::shared_ptr<const Action> create(const Params& params,
                                              const std::optional<SelectorSpec>& source);
  unsigned roles() const override { return pre; }
  std::any make_child(const std::any& parent, const Block& block,
                      ExtractionContext& ctx) const override;

 private:
  WritePath path_;
  bool overwrite_;
};

class SetNodeAction : public Action {
 public:
  SetNodeAction(WritePath path, bool overwrite, SelectorSpec source);
  static std::shared_ptr<const Action> create(const Params& params,
                                              const std::optional<SelectorSpec>& source);
  void perform(const Block& block, std::any& user_object, ExtractionContext& ctx) const override;

 private:
  WritePath path_;
  bool overwrite_;
  SelectorSpec source_;
};

/// Reads the shared path/overwrite parameters.
std::pair<WritePath, bool> write_params(const Params& params, std::string_view owner);

}  // namespace quarry
