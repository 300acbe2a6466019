#include "quarry/xmlout.hpp"

#include <iostream>
#include <stdexcept>

#include "quarry/text.hpp"

namespace quarry {

// --- OutputDocument ----------------------------------------------------------

OutputDocument::OutputDocument(std::string root_name) {
  Node root;
  root.name = std::move(root_name);
  nodes_.push_back(std::move(root));
}

OutputDocument::NodeId OutputDocument::add_element(NodeId parent, std::string name) {
  if (parent >= nodes_.size() || nodes_[parent].is_text)
    throw std::invalid_argument("add_element: parent is not an element");
  Node n;
  n.name = std::move(name);
  n.parent = parent;
  nodes_.push_back(std::move(n));
  NodeId id = nodes_.size() - 1;
  nodes_[parent].children.push_back(id);
  return id;
}

void OutputDocument::add_text(NodeId parent, std::string_view text) {
  if (parent >= nodes_.size() || nodes_[parent].is_text)
    throw std::invalid_argument("add_text: parent is not an element");
  if (text.empty()) return;
  const auto& kids = nodes_[parent].children;
  if (!kids.empty() && nodes_[kids.back()].is_text) {
    nodes_[kids.back()].value += text;
    return;
  }
  Node n;
  n.is_text = true;
  n.value = std::string(text);
  n.parent = parent;
  nodes_.push_back(std::move(n));
  nodes_[parent].children.push_back(nodes_.size() - 1);
}

void OutputDocument::set_attribute(NodeId element, std::string name, std::string value) {
  if (element >= nodes_.size() || nodes_[element].is_text)
    throw std::invalid_argument("set_attribute: target is not an element");
  for (auto& [k, v] : nodes_[element].attributes) {
    if (k == name) {
      v = std::move(value);
      return;
    }
  }
  nodes_[element].attributes.emplace_back(std::move(name), std::move(value));
}

std::optional<std::string_view> OutputDocument::attribute(NodeId id, std::string_view name) const {
  for (const auto& [k, v] : nodes_.at(id).attributes)
    if (k == name) return v;
  return std::nullopt;
}

OutputDocument::NodeId OutputDocument::last_child_named(NodeId parent,
                                                        std::string_view name) const {
  const auto& kids = nodes_.at(parent).children;
  for (auto it = kids.rbegin(); it != kids.rend(); ++it)
    if (!nodes_[*it].is_text && nodes_[*it].name == name) return *it;
  return npos;
}

std::vector<OutputDocument::NodeId> OutputDocument::children_named(NodeId parent,
                                                                   std::string_view name) const {
  std::vector<NodeId> out;
  for (NodeId k : nodes_.at(parent).children)
    if (!nodes_[k].is_text && nodes_[k].name == name) out.push_back(k);
  return out;
}

void OutputDocument::declare_namespace(std::string prefix, std::string uri) {
  namespaces_.emplace(std::move(prefix), std::move(uri));
}

void OutputDocument::note_prefix(const std::string& qname, const Document* source) {
  auto colon = qname.find(':');
  if (colon == std::string::npos || !source) return;
  std::string prefix = qname.substr(0, colon);
  if (prefix == "xml" || namespaces_.count(prefix)) return;
  auto it = source->namespaces().find(prefix);
  if (it != source->namespaces().end()) namespaces_.emplace(prefix, it->second);
}

void OutputDocument::import(NodeId parent, NodeRef node) {
  if (!node) return;
  switch (node.kind()) {
    case NodeKind::text:
      // Line-broken whitespace is source indentation, not content.
      if (is_whitespace_only(node.value()) && node.value().find('\n') != std::string::npos)
        return;
      add_text(parent, node.value());
      return;
    case NodeKind::attribute:
      note_prefix(node.name(), node.document());
      set_attribute(parent, node.name(), node.value());
      return;
    case NodeKind::element: {
      note_prefix(node.name(), node.document());
      NodeId el = add_element(parent, node.name());
      for (NodeRef a : node.attributes()) import(el, a);
      for (NodeRef c : node.children()) import(el, c);
      return;
    }
  }
}

void OutputDocument::write(NodeId id, int indent, bool inline_mode, std::string& out) const {
  const Node& n = nodes_[id];
  std::string pad = inline_mode ? "" : std::string(static_cast<std::size_t>(indent) * 2, ' ');
  if (n.is_text) {
    out += escape_xml_text(n.value);
    return;
  }
  out += pad + "<" + n.name;
  if (id == 0) {
    for (const auto& [prefix, uri] : namespaces_) {
      bool own = false;
      for (const auto& [k, _] : n.attributes) own = own || k == "xmlns:" + prefix;
      if (!own) out += " xmlns:" + prefix + "=\"" + escape_xml_attribute(uri) + "\"";
    }
  }
  for (const auto& [k, v] : n.attributes) out += " " + k + "=\"" + escape_xml_attribute(v) + "\"";
  if (n.children.empty()) {
    out += "/>";
    if (!inline_mode) out += '\n';
    return;
  }
  out += ">";
  // Paragraph content is inline by nature even when it holds only elements.
  static const auto paragraphs = default_paragraph_elements();
  bool mixed = inline_mode || (id != 0 && paragraphs.count(n.name) > 0);
  for (NodeId c : n.children) mixed = mixed || nodes_[c].is_text;
  if (mixed) {
    for (NodeId c : n.children) write(c, 0, true, out);
  } else {
    out += '\n';
    for (NodeId c : n.children) write(c, indent + 1, false, out);
    out += pad;
  }
  out += "</" + n.name + ">";
  if (!inline_mode) out += '\n';
}

std::string OutputDocument::serialize() const {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  write(0, 0, false, out);
  return out;
}

// --- cursor operations -------------------------------------------------------

OutputCursor make_output(std::string root_name) {
  return {std::make_shared<OutputDocument>(std::move(root_name)), 0};
}

namespace {

OutputDocument::NodeId walk(OutputDocument& doc, OutputDocument::NodeId at,
                            const std::vector<std::string>& steps, bool fresh_last) {
  for (std::size_t i = 0; i < steps.size(); ++i) {
    bool last = i + 1 == steps.size();
    OutputDocument::NodeId next = OutputDocument::npos;
    if (!(last && fresh_last)) next = doc.last_child_named(at, steps[i]);
    if (next == OutputDocument::npos) next = doc.add_element(at, steps[i]);
    at = next;
  }
  return at;
}

}  // namespace

OutputCursor descend(const WritePath& path, bool overwrite, const OutputCursor& cursor) {
  if (path.attribute)
    throw ConfigError("descend path '" + path.source + "' must end in an element reference");
  if (!cursor.doc) throw std::invalid_argument("descend: empty cursor");
  return {cursor.doc, walk(*cursor.doc, cursor.node, path.steps, overwrite)};
}

bool set_node(const WritePath& path, bool overwrite, const SelectorResult& result,
              const OutputCursor& cursor) {
  if (!result.present()) return false;
  if (!cursor.doc) throw std::invalid_argument("set_node: empty cursor");
  OutputDocument& doc = *cursor.doc;
  if (path.attribute) {
    auto el = walk(doc, cursor.node, path.steps, false);
    doc.set_attribute(el, *path.attribute, normalize_space(result.text()));
    return true;
  }
  auto el = walk(doc, cursor.node, path.steps, overwrite);
  for (NodeRef n : result.nodes) doc.import(el, n);
  return true;
}

std::string trace_message(const Block& block) {
  return "block " + block.type_id + " #" + std::to_string(block.ordinal) + ": " +
         truncate_utf8(normalize_space(text_of(block.nodes)), 80);
}

OutputCursor& cursor_of(std::any& user_object) {
  auto* c = std::any_cast<OutputCursor>(&user_object);
  if (!c || !c->doc) throw std::invalid_argument("user object is not an XML output cursor");
  return *c;
}

const OutputCursor& cursor_of(const std::any& user_object) {
  auto* c = std::any_cast<OutputCursor>(&user_object);
  if (!c || !c->doc) throw std::invalid_argument("user object is not an XML output cursor");
  return *c;
}

// --- actions -----------------------------------------------------------------

namespace {

void trace_event(const Block& block, ExtractionContext& ctx) {
  std::string msg = trace_message(block);
  // Trace always reaches the diagnostic stream; emit() mirrors on its own when tracing.
  if (!ctx.config().trace && ctx.config().trace_stream)
    *ctx.config().trace_stream << "[trace] " << msg << '\n';
  ctx.emit(Severity::green, "trace", std::move(msg), block.start());
}

}  // namespace

void TraceAction::perform(const Block& block, std::any&, ExtractionContext& ctx) const {
  trace_event(block, ctx);
}

std::any TraceAction::make_child(const std::any& parent, const Block& block,
                                 ExtractionContext& ctx) const {
  trace_event(block, ctx);
  return parent;
}

void TraceAction::merge_back(std::any& parent, std::any& child, const Block& block,
                             ExtractionContext& ctx) const {
  // The child is the parent's value when Trace was also the pre-action; keep
  // whatever the inner rules produced.
  if (child.has_value() && child.type() == parent.type()) parent = child;
  trace_event(block, ctx);
}

std::pair<WritePath, bool> write_params(const Params& params, std::string_view owner) {
  check_param_keys(params, {"path", "overwrite"}, owner);
  WritePath path = parse_write_path(require_param(params, "path", owner));
  bool overwrite = false;
  if (auto it = params.find("overwrite"); it != params.end()) {
    auto b = parse_bool(trim(it->second));
    if (!b)
      throw ConfigError(std::string(owner) + ": overwrite must be true or false, got '" +
                        it->second + "'");
    overwrite = *b;
  }
  return {std::move(path), overwrite};
}

DescendNodeAction::DescendNodeAction(WritePath path, bool overwrite)
    : path_(std::move(path)), overwrite_(overwrite) {
  if (path_.attribute)
    throw ConfigError("descend path '" + path_.source + "' must end in an element reference");
}

std::shared_ptr<const Action> DescendNodeAction::create(const Params& params,
                                                        const std::optional<SelectorSpec>& source) {
  if (source) throw ConfigError("descend takes no <Source>");
  auto [path, overwrite] = write_params(params, "descend");
  return std::make_shared<DescendNodeAction>(std::move(path), overwrite);
}

std::any DescendNodeAction::make_child(const std::any& parent, const Block&,
                                       ExtractionContext&) const {
  return descend(path_, overwrite_, cursor_of(parent));
}

SetNodeAction::SetNodeAction(WritePath path, bool overwrite, SelectorSpec source)
    : path_(std::move(path)), overwrite_(overwrite), source_(std::move(source)) {}

std::shared_ptr<const Action> SetNodeAction::create(const Params& params,
                                                    const std::optional<SelectorSpec>& source) {
  auto [path, overwrite] = write_params(params, "set-node");
  return std::make_shared<SetNodeAction>(std::move(path), overwrite,
                                         source ? *source : identity_spec());
}

void SetNodeAction::perform(const Block& block, std::any& user_object,
                            ExtractionContext& ctx) const {
  OutputCursor& cursor = cursor_of(user_object);
  SelectorResult r = select(source_, block, ctx);
  if (!set_node(path_, overwrite_, r, cursor))
    ctx.emit(Severity::yellow, "no-value",
             "selector '" + source_.name + "' found nothing for '" + path_.source + "'",
             block.start());
}

}  // namespace quarry
