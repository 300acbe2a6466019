#include "quarry/docmodel.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "quarry/text.hpp"

namespace quarry {

LoadError::LoadError(const std::string& what, long line, long column)
    : std::runtime_error(line > 0 ? what + " (line " + std::to_string(line) + ", column " +
                                        std::to_string(column) + ")"
                                  : what),
      line_(line),
      column_(column) {}

// --- NodeRef -------------------------------------------------------------

namespace {
const std::string kEmpty;
const std::vector<std::pair<std::string, std::string>> kNoDecls;
}  // namespace

NodeKind NodeRef::kind() const { return doc_->nodes_[index_].kind; }
const std::string& NodeRef::name() const { return doc_->nodes_[index_].name; }
const std::string& NodeRef::value() const { return doc_->nodes_[index_].value; }

NodeRef NodeRef::parent() const {
  auto p = doc_->nodes_[index_].parent;
  return p == Document::kNone ? NodeRef{} : NodeRef(doc_, p);
}

NodeRange NodeRef::children() const { return {doc_, doc_->nodes_[index_].children}; }
NodeRange NodeRef::attributes() const { return {doc_, doc_->nodes_[index_].attributes}; }

std::optional<std::string_view> NodeRef::attribute(std::string_view name) const {
  for (auto id : doc_->nodes_[index_].attributes) {
    const auto& a = doc_->nodes_[id];
    if (a.name == name) return std::string_view(a.value);
  }
  return std::nullopt;
}

const std::vector<std::pair<std::string, std::string>>& NodeRef::namespace_decls() const {
  return doc_->nodes_[index_].ns_decls;
}

std::optional<std::string_view> NodeRef::style_name() const {
  const auto& s = doc_->nodes_[index_].style_name;
  if (!s) return std::nullopt;
  return std::string_view(*s);
}

bool NodeRef::contains(NodeRef other) const {
  return other.doc_ == doc_ && other.index_ >= index_ && other.index_ < subtree_end();
}

std::uint32_t NodeRef::subtree_end() const { return doc_->nodes_[index_].end; }

NodeRef NodeRef::next_sibling() const {
  auto p = parent();
  if (!p || is_attribute()) return {};
  const auto& siblings = doc_->nodes_[p.index_].children;
  auto it = std::find(siblings.begin(), siblings.end(), index_);
  if (it == siblings.end() || ++it == siblings.end()) return {};
  return NodeRef(doc_, *it);
}

std::strong_ordering operator<=>(const NodeRef& a, const NodeRef& b) noexcept {
  if (a.doc_ != b.doc_) {
    return std::compare_three_way{}(a.doc_, b.doc_);
  }
  return a.index_ <=> b.index_;
}

// --- StyleTable ----------------------------------------------------------

const StyleEntry* StyleTable::find(std::string_view name) const {
  auto it = entries_.find(name);
  return it == entries_.end() ? nullptr : &it->second;
}

std::optional<std::string> StyleTable::resolve(std::string_view name,
                                               std::string_view property) const {
  std::set<std::string, std::less<>> seen;
  std::optional<std::string> current{std::string(name)};
  while (current) {
    if (!seen.insert(*current).second) break;
    const StyleEntry* e = find(*current);
    if (!e) break;
    if (auto it = e->properties.find(property); it != e->properties.end()) return it->second;
    current = e->parent;
  }
  return std::nullopt;
}

std::vector<std::string> StyleTable::break_cycles() {
  std::vector<std::string> cuts;
  for (auto& [start, _] : entries_) {
    std::vector<std::string> chain;
    std::set<std::string, std::less<>> seen;
    std::string current = start;
    while (true) {
      seen.insert(current);
      chain.push_back(current);
      auto it = entries_.find(current);
      if (it == entries_.end() || !it->second.parent) break;
      const std::string& next = *it->second.parent;
      if (seen.count(next)) {
        cuts.push_back("style cycle: '" + current + "' -> '" + next + "' cut");
        it->second.parent.reset();
        break;
      }
      current = next;
    }
  }
  return cuts;
}

void StyleTable::merge_missing(const StyleTable& other) {
  for (const auto& [name, entry] : other.entries_) entries_.try_emplace(name, entry);
}

// --- DocumentBuilder -----------------------------------------------------

namespace {
bool names_style(std::string_view attr) {
  if (attr == "style-name") return true;
  auto colon = attr.find(':');
  return colon != std::string_view::npos && attr.substr(colon + 1) == "style-name";
}
}  // namespace

DocumentBuilder::DocumentBuilder() : doc_(new Document()) {}

std::uint32_t DocumentBuilder::open_element(std::string name) {
  auto id = static_cast<std::uint32_t>(doc_->nodes_.size());
  Document::NodeData n;
  n.kind = NodeKind::element;
  n.name = std::move(name);
  if (!open_.empty()) {
    n.parent = open_.back();
    doc_->nodes_[open_.back()].children.push_back(id);
  } else if (!doc_->nodes_.empty()) {
    throw LoadError("document already has a root element");
  }
  doc_->nodes_.push_back(std::move(n));
  open_.push_back(id);
  attributes_open_ = true;
  return id;
}

void DocumentBuilder::add_attribute(std::string name, std::string value) {
  if (!attributes_open_) throw LoadError("attribute added after element content");
  auto id = static_cast<std::uint32_t>(doc_->nodes_.size());
  auto owner = open_.back();
  if (names_style(name)) doc_->nodes_[owner].style_name = value;
  Document::NodeData n;
  n.kind = NodeKind::attribute;
  n.name = std::move(name);
  n.value = std::move(value);
  n.parent = owner;
  n.end = id + 1;
  doc_->nodes_.push_back(std::move(n));
  doc_->nodes_[owner].attributes.push_back(id);
}

void DocumentBuilder::add_namespace_decl(std::string prefix, std::string uri) {
  doc_->namespaces_.try_emplace(prefix, uri);
  doc_->nodes_[open_.back()].ns_decls.emplace_back(std::move(prefix), std::move(uri));
}

std::uint32_t DocumentBuilder::add_text(std::string text) {
  if (open_.empty()) throw LoadError("text outside the root element");
  attributes_open_ = false;
  const auto& siblings = doc_->nodes_[open_.back()].children;
  // Adjacent character data coalesces into one text node.
  if (!siblings.empty() && doc_->nodes_[siblings.back()].kind == NodeKind::text &&
      siblings.back() + 1 == doc_->nodes_.size()) {
    doc_->nodes_[siblings.back()].value += text;
    return siblings.back();
  }
  auto id = static_cast<std::uint32_t>(doc_->nodes_.size());
  Document::NodeData n;
  n.kind = NodeKind::text;
  n.value = std::move(text);
  n.parent = open_.back();
  n.end = id + 1;
  doc_->nodes_.push_back(std::move(n));
  doc_->nodes_[open_.back()].children.push_back(id);
  return id;
}

void DocumentBuilder::close_element() {
  doc_->nodes_[open_.back()].end = static_cast<std::uint32_t>(doc_->nodes_.size());
  open_.pop_back();
  attributes_open_ = false;
}

DocumentPtr DocumentBuilder::finish_raw() {
  if (!open_.empty()) throw LoadError("unclosed element '" + doc_->nodes_[open_.back()].name + "'");
  if (doc_->nodes_.empty()) throw LoadError("document has no root element");
  return std::move(doc_);
}

DocumentPtr DocumentBuilder::finish() {
  if (!open_.empty()) throw LoadError("unclosed element '" + doc_->nodes_[open_.back()].name + "'");
  if (doc_->nodes_.empty()) throw LoadError("document has no root element");
  StyleTable own = extract_office_styles(NodeRef(doc_.get(), 0));
  // Styles supplied from elsewhere (a container's styles entry) lose to the document's own.
  own.merge_missing(doc_->styles_);
  for (auto& msg : own.break_cycles()) doc_->warnings_.push_back(std::move(msg));
  doc_->styles_ = std::move(own);
  return std::move(doc_);
}

void copy_subtree(DocumentBuilder& builder, NodeRef node) {
  switch (node.kind()) {
    case NodeKind::text:
      builder.add_text(node.value());
      return;
    case NodeKind::attribute:
      builder.add_text(node.value());
      return;
    case NodeKind::element:
      builder.open_element(node.name());
      for (const auto& [p, u] : node.namespace_decls()) builder.add_namespace_decl(p, u);
      for (auto a : node.attributes()) builder.add_attribute(a.name(), a.value());
      for (auto c : node.children()) copy_subtree(builder, c);
      builder.close_element();
      return;
  }
}

// --- styles --------------------------------------------------------------

namespace {

bool is_bold_weight(std::string_view v) {
  if (v == "bold" || v == "bolder") return true;
  int w = 0;
  for (char c : v) {
    if (c < '0' || c > '9') return false;
    w = w * 10 + (c - '0');
  }
  return !v.empty() && w >= 600;
}

void read_style_properties(NodeRef props, StyleEntry& entry) {
  for (auto a : props.attributes()) {
    const auto& n = a.name();
    const auto& v = a.value();
    if (n == "fo:font-weight") {
      entry.properties[std::string(style_property::bold)] = is_bold_weight(v) ? "true" : "false";
    } else if (n == "fo:font-style") {
      entry.properties[std::string(style_property::italic)] =
          (v == "italic" || v == "oblique") ? "true" : "false";
    } else if (n == "fo:background-color" || n == "style:text-background-color") {
      entry.properties[std::string(style_property::background_color)] = v;
    } else {
      entry.properties[n] = v;
    }
  }
}

}  // namespace

StyleTable extract_office_styles(NodeRef root) {
  StyleTable table;
  std::function<void(NodeRef)> walk = [&](NodeRef n) {
    if (!n.is_element()) return;
    if (n.name() == "style:style") {
      auto name = n.attribute("style:name");
      if (name) {
        StyleEntry entry;
        if (auto p = n.attribute("style:parent-style-name")) entry.parent = std::string(*p);
        if (auto lvl = n.attribute("style:default-outline-level"))
          entry.properties[std::string(style_property::heading_level)] = std::string(*lvl);
        for (auto c : n.children()) {
          if (c.is_element() && c.name().size() >= 10 &&
              std::string_view(c.name()).ends_with("properties")) {
            read_style_properties(c, entry);
          }
        }
        table.set(std::string(*name), std::move(entry));
      }
      return;
    }
    for (auto c : n.children()) walk(c);
  };
  walk(root);
  return table;
}

std::optional<std::string> resolve_style(const Document& doc, NodeRef node,
                                         std::string_view property) {
  if (!node.is_element()) return std::nullopt;
  auto name = node.style_name();
  if (!name) return std::nullopt;
  return doc.styles().resolve(*name, property);
}

namespace {
std::optional<std::string> intrinsic_style(std::string_view element, std::string_view property) {
  if (property == style_property::bold && (element == "b" || element == "strong"))
    return "true";
  if (property == style_property::italic && (element == "i" || element == "em")) return "true";
  if (property == style_property::heading_level && element.size() == 2 && element[0] == 'h' &&
      element[1] >= '1' && element[1] <= '6')
    return std::string(1, element[1]);
  return std::nullopt;
}
}  // namespace

std::optional<std::string> effective_style(NodeRef node, std::string_view property) {
  for (NodeRef n = node.is_element() ? node : node.parent(); n; n = n.parent()) {
    if (auto v = resolve_style(*n.document(), n, property)) return v;
    if (auto v = intrinsic_style(n.name(), property)) return v;
  }
  return std::nullopt;
}

// --- text ----------------------------------------------------------------

namespace {
void append_text(NodeRef node, std::string& out) {
  switch (node.kind()) {
    case NodeKind::text:
    case NodeKind::attribute:
      out += node.value();
      return;
    case NodeKind::element:
      for (auto c : node.children()) append_text(c, out);
      return;
  }
}
}  // namespace

std::string text_of(NodeRef node) {
  std::string out;
  append_text(node, out);
  return out;
}

std::string text_of(std::span<const NodeRef> nodes) {
  std::string out;
  for (auto n : nodes) append_text(n, out);
  return out;
}

bool is_whitespace_only(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return is_space(c); });
}

void sort_document_order(std::vector<NodeRef>& nodes) {
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
}

// --- serialization -------------------------------------------------------

namespace {
void serialize_into(NodeRef node, std::string& out) {
  switch (node.kind()) {
    case NodeKind::text:
      out += escape_xml_text(node.value());
      return;
    case NodeKind::attribute:
      out += escape_xml_text(node.value());
      return;
    case NodeKind::element:
      break;
  }
  out += '<';
  out += node.name();
  for (const auto& [p, u] : node.namespace_decls()) {
    out += p.empty() ? " xmlns=\"" : " xmlns:" + p + "=\"";
    out += escape_xml_attribute(u);
    out += '"';
  }
  for (auto a : node.attributes()) {
    out += ' ';
    out += a.name();
    out += "=\"";
    out += escape_xml_attribute(a.value());
    out += '"';
  }
  if (node.children().empty()) {
    out += "/>";
    return;
  }
  out += '>';
  for (auto c : node.children()) serialize_into(c, out);
  out += "</";
  out += node.name();
  out += '>';
}
}  // namespace

std::string serialize_xml(NodeRef node) {
  std::string out;
  serialize_into(node, out);
  return out;
}

std::uint64_t structural_hash(const Document& doc) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : serialize_xml(doc.root())) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string node_path(NodeRef node) {
  if (!node) return {};
  std::vector<std::string> parts;
  for (NodeRef n = node; n; n = n.parent()) {
    NodeRef p = n.parent();
    if (n.is_attribute()) {
      parts.push_back("@" + n.name());
      continue;
    }
    std::string label = n.is_text() ? "text()" : n.name();
    if (p) {
      int pos = 0, total = 0;
      for (auto s : p.children()) {
        bool same = n.is_text() ? s.is_text() : (s.is_element() && s.name() == n.name());
        if (!same) continue;
        ++total;
        if (s.index() <= n.index()) ++pos;
      }
      if (total > 1) label += "[" + std::to_string(pos) + "]";
    }
    parts.push_back(std::move(label));
  }
  std::string out;
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) out += "/" + *it;
  return out;
}

}  // namespace quarry
