#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace quarry {

class Document;
using DocumentPtr = std::shared_ptr<const Document>;

enum class NodeKind : std::uint8_t { element, text, attribute };

/// Raised when input bytes cannot be turned into a document tree.
class LoadError : public std::runtime_error {
 public:
  explicit LoadError(const std::string& what, long line = 0, long column = 0);
  long line() const noexcept { return line_; }
  long column() const noexcept { return column_; }

 private:
  long line_;
  long column_;
};

class NodeRange;

/// Handle to a node of an immutable Document. Cheap to copy; two handles
/// compare equal iff they name the same node of the same document.
/// Ordering between handles of one document is document order.
class NodeRef {
 public:
  NodeRef() = default;
  NodeRef(const Document* document, std::uint32_t index) : doc_(document), index_(index) {}

  bool valid() const noexcept { return doc_ != nullptr; }
  explicit operator bool() const noexcept { return valid(); }

  const Document* document() const noexcept { return doc_; }
  std::uint32_t index() const noexcept { return index_; }

  NodeKind kind() const;
  bool is_element() const { return kind() == NodeKind::element; }
  bool is_text() const { return kind() == NodeKind::text; }
  bool is_attribute() const { return kind() == NodeKind::attribute; }

  /// Qualified name as written (elements, attributes); empty for text.
  const std::string& name() const;
  /// Character data of a text node or the value of an attribute.
  const std::string& value() const;

  NodeRef parent() const;
  NodeRange children() const;
  NodeRange attributes() const;
  std::optional<std::string_view> attribute(std::string_view name) const;
  /// Namespace declarations written on this element, as (prefix, uri).
  const std::vector<std::pair<std::string, std::string>>& namespace_decls() const;
  std::optional<std::string_view> style_name() const;

  /// True when `other` lies in this node's subtree (inclusive).
  bool contains(NodeRef other) const;
  /// Index one past the last node of this subtree.
  std::uint32_t subtree_end() const;

  NodeRef next_sibling() const;

  friend bool operator==(const NodeRef& a, const NodeRef& b) noexcept {
    return a.doc_ == b.doc_ && a.index_ == b.index_;
  }
  friend std::strong_ordering operator<=>(const NodeRef& a, const NodeRef& b) noexcept;

 private:
  const Document* doc_ = nullptr;
  std::uint32_t index_ = 0;
};

class NodeRange {
 public:
  class iterator {
   public:
    using value_type = NodeRef;
    using difference_type = std::ptrdiff_t;
    iterator() = default;
    iterator(const Document* d, const std::uint32_t* p) : doc_(d), p_(p) {}
    NodeRef operator*() const { return NodeRef(doc_, *p_); }
    iterator& operator++() {
      ++p_;
      return *this;
    }
    iterator operator++(int) {
      auto t = *this;
      ++p_;
      return t;
    }
    bool operator==(const iterator& o) const { return p_ == o.p_; }

   private:
    const Document* doc_ = nullptr;
    const std::uint32_t* p_ = nullptr;
  };

  NodeRange() = default;
  NodeRange(const Document* d, std::span<const std::uint32_t> ids) : doc_(d), ids_(ids) {}
  iterator begin() const { return {doc_, ids_.data()}; }
  iterator end() const { return {doc_, ids_.data() + ids_.size()}; }
  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  NodeRef operator[](std::size_t i) const { return NodeRef(doc_, ids_[i]); }

 private:
  const Document* doc_ = nullptr;
  std::span<const std::uint32_t> ids_;
};

/// An ordered node collection: siblings of one tree or a synthetic collection.
using Fragment = std::vector<NodeRef>;

namespace style_property {
inline constexpr std::string_view bold = "bold";
inline constexpr std::string_view italic = "italic";
inline constexpr std::string_view background_color = "background-color";
inline constexpr std::string_view heading_level = "heading-level";
}  // namespace style_property

struct StyleEntry {
  std::optional<std::string> parent;
  std::map<std::string, std::string, std::less<>> properties;
};

/// Named styles with single inheritance through parent names.
class StyleTable {
 public:
  void set(std::string name, StyleEntry entry) { entries_[std::move(name)] = std::move(entry); }
  const StyleEntry* find(std::string_view name) const;
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  const std::map<std::string, StyleEntry, std::less<>>& entries() const { return entries_; }

  /// Walks the parent chain starting at `name`. Terminates on revisits even
  /// if a cycle slipped through.
  std::optional<std::string> resolve(std::string_view name, std::string_view property) const;

  /// Cuts every parent link that closes a cycle; returns one message per cut.
  std::vector<std::string> break_cycles();

  /// Inserts entries of `other` whose names are not yet present.
  void merge_missing(const StyleTable& other);

 private:
  std::map<std::string, StyleEntry, std::less<>> entries_;
};

/// Immutable parsed document. Always handled through DocumentPtr so node
/// handles stay valid for as long as any owner lives.
class Document {
 public:
  Document(const Document&) = delete;
  Document& operator=(const Document&) = delete;

  NodeRef root() const { return NodeRef(this, 0); }
  std::size_t size() const { return nodes_.size(); }

  /// Prefix to URI, first declaration in document order wins.
  const std::map<std::string, std::string>& namespaces() const { return namespaces_; }
  const StyleTable& styles() const { return styles_; }
  /// Embedded files by container entry name.
  const std::map<std::string, std::string>& resources() const { return resources_; }
  /// Non-fatal problems noticed while loading (style cycles and the like).
  const std::vector<std::string>& load_warnings() const { return warnings_; }

 private:
  friend class NodeRef;
  friend class DocumentBuilder;
  Document() = default;

  struct NodeData {
    NodeKind kind = NodeKind::element;
    std::string name;
    std::string value;
    std::uint32_t parent = kNone;
    std::uint32_t end = 0;
    std::vector<std::uint32_t> children;
    std::vector<std::uint32_t> attributes;
    std::vector<std::pair<std::string, std::string>> ns_decls;
    std::optional<std::string> style_name;
  };
  static constexpr std::uint32_t kNone = 0xffffffffu;

  std::vector<NodeData> nodes_;
  std::map<std::string, std::string> namespaces_;
  StyleTable styles_;
  std::map<std::string, std::string> resources_;
  std::vector<std::string> warnings_;
};

/// Builds a Document in document order: open/close elements, add
/// attributes right after opening, add text anywhere inside an element.
class DocumentBuilder {
 public:
  DocumentBuilder();
  std::uint32_t open_element(std::string name);
  void add_attribute(std::string name, std::string value);
  void add_namespace_decl(std::string prefix, std::string uri);
  std::uint32_t add_text(std::string text);
  void close_element();
  std::size_t depth() const { return open_.size(); }

  void set_styles(StyleTable styles) { doc_->styles_ = std::move(styles); }
  void set_resources(std::map<std::string, std::string> r) { doc_->resources_ = std::move(r); }
  void add_warning(std::string w) { doc_->warnings_.push_back(std::move(w)); }

  /// Extracts office styles found in the tree, then seals the document.
  DocumentPtr finish();
  /// Seals without touching styles.
  DocumentPtr finish_raw();

 private:
  std::shared_ptr<Document> doc_;
  std::vector<std::uint32_t> open_;
  bool attributes_open_ = false;
};

/// Deep-copies `node` (and its subtree) into `builder` at the current position.
void copy_subtree(DocumentBuilder& builder, NodeRef node);

// --- loaders -------------------------------------------------------------

enum class InputFormat { automatic, xml, container };

DocumentPtr load_xml(std::string_view bytes);
DocumentPtr load_office_container(std::string_view bytes);
/// Magic-byte detection: "PK" selects the container loader, a leading "<"
/// (after an optional BOM and whitespace) selects the XML loader.
InputFormat detect_format(std::string_view bytes);
DocumentPtr load_document(std::string_view bytes, InputFormat format = InputFormat::automatic);

/// Reads style:style definitions from an office tree into a table.
StyleTable extract_office_styles(NodeRef root);

// --- queries -------------------------------------------------------------

/// Style property defined on the node's own style name or its masters.
std::optional<std::string> resolve_style(const Document& doc, NodeRef node, std::string_view property);

/// Formatting in effect for a node: the innermost enclosing element that
/// defines `property` (through its style or intrinsically, e.g. <b>) wins.
std::optional<std::string> effective_style(NodeRef node, std::string_view property);

std::string text_of(NodeRef node);
std::string text_of(std::span<const NodeRef> nodes);

bool is_whitespace_only(std::string_view s);

/// Orders and deduplicates nodes of one document.
void sort_document_order(std::vector<NodeRef>& nodes);

/// Serializes a subtree back to XML (no declaration, no indentation).
std::string serialize_xml(NodeRef node);
/// FNV-1a over the serialized tree; changes iff structure or content does.
std::uint64_t structural_hash(const Document& doc);

/// A readable location such as /office:document-content/office:body/text:p[3].
std::string node_path(NodeRef node);

}  // namespace quarry
