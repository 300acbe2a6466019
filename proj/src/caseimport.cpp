#include "quarry/caseimport.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "quarry/text.hpp"

namespace quarry::caseimport {

namespace {

bool is_list(std::string_view name) {
  return name == "text:list" || name == "text:unordered-list" || name == "text:ordered-list" ||
         name == "ul" || name == "ol";
}

bool is_item(std::string_view name) { return name == "text:list-item" || name == "li"; }

bool is_paragraph(std::string_view name) {
  return name == "text:p" || name == "text:h" || name == "p" || name == "li" ||
         (name.size() == 2 && name[0] == 'h' && name[1] >= '1' && name[1] <= '6');
}

void collect_text(NodeRef n, std::vector<NodeRef>& out, bool skip_lists) {
  if (n.is_text()) {
    out.push_back(n);
    return;
  }
  if (!n.is_element() || (skip_lists && is_list(n.name()))) return;
  for (NodeRef c : n.children()) collect_text(c, out, skip_lists);
}

NodeRef paragraph_of(NodeRef n) {
  for (NodeRef p = n.parent(); p; p = p.parent())
    if (is_paragraph(p.name())) return p;
  return {};
}

std::optional<std::string> color_of(NodeRef text) {
  auto c = effective_style(text, style_property::background_color);
  if (!c) return std::nullopt;
  std::string v = to_lower_ascii(trim(*c));
  if (v.empty() || v == "transparent") return std::nullopt;
  return v;
}

std::vector<ColorRun> color_runs_of(const std::vector<NodeRef>& texts) {
  std::vector<ColorRun> runs;
  bool open = false;
  NodeRef open_para;
  Fragment neutral;
  for (NodeRef t : texts) {
    if (is_whitespace_only(t.value())) {
      if (open) neutral.push_back(t);
      continue;
    }
    auto c = color_of(t);
    NodeRef para = paragraph_of(t);
    if (c && open && runs.back().color == *c && para == open_para) {
      auto& nodes = runs.back().nodes;
      nodes.insert(nodes.end(), neutral.begin(), neutral.end());
      nodes.push_back(t);
    } else if (c) {
      runs.push_back({*c, {t}});
      open = true;
      open_para = para;
    } else {
      open = false;
    }
    neutral.clear();
  }
  return runs;
}

bool only_skipped(NodeRef n, const std::set<NodeRef>& skip) {
  std::vector<NodeRef> texts;
  collect_text(n, texts, false);
  return !texts.empty() &&
         std::all_of(texts.begin(), texts.end(), [&](NodeRef t) { return skip.count(t) > 0; });
}

void clone_without(DocumentBuilder& b, NodeRef n, const std::set<NodeRef>& skip) {
  if (n.is_text()) {
    if (!skip.count(n)) b.add_text(n.value());
    return;
  }
  if (only_skipped(n, skip)) return;
  b.open_element(n.name());
  for (const auto& [p, u] : n.namespace_decls()) b.add_namespace_decl(p, u);
  for (NodeRef a : n.attributes()) b.add_attribute(a.name(), a.value());
  for (NodeRef c : n.children()) clone_without(b, c, skip);
  b.close_element();
}

const std::regex& title_pattern() {
  static const std::regex re(R"(\s*(.*)\s*:)");
  return re;
}

}  // namespace

// --- selectors ---------------------------------------------------------------

SelectorResult heading_run(const Block& block) {
  if (block.nodes.empty()) return SelectorResult::absent();
  NodeRef start = block.start();
  return styled_selector(std::span<const NodeRef>(&start, 1), style_property::bold, "true",
                         RunScope::leading);
}

SelectorResult title(const Block& block) {
  SelectorResult run = heading_run(block);
  if (!run.present()) return run;
  return regexp_selector(title_pattern(), run.nodes);
}

SelectorResult content(const Block& block) {
  SelectorResult run = heading_run(block);
  if (!run.present()) return run;
  std::set<NodeRef> heading(run.nodes.begin(), run.nodes.end());
  NodeRef start = block.start();
  std::vector<NodeRef> texts;
  collect_text(start, texts, false);
  bool rest = std::any_of(texts.begin(), texts.end(), [&](NodeRef t) {
    return !heading.count(t) && !is_whitespace_only(t.value());
  });

  Fragment out;
  DocumentPtr owner;
  if (rest) {
    DocumentBuilder b;
    b.open_element("#fragment");
    clone_without(b, start, heading);
    b.close_element();
    owner = b.finish_raw();
    out.push_back(owner->root().children()[0]);
  }
  out.insert(out.end(), block.nodes.begin() + 1, block.nodes.end());
  return SelectorResult::fragment(std::move(out), std::move(owner));
}

std::vector<ColorRun> color_runs(std::span<const NodeRef> nodes) {
  std::vector<NodeRef> texts;
  for (NodeRef n : nodes) collect_text(n, texts, false);
  return color_runs_of(texts);
}

std::vector<TermEntry> terminology_entries(std::span<const NodeRef> nodes) {
  std::vector<TermEntry> out;
  auto own_entry = [](NodeRef holder) {
    std::vector<NodeRef> texts;
    for (NodeRef c : holder.children()) collect_text(c, texts, true);
    TermEntry e;
    e.text = normalize_space(text_of(texts));
    for (const auto& r : color_runs_of(texts))
      if (std::find(e.colors.begin(), e.colors.end(), r.color) == e.colors.end())
        e.colors.push_back(r.color);
    return e;
  };
  for (NodeRef n : nodes) {
    if (n.is_text()) {
      std::string t = normalize_space(n.value());
      if (!t.empty()) out.push_back({t, {}, {}});
      continue;
    }
    if (!n.is_element()) continue;
    if (is_list(n.name())) {
      for (NodeRef item : n.children()) {
        if (!item.is_element() || !is_item(item.name())) continue;
        TermEntry e = own_entry(item);
        Fragment nested;
        for (NodeRef c : item.children())
          if (c.is_element() && is_list(c.name())) nested.push_back(c);
        e.children = terminology_entries(nested);
        if (e.text.empty()) {
          // An item holding only a sub-list lifts its children.
          for (auto& c : e.children) out.push_back(std::move(c));
        } else {
          out.push_back(std::move(e));
        }
      }
    } else if (is_paragraph(n.name())) {
      TermEntry e = own_entry(n);
      if (!e.text.empty()) out.push_back(std::move(e));
    } else {
      Fragment kids(n.children().begin(), n.children().end());
      for (auto& e : terminology_entries(kids)) out.push_back(std::move(e));
    }
  }
  return out;
}

std::vector<Relation> relate(const CaseState& state) {
  std::vector<Relation> out;
  for (const auto& run : state.section_runs)
    for (const auto& d : state.diagnoses)
      if (d.color == run.color) out.push_back({run.color, run.section, run.text, d.entry});
  return out;
}

// --- selector and action classes --------------------------------------------

namespace {

using NodeId = OutputDocument::NodeId;

NodeId child(OutputDocument& doc, NodeId parent, std::string_view name) {
  NodeId id = doc.last_child_named(parent, name);
  return id == OutputDocument::npos ? doc.add_element(parent, std::string(name)) : id;
}

class TitleSelector final : public Selector {
 public:
  SelectorResult get(const Block& block, ExtractionContext&) const override {
    SelectorResult r = title(block);
    if (!r.present()) throw std::runtime_error("block has no bold heading ending in ':'");
    return r;
  }
  bool cacheable() const override { return true; }
};

class ContentSelector final : public Selector {
 public:
  SelectorResult get(const Block& block, ExtractionContext&) const override {
    SelectorResult r = content(block);
    if (!r.present()) throw std::runtime_error("block has no bold heading");
    return r;
  }
  bool cacheable() const override { return true; }
};

/// Lays out metadata, sections and terminologies so the case reads in a fixed order.
class CaseInitAction final : public Action {
 public:
  unsigned roles() const override { return pre; }
  std::any make_child(const std::any& parent, const Block&, ExtractionContext&) const override {
    const OutputCursor& c = cursor_of(parent);
    OutputDocument& doc = *c.doc;
    child(doc, c.node, "metadata");
    child(doc, c.node, "sections");
    NodeId terms = child(doc, c.node, "terminologies");
    for (const char* kind : {"examinations", "diagnoses", "therapies"}) child(doc, terms, kind);
    return parent;
  }
  void merge_back(std::any& parent, std::any& child_object, const Block&,
                  ExtractionContext&) const override {
    parent = child_object;
  }
};

class SectionStartAction final : public Action {
 public:
  unsigned roles() const override { return pre; }
  std::any make_child(const std::any& parent, const Block& block,
                      ExtractionContext& ctx) const override {
    const OutputCursor& c = cursor_of(parent);
    OutputDocument& doc = *c.doc;
    auto& st = ctx.state<CaseState>();
    NodeId section = doc.add_element(child(doc, c.node, "sections"), "section");
    doc.set_attribute(section, "id", "s" + std::to_string(++st.sections));
    SelectorResult t = title(block);
    if (t.present()) {
      doc.set_attribute(section, "title", normalize_space(t.text()));
    } else {
      ctx.emit(Severity::yellow, "untitled-section", "section heading has no title",
               block.start());
    }
    return OutputCursor{c.doc, section};
  }
};

class SectionEndAction final : public Action {
 public:
  explicit SectionEndAction(std::string exclude) : exclude_(std::move(exclude)) {}
  unsigned roles() const override { return post; }
  void merge_back(std::any&, std::any& child_object, const Block& block,
                  ExtractionContext& ctx) const override {
    const OutputCursor& c = cursor_of(child_object);
    std::string id(c.doc->attribute(c.node, "id").value_or(""));
    std::string t(c.doc->attribute(c.node, "title").value_or(""));
    if (t == exclude_) return;
    auto& st = ctx.state<CaseState>();
    SelectorResult body = content(block);
    for (const auto& run : color_runs(body.present() ? body.nodes : block.nodes))
      st.section_runs.push_back({id, run.color, normalize_space(text_of(run.nodes))});
  }

 private:
  std::string exclude_;
};

class TerminologyAction final : public Action {
 public:
  explicit TerminologyAction(std::string kind) : kind_(std::move(kind)) {
    if (kind_ == "examinations") {
      prefix_ = "x";
    } else if (kind_ == "diagnoses") {
      prefix_ = "d";
    } else if (kind_ == "therapies") {
      prefix_ = "t";
    } else {
      throw ConfigError("case-terminology: kind must be examinations, diagnoses or therapies");
    }
  }

  void perform(const Block& block, std::any& user_object, ExtractionContext& ctx) const override {
    const OutputCursor& c = cursor_of(user_object);
    OutputDocument& doc = *c.doc;
    NodeId list = child(doc, child(doc, doc.root(), "terminologies"), kind_);
    SelectorResult body = content(block);
    auto entries = body.present() ? terminology_entries(body.nodes) : std::vector<TermEntry>{};
    if (entries.empty()) {
      ctx.emit(Severity::yellow, "empty-terminology", "no " + kind_ + " found under the heading",
               block.start());
      return;
    }
    auto& known = ctx.state<Terms>().by_kind[kind_];
    for (const auto& e : entries) insert(doc, list, e, known, ctx);
  }

 private:
  struct Terms {
    std::map<std::string, std::map<std::string, std::pair<std::string, NodeId>>> by_kind;
  };

  void insert(OutputDocument& doc, NodeId parent, const TermEntry& e,
              std::map<std::string, std::pair<std::string, NodeId>>& known,
              ExtractionContext& ctx) const {
    auto it = known.find(e.text);
    if (it == known.end()) {
      NodeId el = doc.add_element(parent, "entry");
      std::string id = prefix_ + std::to_string(known.size() + 1);
      doc.set_attribute(el, "id", id);
      doc.set_attribute(el, "name", e.text);
      it = known.emplace(e.text, std::make_pair(id, el)).first;
    }
    if (kind_ == "diagnoses") {
      auto& marks = ctx.state<CaseState>().diagnoses;
      for (const auto& color : e.colors) {
        CaseState::Marked m{it->second.first, color};
        bool dup = std::any_of(marks.begin(), marks.end(), [&](const CaseState::Marked& x) {
          return x.entry == m.entry && x.color == m.color;
        });
        if (!dup) marks.push_back(std::move(m));
      }
    }
    for (const auto& c : e.children) insert(doc, it->second.second, c, known, ctx);
  }

  std::string kind_;
  std::string prefix_;
};

class ImageAction final : public Action {
 public:
  void perform(const Block& block, std::any& user_object, ExtractionContext& ctx) const override {
    const OutputCursor& c = cursor_of(user_object);
    for (NodeRef n : block.nodes) visit(n, c, ctx);
  }

 private:
  void visit(NodeRef n, const OutputCursor& c, ExtractionContext& ctx) const {
    if (!n.is_element()) return;
    if (n.name() == "draw:image" || n.name() == "img") extract(n, c, ctx);
    for (NodeRef k : n.children()) visit(k, c, ctx);
  }

  void extract(NodeRef img, const OutputCursor& c, ExtractionContext& ctx) const {
    std::string href(img.attribute("xlink:href").value_or(img.attribute("src").value_or("")));
    if (href.starts_with("#")) href.erase(0, 1);
    const auto& res = ctx.document->resources();
    auto it = res.find(href);
    if (href.empty() || it == res.end()) {
      ctx.emit(Severity::red, "missing-resource",
               "image refers to '" + href + "', which the document does not contain", img);
      return;
    }
    std::string ext = std::filesystem::path(href).extension().string();
    ext = ext.empty() ? ".bin" : to_lower_ascii(ext);
    std::string file = "media/" + sha256_hex(it->second).substr(0, 16) + ext;

    auto& written = ctx.state<CaseState>().images_written;
    if (!written.count(file) && !ctx.config().output_dir.empty()) {
      auto path = ctx.config().output_dir / file;
      std::filesystem::create_directories(path.parent_path());
      if (!std::filesystem::exists(path)) {
        std::ofstream out(path, std::ios::binary);
        out.write(it->second.data(), static_cast<std::streamsize>(it->second.size()));
        if (!out) throw std::runtime_error("cannot write " + path.string());
      }
    }
    ++written[file];

    std::string alt(img.attribute("draw:name").value_or(img.attribute("alt").value_or("")));
    NodeId el = c.doc->add_element(c.node, "image");
    c.doc->set_attribute(el, "file", file);
    c.doc->set_attribute(el, "alt", alt);
    c.doc->set_attribute(el, "source", href);
  }
};

class RelationAction final : public Action {
 public:
  unsigned roles() const override { return post; }
  void merge_back(std::any& parent, std::any&, const Block&, ExtractionContext& ctx) const override {
    const OutputCursor& c = cursor_of(parent);
    OutputDocument& doc = *c.doc;
    const auto& st = ctx.state<CaseState>();
    NodeId rels = child(doc, c.node, "relations");
    for (const auto& r : relate(st)) {
      NodeId el = doc.add_element(rels, "relation");
      doc.set_attribute(el, "color", r.color);
      doc.set_attribute(el, "section", r.section);
      doc.set_attribute(el, "observation", r.observation);
      doc.set_attribute(el, "diagnosis", r.diagnosis);
    }
    std::set<std::string> in_sections, in_diagnoses;
    for (const auto& r : st.section_runs) in_sections.insert(r.color);
    for (const auto& d : st.diagnoses) in_diagnoses.insert(d.color);
    for (const auto& color : in_sections)
      if (!in_diagnoses.count(color))
        ctx.emit(Severity::yellow, "dangling-color",
                 "color " + color + " marks findings but no diagnosis");
    for (const auto& color : in_diagnoses)
      if (!in_sections.count(color))
        ctx.emit(Severity::yellow, "dangling-color",
                 "color " + color + " marks a diagnosis but no finding");
  }
};

void no_source(const std::optional<SelectorSpec>& source, std::string_view owner) {
  if (source) throw ConfigError(std::string(owner) + " takes no <Source>");
}

}  // namespace

Registry& register_caseimport(Registry& r) {
  r.add_selector({"case-title", "de.d3web.caseParser.selectors.TitleSelector"},
                 [](const Params& p) {
                   check_param_keys(p, {}, "case-title");
                   return std::make_shared<const TitleSelector>();
                 });
  r.add_selector({"case-content", "de.d3web.caseParser.selectors.ContentSelector"},
                 [](const Params& p) {
                   check_param_keys(p, {}, "case-content");
                   return std::make_shared<const ContentSelector>();
                 });
  r.add_action({"case-init"}, [](const Params& p, const std::optional<SelectorSpec>& s) {
    check_param_keys(p, {}, "case-init");
    no_source(s, "case-init");
    return std::make_shared<const CaseInitAction>();
  });
  r.add_action({"case-section", "de.d3web.caseParser.actions.examinations.StartCaseParagraph"},
               [](const Params& p, const std::optional<SelectorSpec>& s) {
                 check_param_keys(p, {}, "case-section");
                 no_source(s, "case-section");
                 return std::make_shared<const SectionStartAction>();
               });
  r.add_action({"case-section-end", "de.d3web.caseParser.actions.examinations.EndCaseParagraph"},
               [](const Params& p, const std::optional<SelectorSpec>& s) {
                 check_param_keys(p, {"exclude"}, "case-section-end");
                 no_source(s, "case-section-end");
                 auto it = p.find("exclude");
                 return std::make_shared<const SectionEndAction>(it == p.end() ? "Diagnosen"
                                                                               : it->second);
               });
  r.add_action({"case-terminology"}, [](const Params& p, const std::optional<SelectorSpec>& s) {
    check_param_keys(p, {"kind"}, "case-terminology");
    no_source(s, "case-terminology");
    return std::make_shared<const TerminologyAction>(require_param(p, "kind", "case-terminology"));
  });
  r.add_action({"case-images", "de.d3web.caseParser.actions.ImageExtraction"},
               [](const Params& p, const std::optional<SelectorSpec>& s) {
                 check_param_keys(p, {}, "case-images");
                 no_source(s, "case-images");
                 return std::make_shared<const ImageAction>();
               });
  r.add_action({"case-relations"}, [](const Params& p, const std::optional<SelectorSpec>& s) {
    check_param_keys(p, {}, "case-relations");
    no_source(s, "case-relations");
    return std::make_shared<const RelationAction>();
  });
  return r;
}

}  // namespace quarry::caseimport
