#include "quarry/selectors.hpp"

#include <algorithm>

#include "quarry/text.hpp"

namespace quarry {

void check_param_keys(const Params& params, std::initializer_list<std::string_view> allowed,
                      std::string_view owner) {
  for (const auto& [key, _] : params) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(std::string(owner) + ": unknown parameter '" + key + "'");
    }
  }
}

const std::string& require_param(const Params& params, std::string_view key,
                                 std::string_view owner) {
  auto it = params.find(key);
  if (it == params.end())
    throw ConfigError(std::string(owner) + ": missing parameter '" + std::string(key) + "'");
  return it->second;
}

std::regex compile_regex(const std::string& pattern) {
  try {
    return std::regex(pattern, std::regex::ECMAScript);
  } catch (const std::regex_error& e) {
    throw ConfigError("invalid regular expression '" + pattern + "': " + e.what());
  }
}

SelectorResult cached_select(const SelectorSpec& spec, const Block& block,
                             ExtractionContext& ctx) {
  ExtractionContext::CacheKey key{spec.impl.get(), block.start(),
                                  block.nodes.empty() ? NodeRef{} : block.nodes.back(),
                                  block.nodes.size()};
  auto& cache = ctx.selector_cache();
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  SelectorResult result;
  try {
    result = spec.impl->get(block, ctx);
  } catch (const std::exception& e) {
    ctx.emit(Severity::yellow, "selector-failed", spec.name + ": " + e.what(), block.start());
    result = SelectorResult::absent();
  }
  cache.emplace(key, result);
  return result;
}

SelectorResult select(const SelectorSpec& spec, const Block& block, ExtractionContext& ctx) {
  if (!spec.impl) return SelectorResult::absent();
  if (spec.impl->cacheable()) return cached_select(spec, block, ctx);
  try {
    return spec.impl->get(block, ctx);
  } catch (const std::exception& e) {
    ctx.emit(Severity::yellow, "selector-failed", spec.name + ": " + e.what(), block.start());
    return SelectorResult::absent();
  }
}

// --- identity / position / start ------------------------------------------

SelectorResult identity_selector(const Block& block) {
  return SelectorResult::fragment(block.nodes);
}

SelectorResult position_selector(const Block& block) {
  DocumentBuilder b;
  b.open_element("#fragment");
  auto id = b.add_text(std::to_string(block.ordinal));
  b.close_element();
  DocumentPtr doc = b.finish_raw();
  return SelectorResult::node(NodeRef(doc.get(), id), doc);
}

SelectorResult xpath_selector(const PathExpr& expr, const Block& block) {
  auto hits = eval(expr, block.nodes);
  if (hits.empty()) return SelectorResult::absent();
  return SelectorResult::node(hits.front());
}

// --- regexp ----------------------------------------------------------------

namespace {

struct Segment {
  NodeRef node;
  NodeRef block_node;
  std::size_t begin;
  std::size_t end;
};

void collect_segments(NodeRef n, NodeRef block_node, std::string& text,
                      std::vector<Segment>& segs) {
  if (n.is_text() || n.is_attribute()) {
    segs.push_back({n, block_node, text.size(), text.size() + n.value().size()});
    text += n.value();
    return;
  }
  for (auto c : n.children()) collect_segments(c, block_node, text, segs);
}

class SpanCloner {
 public:
  SpanCloner(std::vector<Segment> hit, std::size_t begin, std::size_t end)
      : hit_(std::move(hit)), begin_(begin), end_(end) {}

  void clone(DocumentBuilder& b, NodeRef n) const {
    if (n.is_text() || n.is_attribute()) {
      const Segment* s = find(n);
      std::size_t from = std::max(s->begin, begin_);
      std::size_t to = std::min(s->end, end_);
      b.add_text(n.value().substr(from - s->begin, to - from));
      return;
    }
    b.open_element(n.name());
    for (const auto& [p, u] : n.namespace_decls()) b.add_namespace_decl(p, u);
    for (auto a : n.attributes()) b.add_attribute(a.name(), a.value());
    for (auto c : n.children())
      if (touches(c)) clone(b, c);
    b.close_element();
  }

 private:
  const Segment* find(NodeRef n) const {
    auto it = std::find_if(hit_.begin(), hit_.end(), [&](const Segment& s) { return s.node == n; });
    return &*it;
  }
  bool touches(NodeRef n) const {
    return std::any_of(hit_.begin(), hit_.end(),
                       [&](const Segment& s) { return n.contains(s.node); });
  }

  std::vector<Segment> hit_;
  std::size_t begin_;
  std::size_t end_;
};

}  // namespace

SelectorResult regexp_selector(const std::regex& pattern, std::span<const NodeRef> nodes) {
  std::string text;
  std::vector<Segment> segs;
  for (auto n : nodes) collect_segments(n, n, text, segs);

  std::smatch m;
  if (!std::regex_search(text, m, pattern)) return SelectorResult::absent();
  std::size_t group = (m.size() > 1 && m[1].matched) ? 1 : 0;
  std::size_t begin = static_cast<std::size_t>(m.position(group));
  std::size_t end = begin + static_cast<std::size_t>(m.length(group));

  DocumentBuilder b;
  b.open_element("#fragment");
  if (begin == end) {
    b.add_text("");
  } else {
    std::vector<Segment> hit;
    for (const auto& s : segs)
      if (s.begin < end && s.end > begin) hit.push_back(s);
    SpanCloner cloner(hit, begin, end);
    std::vector<NodeRef> roots;
    for (const auto& s : hit)
      if (roots.empty() || roots.back() != s.block_node) roots.push_back(s.block_node);
    if (roots.size() == 1) {
      // Clone from the nearest common ancestor of the touched text.
      NodeRef top = hit.front().node;
      while (top != roots.front() && !top.contains(hit.back().node)) top = top.parent();
      cloner.clone(b, top);
    } else {
      for (auto r : roots) cloner.clone(b, r);
    }
  }
  b.close_element();
  DocumentPtr doc = b.finish_raw();
  Fragment out;
  for (auto c : doc->root().children()) out.push_back(c);
  return SelectorResult::fragment(std::move(out), doc);
}

// --- styled ----------------------------------------------------------------

namespace {

bool style_matches(NodeRef text, std::string_view property, std::string_view value) {
  auto v = effective_style(text, property);
  if (!v && (property == style_property::bold || property == style_property::italic))
    v = "false";
  return v && iequals_ascii(*v, value);
}

void collect_text_nodes(NodeRef n, std::vector<NodeRef>& out) {
  if (n.is_text()) {
    out.push_back(n);
    return;
  }
  if (n.is_element())
    for (auto c : n.children()) collect_text_nodes(c, out);
}

std::vector<Fragment> runs_impl(std::span<const NodeRef> nodes, std::string_view property,
                                std::string_view value, bool& first_is_leading) {
  std::vector<NodeRef> texts;
  for (auto n : nodes) collect_text_nodes(n, texts);
  std::vector<Fragment> runs;
  Fragment current, neutral;
  bool seen_content = false;
  first_is_leading = false;
  for (auto t : texts) {
    if (is_whitespace_only(t.value())) {
      if (!current.empty()) neutral.push_back(t);
      continue;
    }
    bool match = style_matches(t, property, value);
    if (!seen_content) first_is_leading = match;
    seen_content = true;
    if (match) {
      current.insert(current.end(), neutral.begin(), neutral.end());
      current.push_back(t);
    } else if (!current.empty()) {
      runs.push_back(std::move(current));
      current.clear();
    }
    neutral.clear();
  }
  if (!current.empty()) runs.push_back(std::move(current));
  return runs;
}

}  // namespace

std::vector<Fragment> styled_runs(std::span<const NodeRef> nodes, std::string_view property,
                                  std::string_view value) {
  bool leading = false;
  return runs_impl(nodes, property, value, leading);
}

SelectorResult styled_selector(std::span<const NodeRef> nodes, std::string_view property,
                               std::string_view value, RunScope scope) {
  bool leading = false;
  auto runs = runs_impl(nodes, property, value, leading);
  if (runs.empty()) return SelectorResult::absent();
  switch (scope) {
    case RunScope::leading:
      if (!leading) return SelectorResult::absent();
      [[fallthrough]];
    case RunScope::first:
      return SelectorResult::fragment(std::move(runs.front()));
    case RunScope::all: {
      Fragment all;
      for (auto& r : runs) all.insert(all.end(), r.begin(), r.end());
      return SelectorResult::fragment(std::move(all));
    }
  }
  return SelectorResult::absent();
}

// --- selector objects --------------------------------------------------------

namespace {

class IdentitySelector final : public Selector {
 public:
  SelectorResult get(const Block& block, ExtractionContext&) const override {
    return identity_selector(block);
  }
  bool cacheable() const override { return true; }
};

class PositionSelector final : public Selector {
 public:
  SelectorResult get(const Block& block, ExtractionContext&) const override {
    return position_selector(block);
  }
};

class StartNodeSelector final : public Selector {
 public:
  SelectorResult get(const Block& block, ExtractionContext&) const override {
    if (block.nodes.empty()) return SelectorResult::absent();
    return SelectorResult::node(block.start());
  }
  bool cacheable() const override { return true; }
};

class XPathSelector final : public Selector {
 public:
  explicit XPathSelector(PathExpr expr) : expr_(std::move(expr)) {}
  SelectorResult get(const Block& block, ExtractionContext&) const override {
    return xpath_selector(expr_, block);
  }
  bool cacheable() const override { return true; }

 private:
  PathExpr expr_;
};

class RegexpSelector final : public Selector {
 public:
  explicit RegexpSelector(std::regex re) : re_(std::move(re)) {}
  SelectorResult get(const Block& block, ExtractionContext&) const override {
    return regexp_selector(re_, block.nodes);
  }
  bool cacheable() const override { return true; }

 private:
  std::regex re_;
};

class StyledSelector final : public Selector {
 public:
  StyledSelector(std::string property, std::string value, RunScope scope)
      : property_(std::move(property)), value_(std::move(value)), scope_(scope) {}
  SelectorResult get(const Block& block, ExtractionContext&) const override {
    return styled_selector(block.nodes, property_, value_, scope_);
  }
  bool cacheable() const override { return true; }

 private:
  std::string property_;
  std::string value_;
  RunScope scope_;
};

}  // namespace

std::shared_ptr<const Selector> make_identity_selector(const Params& params) {
  check_param_keys(params, {}, "identity selector");
  return std::make_shared<IdentitySelector>();
}

std::shared_ptr<const Selector> make_position_selector(const Params& params) {
  check_param_keys(params, {}, "position selector");
  return std::make_shared<PositionSelector>();
}

std::shared_ptr<const Selector> make_start_node_selector(const Params& params) {
  check_param_keys(params, {}, "start selector");
  return std::make_shared<StartNodeSelector>();
}

std::shared_ptr<const Selector> make_xpath_selector(const Params& params) {
  check_param_keys(params, {"xpath"}, "xpath selector");
  try {
    return std::make_shared<XPathSelector>(parse_path(require_param(params, "xpath", "xpath selector")));
  } catch (const PathError& e) {
    throw ConfigError(std::string("xpath selector: ") + e.what());
  }
}

std::shared_ptr<const Selector> make_regexp_selector(const Params& params) {
  check_param_keys(params, {"regexp"}, "regexp selector");
  return std::make_shared<RegexpSelector>(
      compile_regex(require_param(params, "regexp", "regexp selector")));
}

std::shared_ptr<const Selector> make_styled_selector(const Params& params) {
  check_param_keys(params, {"property", "value", "scope"}, "styled selector");
  RunScope scope = RunScope::all;
  if (auto it = params.find("scope"); it != params.end()) {
    if (it->second == "all") {
      scope = RunScope::all;
    } else if (it->second == "first") {
      scope = RunScope::first;
    } else if (it->second == "leading") {
      scope = RunScope::leading;
    } else {
      throw ConfigError("styled selector: scope must be all, first or leading");
    }
  }
  return std::make_shared<StyledSelector>(require_param(params, "property", "styled selector"),
                                          require_param(params, "value", "styled selector"),
                                          scope);
}

SelectorSpec identity_spec() {
  static const auto impl = make_identity_selector();
  return {"identity", {}, impl};
}

}  // namespace quarry
