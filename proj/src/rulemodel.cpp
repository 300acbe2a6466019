#include "quarry/rulemodel.hpp"

#include <set>
#include <sstream>

#include "quarry/text.hpp"
#include "rule_xml.hpp"

namespace quarry {

// --- Action defaults ---------------------------------------------------------

void Action::perform(const Block&, std::any&, ExtractionContext&) const {
  throw std::logic_error("action cannot be used as a rule action");
}

std::any Action::make_child(const std::any& parent, const Block&, ExtractionContext&) const {
  return parent;
}

void Action::merge_back(std::any&, std::any&, const Block&, ExtractionContext&) const {}

// --- Registry ----------------------------------------------------------------

void Registry::add_selector(std::initializer_list<std::string_view> names,
                            SelectorFactory factory) {
  for (auto n : names) {
    if (!selectors_.emplace(std::string(n), factory).second)
      throw std::logic_error("selector '" + std::string(n) + "' registered twice");
  }
}

void Registry::add_action(std::initializer_list<std::string_view> names, ActionFactory factory) {
  for (auto n : names) {
    if (!actions_.emplace(std::string(n), factory).second)
      throw std::logic_error("action '" + std::string(n) + "' registered twice");
  }
}

const SelectorFactory* Registry::find_selector(std::string_view name) const {
  auto it = selectors_.find(name);
  return it == selectors_.end() ? nullptr : &it->second;
}

const ActionFactory* Registry::find_action(std::string_view name) const {
  auto it = actions_.find(name);
  return it == actions_.end() ? nullptr : &it->second;
}

SelectorSpec Registry::make_selector(std::string_view name, const Params& params) const {
  const SelectorFactory* f = find_selector(name);
  if (!f) throw ConfigError("unknown selector '" + std::string(name) + "'");
  auto impl = (*f)(params);
  return {std::string(name), params, std::move(impl)};
}

ActionSpec Registry::make_action(std::string_view name, const Params& params,
                                 std::optional<SelectorSpec> source) const {
  const ActionFactory* f = find_action(name);
  if (!f) throw ConfigError("unknown action '" + std::string(name) + "'");
  auto impl = (*f)(params, source);
  return {std::string(name), params, std::move(source), std::move(impl)};
}

// --- misc --------------------------------------------------------------------

std::string_view to_string(GroupingKind k) {
  switch (k) {
    case GroupingKind::none: return "NONE";
    case GroupingKind::grouping_expression: return "GROUPING_EXPRESSION";
    case GroupingKind::end_expression: return "END_EXPRESSION";
    case GroupingKind::next_block: return "NEXT_BLOCK";
  }
  return "?";
}

RuleSetError::RuleSetError(std::string location, const std::string& message, long line,
                           long column)
    : std::runtime_error((location.empty() ? "" : location + ": ") + message +
                         (line > 0 ? " (line " + std::to_string(line) + ", column " +
                                         std::to_string(column) + ")"
                                   : "")),
      location_(std::move(location)),
      line_(line) {}

Params parse_params(std::string_view s) {
  Params out;
  if (trim(s).empty()) return out;
  for (auto piece : split(s, ';')) {
    if (trim(piece).empty()) continue;
    auto eq = piece.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("parameter '" + std::string(piece) + "' has no '='");
    std::string key(trim(piece.substr(0, eq)));
    if (key.empty()) throw ConfigError("parameter '" + std::string(piece) + "' has an empty key");
    out[key] = std::string(piece.substr(eq + 1));
  }
  return out;
}

// --- loader ------------------------------------------------------------------

namespace {

using detail::RuleXmlElement;

class Loader {
 public:
  Loader(const Registry& registry, std::vector<std::string>& warnings)
      : reg_(registry), warnings_(warnings) {}

  std::shared_ptr<RuleSet> ruleset(const RuleXmlElement& e, bool top) {
    if (e.name != "RuleSet") fail(e, "expected <RuleSet>, found <" + e.name + ">");
    auto rs = std::make_shared<RuleSet>();
    rs->id = required(e, "ID");
    Scope scope(*this, "RuleSet '" + rs->id + "'");

    for (const auto& [k, v] : e.attributes) {
      if (k == "ID" || k == "pre" || k == "post" || k == "preParameters" ||
          k == "postParameters" || k == "xmlns" || k.starts_with("xmlns:") ||
          k.starts_with("xsi:"))
        continue;
      if (k == "outputRoot") {
        if (!top) warn(e, "outputRoot is only honoured on the top-level rule set");
        rs->output_root = v;
        continue;
      }
      warn(e, "unknown attribute '" + k + "' ignored");
    }
    if (auto* pre = e.attribute("pre"))
      rs->pre = hook(e, *pre, e.attribute("preParameters"), Action::pre, "pre");
    if (auto* post = e.attribute("post"))
      rs->post = hook(e, *post, e.attribute("postParameters"), Action::post, "post");
    stray_text(e);

    std::set<std::string> ids;
    for (const auto& c : e.children) {
      if (c.name != "Block") {
        warn(c, "unknown element <" + c.name + "> ignored");
        continue;
      }
      BlockType bt = block(c);
      if (!ids.insert(bt.id).second) fail(c, "duplicate block ID '" + bt.id + "'");
      rs->block_types.push_back(std::move(bt));
    }
    return rs;
  }

 private:
  struct Scope {
    Scope(Loader& l, std::string label) : l_(l) { l_.path_.push_back(std::move(label)); }
    ~Scope() { l_.path_.pop_back(); }
    Loader& l_;
  };

  std::string location() const {
    std::string out;
    for (const auto& p : path_) out += (out.empty() ? "" : " / ") + p;
    return out;
  }

  [[noreturn]] void fail(const RuleXmlElement& at, const std::string& msg) const {
    throw RuleSetError(location(), msg, at.line, at.column);
  }

  void warn(const RuleXmlElement& at, const std::string& msg) {
    warnings_.push_back(location() + ": " + msg + " (line " + std::to_string(at.line) + ")");
  }

  void stray_text(const RuleXmlElement& e) {
    if (!trim(e.text).empty()) warn(e, "text content in <" + e.name + "> ignored");
  }

  std::string required(const RuleXmlElement& e, std::string_view attr) const {
    auto* v = e.attribute(attr);
    if (!v || trim(*v).empty())
      fail(e, "<" + e.name + "> requires attribute '" + std::string(attr) + "'");
    return *v;
  }

  Params params_of(const RuleXmlElement& e, const std::string* raw) const {
    if (!raw) return {};
    try {
      return parse_params(*raw);
    } catch (const ConfigError& err) {
      fail(e, err.what());
    }
  }

  std::vector<const RuleXmlElement*> children_named(const RuleXmlElement& e,
                                                    std::string_view name, std::size_t max) {
    std::vector<const RuleXmlElement*> out;
    for (const auto& c : e.children)
      if (c.name == name) out.push_back(&c);
    if (out.size() > max)
      fail(*out[max], "<" + e.name + "> allows at most " + std::to_string(max) + " <" +
                          std::string(name) + ">");
    return out;
  }

  void only_children(const RuleXmlElement& e, std::initializer_list<std::string_view> names) {
    for (const auto& c : e.children) {
      if (std::find(names.begin(), names.end(), c.name) == names.end())
        warn(c, "unexpected element <" + c.name + "> inside <" + e.name + "> ignored");
    }
  }

  ActionSpec hook(const RuleXmlElement& e, const std::string& name, const std::string* raw,
                  Action::Role role, const char* what) {
    ActionSpec spec = action_spec(e, name, params_of(e, raw), std::nullopt);
    if (!(spec.impl->roles() & role))
      fail(e, "action '" + name + "' cannot serve as a " + what + "-action");
    return spec;
  }

  ActionSpec action_spec(const RuleXmlElement& e, const std::string& name, const Params& params,
                         std::optional<SelectorSpec> source) {
    try {
      return reg_.make_action(name, params, std::move(source));
    } catch (const ConfigError& err) {
      fail(e, err.what());
    } catch (const PathError& err) {
      fail(e, std::string("action '") + name + "': " + err.what());
    }
  }

  SelectorSpec selector_spec(const RuleXmlElement& e, const std::string& name,
                             const std::string* raw) {
    Params params = params_of(e, raw);
    try {
      return reg_.make_selector(name, params);
    } catch (const ConfigError& err) {
      fail(e, err.what());
    } catch (const PathError& err) {
      fail(e, std::string("selector '") + name + "': " + err.what());
    }
  }

  PathExpr path(const RuleXmlElement& e, const std::string& expr) const {
    try {
      return parse_path(expr);
    } catch (const PathError& err) {
      fail(e, err.what());
    }
  }

  BlockType block(const RuleXmlElement& e) {
    BlockType bt;
    bt.id = required(e, "ID");
    Scope scope(*this, "Block '" + bt.id + "'");
    stray_text(e);
    only_children(e, {"Definition", "Rules"});
    auto defs = children_named(e, "Definition", 1);
    if (defs.empty()) fail(e, "<Block> requires a <Definition>");
    definition(*defs.front(), bt);
    for (const auto* rules : children_named(e, "Rules", 1)) {
      stray_text(*rules);
      std::size_t n = 0;
      for (const auto& r : rules->children) {
        if (r.name != "Rule") {
          warn(r, "unexpected element <" + r.name + "> inside <Rules> ignored");
          continue;
        }
        bt.rules.push_back(rule(r, ++n));
      }
      std::set<std::string> ids;
      for (const auto& r : bt.rules)
        if (!ids.insert(r.id).second) fail(*rules, "duplicate rule ID '" + r.id + "'");
    }
    return bt;
  }

  void definition(const RuleXmlElement& e, BlockType& bt) {
    stray_text(e);
    only_children(e, {"Start", "Condition", "Grouping"});
    auto starts = children_named(e, "Start", 1);
    if (starts.empty()) fail(e, "<Definition> requires a <Start>");
    bt.start = path(*starts.front(), required(*starts.front(), "matches"));
    for (const auto* c : children_named(e, "Condition", 1)) bt.condition = condition(*c);
    for (const auto* g : children_named(e, "Grouping", 1)) bt.grouping = grouping(*g);
  }

  Grouping grouping(const RuleXmlElement& e) {
    Grouping g;
    std::string type = required(e, "type");
    std::string upper;
    for (char c : type) upper += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (upper == "NONE") {
      g.kind = GroupingKind::none;
    } else if (upper == "GROUPING_EXPRESSION") {
      g.kind = GroupingKind::grouping_expression;
    } else if (upper == "END_EXPRESSION") {
      g.kind = GroupingKind::end_expression;
    } else if (upper == "NEXT_BLOCK") {
      g.kind = GroupingKind::next_block;
    } else {
      fail(e, "unknown grouping type '" + type + "'");
    }
    stray_text(e);
    only_children(e, {"GroupingExpression"});
    auto exprs = children_named(e, "GroupingExpression", 1);
    bool wants_expr =
        g.kind == GroupingKind::grouping_expression || g.kind == GroupingKind::end_expression;
    if (wants_expr && exprs.empty()) fail(e, "grouping " + type + " requires a <GroupingExpression>");
    if (!wants_expr && !exprs.empty())
      fail(*exprs.front(), "grouping " + type + " takes no <GroupingExpression>");
    if (wants_expr) g.expr = path(*exprs.front(), required(*exprs.front(), "matches"));
    return g;
  }

  Condition condition(const RuleXmlElement& e) {
    std::string type = required(e, "type");
    auto kind = parse_condition_kind(type);
    if (!kind) fail(e, "unknown condition type '" + type + "'");
    stray_text(e);
    try {
      if (is_terminal(*kind)) {
        if (!e.children.empty()) fail(e, "terminal condition '" + type + "' cannot have children");
        SelectorSpec sel = identity_spec();
        if (auto* name = e.attribute("selector")) {
          sel = selector_spec(e, *name, e.attribute("selectorParameters"));
        } else if (e.attribute("selectorParameters")) {
          fail(e, "selectorParameters given without a selector");
        }
        std::optional<std::string> value;
        if (auto* v = e.attribute("value")) value = *v;
        return make_terminal(*kind, std::move(sel), std::move(value));
      }
      if (e.attribute("selector") || e.attribute("value"))
        warn(e, "selector/value on combinator '" + type + "' ignored");
      std::vector<Condition> kids;
      for (const auto& c : e.children) {
        if (c.name != "Condition") {
          warn(c, "unexpected element <" + c.name + "> inside <Condition> ignored");
          continue;
        }
        kids.push_back(condition(c));
      }
      if (*kind == ConditionKind::min_max) {
        auto bound = [&](const char* name) {
          auto* raw = e.attribute(name);
          if (!raw) fail(e, std::string("minmax requires attribute '") + name + "'");
          auto v = parse_integer(trim(*raw));
          if (!v) fail(e, std::string("minmax attribute '") + name + "' is not an integer");
          return static_cast<int>(*v);
        };
        int lo = bound("min");
        int hi = bound("max");
        return make_min_max(std::move(kids), lo, hi);
      }
      return make_composite(*kind, std::move(kids));
    } catch (const ConfigError& err) {
      fail(e, err.what());
    }
  }

  Rule rule(const RuleXmlElement& e, std::size_t ordinal) {
    Rule r;
    if (auto* id = e.attribute("ID"); id && !trim(*id).empty()) {
      r.id = *id;
    } else {
      r.id = "#" + std::to_string(ordinal);
      warn(e, "rule without ID named '" + r.id + "'");
    }
    Scope scope(*this, "Rule '" + r.id + "'");
    stray_text(e);
    only_children(e, {"Condition", "Action", "RuleSet"});
    for (const auto* c : children_named(e, "Condition", 1)) r.condition = condition(*c);
    for (const auto* a : children_named(e, "Action", 1)) r.action = action(*a);
    for (const auto* s : children_named(e, "RuleSet", 1)) r.inner = ruleset(*s, false);
    if (!r.action && !r.inner) fail(e, "rule needs an <Action>, a <RuleSet>, or both");
    return r;
  }

  ActionSpec action(const RuleXmlElement& e) {
    std::string name = required(e, "class");
    Scope scope(*this, "Action '" + name + "'");
    stray_text(e);
    only_children(e, {"Source"});
    std::optional<SelectorSpec> source;
    for (const auto* s : children_named(e, "Source", 1)) {
      const std::string* sel = s->attribute("selector");
      if (!sel) sel = s->attribute("class");
      if (!sel) fail(*s, "<Source> requires attribute 'selector'");
      source = selector_spec(*s, *sel, s->attribute("selectorParameters"));
    }
    ActionSpec spec = action_spec(e, name, params_of(e, e.attribute("parameters")), source);
    if (!(spec.impl->roles() & Action::rule))
      fail(e, "action '" + name + "' cannot be used as a rule action");
    return spec;
  }

  const Registry& reg_;
  std::vector<std::string>& warnings_;
  std::vector<std::string> path_;
};

}  // namespace

std::shared_ptr<const RuleSet> load_ruleset(std::string_view xml, const Registry& registry) {
  std::vector<std::string> warnings;
  auto root = detail::parse_rule_xml(xml, warnings);
  Loader loader(registry, warnings);
  auto rs = loader.ruleset(root, true);
  rs->warnings = std::move(warnings);
  return rs;
}

// --- describe ----------------------------------------------------------------

namespace {

std::string params_str(const Params& p) {
  std::string out = "{";
  bool first = true;
  for (const auto& [k, v] : p) {
    out += (first ? "" : ";") + k + "=" + v;
    first = false;
  }
  return out + "}";
}

std::string selector_str(const SelectorSpec& s) { return s.name + params_str(s.params); }

std::string condition_str(const Condition& c) {
  std::string out(to_string(c.kind));
  if (is_terminal(c.kind)) {
    out += "(" + selector_str(c.selector);
    if (c.value) out += ", '" + *c.value + "'";
    return out + ")";
  }
  if (c.kind == ConditionKind::min_max)
    out += "[" + std::to_string(c.min) + "," + std::to_string(c.max) + "]";
  out += "(";
  for (std::size_t i = 0; i < c.children.size(); ++i)
    out += (i ? ", " : "") + condition_str(c.children[i]);
  return out + ")";
}

std::string action_str(const ActionSpec& a) {
  std::string out = a.name + params_str(a.params);
  if (a.source) out += " <- " + selector_str(*a.source);
  return out;
}

void describe_into(const RuleSet& rs, int indent, std::ostringstream& os) {
  std::string pad(static_cast<std::size_t>(indent), ' ');
  os << pad << "RuleSet " << rs.id;
  if (rs.pre) os << " pre=" << action_str(*rs.pre);
  if (rs.post) os << " post=" << action_str(*rs.post);
  if (!rs.output_root.empty()) os << " outputRoot=" << rs.output_root;
  os << '\n';
  for (const auto& bt : rs.block_types) {
    os << pad << "  Block " << bt.id << " start=" << bt.start.source
       << " grouping=" << to_string(bt.grouping.kind);
    if (bt.grouping.expr) os << "[" << bt.grouping.expr->source << "]";
    os << '\n';
    if (bt.condition) os << pad << "    when " << condition_str(*bt.condition) << '\n';
    for (const auto& r : bt.rules) {
      os << pad << "    Rule " << r.id;
      if (r.condition) os << " if " << condition_str(*r.condition);
      if (r.action) os << " do " << action_str(*r.action);
      os << '\n';
      if (r.inner) describe_into(*r.inner, indent + 6, os);
    }
  }
}

}  // namespace

std::string describe(const RuleSet& rs) {
  std::ostringstream os;
  describe_into(rs, 0, os);
  return os.str();
}

}  // namespace quarry
