#include "quarry/engine.hpp"

#include <algorithm>
#include <set>

#include "quarry/text.hpp"

namespace quarry {

namespace {

NodeRef find_element(NodeRef n, std::string_view name) {
  if (n.is_element() && n.name() == name) return n;
  for (NodeRef c : n.children())
    if (c.is_element())
      if (NodeRef hit = find_element(c, name)) return hit;
  return {};
}

bool significant(NodeRef n) { return !(n.is_text() && is_whitespace_only(n.value())); }

/// Following significant siblings of `start`, limited to the scope when the
/// start node is one of its members.
std::vector<NodeRef> following(NodeRef start, std::span<const NodeRef> scope) {
  std::vector<NodeRef> out;
  auto it = std::find(scope.begin(), scope.end(), start);
  if (it != scope.end()) {
    for (++it; it != scope.end(); ++it) out.push_back(*it);
    return out;
  }
  for (NodeRef s = start.next_sibling(); s; s = s.next_sibling())
    if (significant(s)) out.push_back(s);
  return out;
}

bool matches(const PathExpr& expr, NodeRef n) { return !eval(expr, n).empty(); }

}  // namespace

Fragment document_scope(const Document& doc) {
  NodeRef root = doc.root();
  NodeRef container;
  for (std::string_view name : {"office:text", "office:body", "body"}) {
    container = find_element(root, name);
    if (container) break;
  }
  if (!container) container = root;
  Fragment out;
  for (NodeRef c : container.children())
    if (significant(c)) out.push_back(c);
  return out;
}

std::vector<Block> build_blocks(const RuleSet& rs, std::span<const NodeRef> scope,
                                ExtractionContext& ctx) {
  struct Minimal {
    const BlockType* type;
    NodeRef start;
  };
  std::vector<Minimal> minimal;
  std::set<NodeRef> claimed;

  for (const BlockType& bt : rs.block_types) {
    auto labels = ctx.attribute_to(rs.id, bt.id, "", "");
    for (NodeRef hit : eval(bt.start, scope)) {
      if (claimed.count(hit)) continue;
      Block provisional{bt.id, {hit}, 0};
      if (bt.condition && !evaluate(*bt.condition, provisional, ctx)) continue;
      claimed.insert(hit);
      minimal.push_back({&bt, hit});
    }
  }
  std::sort(minimal.begin(), minimal.end(),
            [](const Minimal& a, const Minimal& b) { return a.start < b.start; });

  std::vector<Block> blocks;
  blocks.reserve(minimal.size());
  for (const Minimal& m : minimal) {
    Block b{m.type->id, {m.start}, 0};
    const Grouping& g = m.type->grouping;
    if (g.kind != GroupingKind::none) {
      for (NodeRef s : following(m.start, scope)) {
        bool take = false;
        switch (g.kind) {
          case GroupingKind::grouping_expression: take = matches(*g.expr, s); break;
          case GroupingKind::end_expression: take = !matches(*g.expr, s); break;
          case GroupingKind::next_block: take = claimed.count(s) == 0; break;
          case GroupingKind::none: break;
        }
        if (!take) break;
        b.nodes.push_back(s);
      }
    }
    b.ordinal = blocks.size() + 1;
    blocks.push_back(std::move(b));
  }
  return blocks;
}

namespace {

void fire_rules(const RuleSet& rs, const Block& block, const BlockType& bt,
                ExtractionContext& ctx) {
  for (const Rule& rule : bt.rules) {
    bool holds = true;
    {
      auto labels = ctx.attribute_to(rs.id, bt.id, rule.id, "");
      if (rule.condition) {
        try {
          holds = evaluate(*rule.condition, block, ctx);
        } catch (const std::exception& e) {
          ctx.emit(Severity::red, "condition-failed", e.what(), block.start());
          holds = false;
        }
      }
    }
    if (!holds) continue;
    ++ctx.rule_fires[bt.id + "/" + rule.id];
    if (rule.action) {
      auto labels = ctx.attribute_to(rs.id, bt.id, rule.id, rule.action->name);
      try {
        rule.action->impl->perform(block, ctx.user_object(), ctx);
      } catch (const std::exception& e) {
        ctx.emit(Severity::red, "action-failed", e.what(), block.start());
      }
    }
    if (rule.inner) {
      auto labels = ctx.attribute_to(rs.id, bt.id, rule.id, "");
      apply_inner(*rule.inner, block, ctx);
    }
  }
}

void process(const RuleSet& rs, const Block& scope_block, ExtractionContext& ctx) {
  std::vector<Block> blocks = build_blocks(rs, scope_block.nodes, ctx);
  for (const Block& b : blocks) {
    ++ctx.block_counts[b.type_id];
    auto bt = std::find_if(rs.block_types.begin(), rs.block_types.end(),
                           [&](const BlockType& t) { return t.id == b.type_id; });
    fire_rules(rs, b, *bt, ctx);
  }
}

}  // namespace

void apply_inner(const RuleSet& inner, const Block& block, ExtractionContext& ctx) {
  if (ctx.depth() == 0) throw std::logic_error("apply_inner without a parent user object");
  const std::size_t parent_at = ctx.depth() - 1;
  const std::string rule = ctx.current_rule();
  const std::string block_type = ctx.current_block_type();

  std::any child;
  if (inner.pre) {
    auto labels = ctx.attribute_to(inner.id, block_type, rule, inner.pre->name);
    try {
      child = inner.pre->impl->make_child(ctx.user_object_at(parent_at), block, ctx);
    } catch (const std::exception& e) {
      ctx.emit(Severity::red, "pre-failed", e.what(), block.start());
      return;
    }
  } else {
    // Inheritance: the inner rules work on the parent's object itself.
    child = std::move(ctx.user_object_at(parent_at));
  }

  ctx.push(std::move(child));
  try {
    process(inner, block, ctx);
  } catch (const std::exception& e) {
    auto labels = ctx.attribute_to(inner.id, block_type, rule, "engine");
    ctx.emit(Severity::red, "ruleset-failed", e.what(), block.start());
  }
  child = ctx.pop();

  std::any* merge_child = &child;
  std::any inherited;
  if (!inner.pre) {
    ctx.user_object_at(parent_at) = std::move(child);
    inherited = ctx.user_object_at(parent_at);
    merge_child = &inherited;
  }
  if (inner.post) {
    auto labels = ctx.attribute_to(inner.id, block_type, rule, inner.post->name);
    try {
      inner.post->impl->merge_back(ctx.user_object_at(parent_at), *merge_child, block, ctx);
    } catch (const std::exception& e) {
      ctx.emit(Severity::red, "post-failed", e.what(), block.start());
    }
  }
}

std::any run(const RuleSet& rs, ExtractionContext& ctx, std::any user_object) {
  if (!ctx.document) throw std::invalid_argument("run: context has no document");
  const std::size_t depth = ctx.depth();
  ctx.push(std::move(user_object));
  {
    auto labels = ctx.attribute_to(rs.id, "", "", "");
    for (const auto& w : ctx.document->load_warnings())
      ctx.emit(Severity::yellow, "load-warning", w);
  }
  Block whole{"#document", document_scope(*ctx.document), 0};
  apply_inner(rs, whole, ctx);
  std::any out = ctx.pop();
  if (ctx.depth() != depth) throw std::logic_error("user-object stack unbalanced after run");
  return out;
}

RunResult run(const RuleSet& rs, DocumentPtr document, std::any user_object, RunConfig config) {
  ExtractionContext ctx(std::move(config));
  ctx.document = std::move(document);
  RunResult r;
  r.user_object = run(rs, ctx, std::move(user_object));
  r.events = ctx.take_events();
  r.block_counts = std::move(ctx.block_counts);
  r.rule_fires = std::move(ctx.rule_fires);
  return r;
}

}  // namespace quarry
