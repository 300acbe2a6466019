#pragma once

#include <any>
#include <map>
#include <string>
#include <vector>

#include "quarry/context.hpp"
#include "quarry/rulemodel.hpp"

namespace quarry {

/// Top-level nodes rules look at: the children of office:text, office:body or
/// an XHTML body when present, else the root's children. Whitespace-only
/// text is left out.
Fragment document_scope(const Document& doc);

/// Two-phase block construction over `scope`. Phase one claims start nodes
/// (first block type in declaration order wins a node); phase two expands
/// each minimal block along its following siblings, never past the scope.
std::vector<Block> build_blocks(const RuleSet& rs, std::span<const NodeRef> scope,
                                ExtractionContext& ctx);

/// Applies `inner` to the fragment of `block`, with the context's current
/// user object as parent. Leaves the stack as it found it.
void apply_inner(const RuleSet& inner, const Block& block, ExtractionContext& ctx);

/// Runs a top-level rule set over ctx.document. The rule set's own pre/post
/// hooks see a pseudo block "#document" covering the scope.
std::any run(const RuleSet& rs, ExtractionContext& ctx, std::any user_object);

struct RunResult {
  std::any user_object;
  std::vector<Event> events;
  std::map<std::string, std::size_t> block_counts;
  std::map<std::string, std::size_t> rule_fires;
};

RunResult run(const RuleSet& rs, DocumentPtr document, std::any user_object,
              RunConfig config = {});

}  // namespace quarry
