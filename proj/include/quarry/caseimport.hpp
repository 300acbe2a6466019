#pragma once

#include <string>
#include <vector>

#include "quarry/rulemodel.hpp"
#include "quarry/xmlout.hpp"

namespace quarry::caseimport {

/// Bold leading run of the block, when the block opens with one.
SelectorResult heading_run(const Block& block);
/// Group 1 of `\s*(.*)\s*:` over the heading run.
SelectorResult title(const Block& block);
/// The block without its heading run. A heading paragraph that carries more
/// text after the run contributes a trimmed copy.
SelectorResult content(const Block& block);

struct ColorRun {
  std::string color;  // lower-case
  Fragment nodes;
};
/// Maximal runs of adjacent text sharing one background color.
std::vector<ColorRun> color_runs(std::span<const NodeRef> nodes);

struct TermEntry {
  std::string text;
  std::vector<TermEntry> children;
  std::vector<std::string> colors;
};
/// List items become entries (nested lists become children); loose
/// paragraphs become top-level entries.
std::vector<TermEntry> terminology_entries(std::span<const NodeRef> nodes);

/// Per-run bookkeeping shared by the section, terminology and relation actions.
struct CaseState {
  struct SectionRun {
    std::string section;
    std::string color;
    std::string text;
  };
  struct Marked {
    std::string entry;
    std::string color;
  };
  std::vector<SectionRun> section_runs;
  std::vector<Marked> diagnoses;
  std::size_t sections = 0;
  std::map<std::string, std::size_t> images_written;
};

struct Relation {
  std::string color;
  std::string section;
  std::string observation;
  std::string diagnosis;
};
/// Every section run paired with every diagnosis of the same color.
std::vector<Relation> relate(const CaseState& state);

/// Adds the case selectors and actions (short and legacy names).
Registry& register_caseimport(Registry& registry);

}  // namespace quarry::caseimport
