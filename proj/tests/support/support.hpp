#pragma once

#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "quarry/caseimport.hpp"
#include "quarry/engine.hpp"
#include "quarry/rulemodel.hpp"

namespace quarry::testing {

std::string source_path(const std::string& relative);
std::string read_file(const std::string& path);

/// Zip archive writer for container tests; entries are stored or deflated.
std::string make_zip(const std::vector<std::pair<std::string, std::string>>& entries,
                     bool deflate = false);

/// Built-in plus case-import names.
Registry full_registry();

std::shared_ptr<const RuleSet> load_rules(const std::string& xml);
std::shared_ptr<const RuleSet> load_rules(const std::string& xml, const Registry& registry);

// --- grammar compatibility --------------------------------------------------

/// The printed rule-file snippets assembled into one file.
std::string grammar_snippets();

struct Mutation {
  std::string name;
  std::string from;
  std::string to;
};
/// Ten single-edit corruptions of grammar_snippets(), each of which must be rejected.
const std::vector<Mutation>& grammar_mutations();
/// grammar_snippets() with `m` applied; throws if `m.from` does not occur.
std::string mutated_snippets(const Mutation& m);

// --- XML backend golden trees -----------------------------------------------

struct XmlScenario {
  std::string name;
  std::function<std::string()> build;  // returns the serialized output
  std::string expected;                // derived by hand from the write semantics
};
const std::vector<XmlScenario>& xml_scenarios();

// --- block construction oracle ----------------------------------------------

struct BlockCase {
  std::string document;
  std::string rules;
  /// (block type, indices into the significant top-level children)
  std::vector<std::pair<std::string, std::vector<int>>> expected;
};

/// A random sibling run (<= 40 nodes) with up to three block types and every
/// grouping kind. `expected` comes from a direct enumeration over the
/// generator's own model, never from the library.
BlockCase random_block_case(std::mt19937& rng);

/// Library result in the oracle's terms.
std::vector<std::pair<std::string, std::vector<int>>> engine_blocks(const BlockCase& c);

// --- path-subset conformance --------------------------------------------------

struct CorpusResult {
  std::size_t cases = 0;
  std::size_t non_empty = 0;
  std::vector<std::string> failures;  // "expression on document: got ..., want ..."
};
/// Replays the frozen reference-evaluator corpus through eval().
CorpusResult check_xpath_corpus();

// --- regexp oracle -------------------------------------------------------------

struct RegexCase {
  std::string document;
  std::string pattern;
  /// nullopt when the pattern does not match.
  std::optional<std::string> expected;
};

/// Expected value from a plain string search over text_of(block).
RegexCase random_regex_case(std::mt19937& rng);

// --- colored case fixtures ----------------------------------------------------

struct ColorCase {
  std::string content_xml;
  std::size_t expected_relations = 0;
};

/// Letter with random colored findings and diagnoses; the expected count is a
/// brute-force cross count of shared colors.
ColorCase random_color_case(std::mt19937& rng);

/// content.xml around `body`: paragraph style P1 is a bold heading, text styles
/// C0..C3 carry the background colors of case_colors().
std::string case_content(const std::string& body);
const std::vector<std::string>& case_colors();

/// Wraps a content.xml body in a container with the fixture style sheet.
std::string case_container(const std::string& content_xml,
                           const std::vector<std::pair<std::string, std::string>>& extra = {});

}  // namespace quarry::testing
