#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "quarry/docmodel.hpp"

namespace quarry {

class PathError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Read paths: the XPath subset rule sets use.
//
//   path      := branch ('|' branch)*
//   branch    := '/'? step ('/' step)*
//   step      := axis? test predicate*
//   axis      := 'child::' | 'descendant-or-self::' | 'self::' | 'attribute::' | '@'
//   test      := '*' | name | prefix ':' name | prefix ':' '*'
//   predicate := '[' contains(text(), lit) | starts-with(text(), lit) | text() = lit ']'
//
// text() inside a predicate stands for the node's full descendant text.

enum class Axis { child, descendant_or_self, self, attribute };

struct Predicate {
  enum class Kind { contains_text, text_equals, starts_with_text };
  Kind kind;
  std::string literal;
};

struct Step {
  Axis axis = Axis::child;
  /// Empty means wildcard.
  std::string name;
  std::vector<Predicate> predicates;

  bool wildcard() const { return name.empty(); }
};

struct PathBranch {
  bool absolute = false;
  std::vector<Step> steps;
};

struct PathExpr {
  std::vector<PathBranch> branches;
  std::string source;
};

PathExpr parse_path(std::string_view expr);

/// Evaluates against a context fragment. Relative branches start at each
/// context node; absolute branches start at a virtual root whose children
/// are the context nodes. Result is in document order without duplicates.
std::vector<NodeRef> eval(const PathExpr& expr, std::span<const NodeRef> context);

inline std::vector<NodeRef> eval(const PathExpr& expr, NodeRef context) {
  return eval(expr, std::span<const NodeRef>(&context, 1));
}

/// Write paths: element steps with an optional final attribute.
struct WritePath {
  std::vector<std::string> steps;
  std::optional<std::string> attribute;
  std::string source;
};

WritePath parse_write_path(std::string_view expr);

}  // namespace quarry
