#include "quarry/pathlang.hpp"

#include <algorithm>

#include "quarry/text.hpp"

namespace quarry {

namespace {

enum class Tok {
  slash,
  double_slash,
  pipe,
  lbracket,
  rbracket,
  lparen,
  rparen,
  comma,
  equals,
  at,
  star,
  double_colon,
  dot,
  name,
  literal,
  other,
  end
};

struct Token {
  Tok kind;
  std::string text;
  std::size_t offset;
};

bool name_start(char c) {
  auto u = static_cast<unsigned char>(c);
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || u >= 0x80;
}

bool name_char(char c) {
  return name_start(c) || (c >= '0' && c <= '9') || c == '-' || c == '.';
}

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (is_space(c)) {
      ++i;
      continue;
    }
    std::size_t at = i;
    auto one = [&](Tok k) {
      out.push_back({k, std::string(1, c), at});
      ++i;
    };
    switch (c) {
      case '/':
        if (i + 1 < s.size() && s[i + 1] == '/') {
          out.push_back({Tok::double_slash, "//", at});
          i += 2;
        } else {
          one(Tok::slash);
        }
        continue;
      case '|': one(Tok::pipe); continue;
      case '[': one(Tok::lbracket); continue;
      case ']': one(Tok::rbracket); continue;
      case '(': one(Tok::lparen); continue;
      case ')': one(Tok::rparen); continue;
      case ',': one(Tok::comma); continue;
      case '=': one(Tok::equals); continue;
      case '@': one(Tok::at); continue;
      case '*': one(Tok::star); continue;
      case '.': one(Tok::dot); continue;
      case ':':
        if (i + 1 < s.size() && s[i + 1] == ':') {
          out.push_back({Tok::double_colon, "::", at});
          i += 2;
          continue;
        }
        one(Tok::other);
        continue;
      case '\'':
      case '"': {
        auto close = s.find(c, i + 1);
        if (close == std::string_view::npos) {
          throw PathError("path: unterminated string literal at offset " + std::to_string(at) +
                          " in '" + std::string(s) + "'");
        }
        out.push_back({Tok::literal, std::string(s.substr(i + 1, close - i - 1)), at});
        i = close + 1;
        continue;
      }
      default:
        break;
    }
    if (name_start(c)) {
      std::size_t j = i + 1;
      while (j < s.size() && name_char(s[j])) ++j;
      // prefix:local or prefix:*, but not an axis separator.
      if (j + 1 < s.size() && s[j] == ':' && s[j + 1] != ':') {
        if (s[j + 1] == '*') {
          j += 2;
        } else if (name_start(s[j + 1])) {
          j += 2;
          while (j < s.size() && name_char(s[j])) ++j;
        }
      }
      out.push_back({Tok::name, std::string(s.substr(i, j - i)), at});
      i = j;
      continue;
    }
    // Anything else (digits, operators) is outside the subset.
    std::size_t j = i + 1;
    while (j < s.size() && !is_space(s[j]) && !name_start(s[j]) && s[j] != '/' && s[j] != '[' &&
           s[j] != ']' && s[j] != '(' && s[j] != ')')
      ++j;
    out.push_back({Tok::other, std::string(s.substr(i, j - i)), at});
    i = j;
  }
  out.push_back({Tok::end, "<end>", s.size()});
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src), toks_(tokenize(src)) {}

  PathExpr parse() {
    PathExpr expr;
    expr.source = std::string(src_);
    expr.branches.push_back(branch());
    while (peek().kind == Tok::pipe) {
      next();
      expr.branches.push_back(branch());
    }
    if (peek().kind != Tok::end) fail(peek(), "unexpected token");
    return expr;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  const Token& next() { return toks_[std::min(pos_++, toks_.size() - 1)]; }

  [[noreturn]] void fail(const Token& t, const std::string& what) const {
    throw PathError("path: " + what + " '" + t.text + "' at offset " + std::to_string(t.offset) +
                    " in '" + std::string(src_) + "'");
  }

  const Token& expect(Tok k, const char* what) {
    if (peek().kind != k) fail(peek(), std::string("expected ") + what + ", found");
    return next();
  }

  PathBranch branch() {
    PathBranch b;
    if (peek().kind == Tok::slash) {
      next();
      b.absolute = true;
    }
    b.steps.push_back(step());
    while (true) {
      if (peek().kind == Tok::slash) {
        next();
        b.steps.push_back(step());
      } else if (peek().kind == Tok::double_slash) {
        fail(peek(), "unsupported abbreviation");
      } else {
        break;
      }
    }
    return b;
  }

  Step step() {
    Step s;
    const Token& t = peek();
    if (t.kind == Tok::at) {
      next();
      s.axis = Axis::attribute;
    } else if (t.kind == Tok::name && peek(1).kind == Tok::double_colon) {
      if (t.text == "child") {
        s.axis = Axis::child;
      } else if (t.text == "descendant-or-self") {
        s.axis = Axis::descendant_or_self;
      } else if (t.text == "self") {
        s.axis = Axis::self;
      } else if (t.text == "attribute") {
        s.axis = Axis::attribute;
      } else {
        fail(t, "unsupported axis");
      }
      next();
      next();
    } else if (t.kind == Tok::dot || t.kind == Tok::double_slash) {
      fail(t, "unsupported abbreviation");
    }

    const Token& test = peek();
    if (test.kind == Tok::star) {
      next();
    } else if (test.kind == Tok::name) {
      if (peek(1).kind == Tok::lparen) fail(test, "unsupported node test or function");
      s.name = test.text;
      next();
    } else {
      fail(test, "expected a name test, found");
    }

    while (peek().kind == Tok::lbracket) {
      next();
      s.predicates.push_back(predicate());
      expect(Tok::rbracket, "']'");
    }
    return s;
  }

  void expect_text_call() {
    const Token& t = peek();
    if (t.kind != Tok::name || t.text != "text") fail(t, "expected text(), found");
    next();
    expect(Tok::lparen, "'('");
    expect(Tok::rparen, "')'");
  }

  Predicate predicate() {
    const Token& fn = peek();
    if (fn.kind != Tok::name) fail(fn, "unsupported predicate");
    Predicate p;
    if (fn.text == "contains" || fn.text == "starts-with") {
      p.kind = fn.text == "contains" ? Predicate::Kind::contains_text
                                     : Predicate::Kind::starts_with_text;
      next();
      expect(Tok::lparen, "'('");
      expect_text_call();
      expect(Tok::comma, "','");
      p.literal = expect(Tok::literal, "a string literal").text;
      expect(Tok::rparen, "')'");
    } else if (fn.text == "text") {
      p.kind = Predicate::Kind::text_equals;
      expect_text_call();
      expect(Tok::equals, "'='");
      p.literal = expect(Tok::literal, "a string literal").text;
    } else {
      fail(fn, "unsupported predicate function");
    }
    return p;
  }

  std::string_view src_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

bool name_matches(const Step& step, NodeRef n) {
  if (step.wildcard()) return true;
  const std::string& want = step.name;
  if (want.size() >= 2 && want.ends_with(":*")) {
    return n.name().size() > want.size() - 1 &&
           n.name().compare(0, want.size() - 1, want, 0, want.size() - 1) == 0;
  }
  return n.name() == want;
}

bool predicates_hold(const Step& step, NodeRef n) {
  if (step.predicates.empty()) return true;
  std::string text = text_of(n);
  for (const auto& p : step.predicates) {
    switch (p.kind) {
      case Predicate::Kind::contains_text:
        if (text.find(p.literal) == std::string::npos) return false;
        break;
      case Predicate::Kind::text_equals:
        if (text != p.literal) return false;
        break;
      case Predicate::Kind::starts_with_text:
        if (!std::string_view(text).starts_with(p.literal)) return false;
        break;
    }
  }
  return true;
}

bool element_test(const Step& step, NodeRef n) {
  return n.is_element() && name_matches(step, n) && predicates_hold(step, n);
}

void apply_from_node(const Step& step, NodeRef n, std::vector<NodeRef>& out) {
  switch (step.axis) {
    case Axis::child:
      if (!n.is_element()) return;
      for (auto c : n.children())
        if (element_test(step, c)) out.push_back(c);
      return;
    case Axis::self:
      if (element_test(step, n)) out.push_back(n);
      return;
    case Axis::descendant_or_self: {
      if (n.is_attribute()) return;
      const Document* d = n.document();
      for (auto i = n.index(); i < n.subtree_end(); ++i) {
        NodeRef m(d, i);
        if (element_test(step, m)) out.push_back(m);
      }
      return;
    }
    case Axis::attribute:
      if (!n.is_element()) return;
      for (auto a : n.attributes())
        if (name_matches(step, a) && predicates_hold(step, a)) out.push_back(a);
      return;
  }
}

// The virtual root has the context nodes as its children and is itself no element.
void apply_from_virtual_root(const Step& step, std::span<const NodeRef> context,
                             std::vector<NodeRef>& out) {
  switch (step.axis) {
    case Axis::child:
      for (auto c : context)
        if (element_test(step, c)) out.push_back(c);
      return;
    case Axis::descendant_or_self:
      for (auto c : context) apply_from_node(step, c, out);
      return;
    case Axis::self:
    case Axis::attribute:
      return;
  }
}

}  // namespace

PathExpr parse_path(std::string_view expr) { return Parser(expr).parse(); }

std::vector<NodeRef> eval(const PathExpr& expr, std::span<const NodeRef> context) {
  std::vector<NodeRef> result;
  if (context.empty()) return result;
  for (const auto& branch : expr.branches) {
    std::vector<NodeRef> current;
    std::size_t first = 0;
    if (branch.absolute) {
      apply_from_virtual_root(branch.steps.front(), context, current);
      first = 1;
    } else {
      current.assign(context.begin(), context.end());
    }
    sort_document_order(current);
    for (std::size_t i = first; i < branch.steps.size() && !current.empty(); ++i) {
      std::vector<NodeRef> next;
      for (auto n : current) apply_from_node(branch.steps[i], n, next);
      sort_document_order(next);
      current = std::move(next);
    }
    result.insert(result.end(), current.begin(), current.end());
  }
  sort_document_order(result);
  return result;
}

WritePath parse_write_path(std::string_view expr) {
  WritePath wp;
  wp.source = std::string(expr);
  std::string_view body = trim(expr);
  if (body.starts_with('/')) body.remove_prefix(1);
  if (body.empty()) throw PathError("write path: empty path '" + std::string(expr) + "'");
  auto parts = split(body, '/');
  for (std::size_t i = 0; i < parts.size(); ++i) {
    std::string_view part = parts[i];
    if (part.empty()) throw PathError("write path: empty component in '" + std::string(expr) + "'");
    if (std::any_of(part.begin(), part.end(), [](char c) {
          return is_space(c) || c == '[' || c == ']' || c == '(' || c == ')' || c == '*';
        })) {
      throw PathError("write path: invalid component '" + std::string(part) + "' in '" +
                      std::string(expr) + "'");
    }
    if (part.front() == '@') {
      if (i + 1 != parts.size()) {
        throw PathError("write path: attribute '" + std::string(part) +
                        "' may only be the last node in '" + std::string(expr) + "'");
      }
      if (part.size() == 1 || part.find('@', 1) != std::string_view::npos)
        throw PathError("write path: bad attribute name in '" + std::string(expr) + "'");
      wp.attribute = std::string(part.substr(1));
    } else {
      if (part.find('@') != std::string_view::npos)
        throw PathError("write path: invalid component '" + std::string(part) + "'");
      wp.steps.emplace_back(part);
    }
  }
  return wp;
}

}  // namespace quarry
