#include "rule_xml.hpp"

#include <map>
#include <set>

#include "quarry/rulemodel.hpp"
#include "quarry/text.hpp"

namespace quarry::detail {

namespace {

const std::map<std::string_view, std::set<std::string_view>>& grammar() {
  static const std::map<std::string_view, std::set<std::string_view>> g = {
      {"RuleSet", {"Block"}},
      {"Block", {"Definition", "Rules"}},
      {"Definition", {"Start", "Condition", "Grouping"}},
      {"Condition", {"Condition"}},
      {"Grouping", {"GroupingExpression"}},
      {"Rules", {"Rule"}},
      {"Rule", {"Condition", "Action", "RuleSet"}},
      {"Action", {"Source"}},
      {"Start", {}},
      {"GroupingExpression", {}},
      {"Source", {}},
  };
  return g;
}

bool known(std::string_view name) { return grammar().count(name) > 0; }

bool allows(std::string_view parent, std::string_view child) {
  auto it = grammar().find(parent);
  return it != grammar().end() && it->second.count(child) > 0;
}

class Reader {
 public:
  Reader(std::string_view s, std::vector<std::string>& warnings) : s_(s), warnings_(warnings) {}

  RuleXmlElement run() {
    while (i_ < s_.size()) {
      if (s_[i_] == '<') {
        markup();
      } else {
        text();
      }
    }
    if (!stack_.empty())
      fail("end of file inside <" + stack_.back().name + ">", stack_.back().line,
           stack_.back().column);
    if (!root_) fail("no root element", line_, col_);
    return std::move(*root_);
  }

 private:
  [[noreturn]] void fail(const std::string& msg, long line, long col) const {
    throw RuleSetError("", msg, line, col);
  }

  bool at(std::string_view lit) const { return s_.substr(i_).starts_with(lit); }

  void advance(std::size_t n = 1) {
    for (std::size_t k = 0; k < n && i_ < s_.size(); ++k, ++i_) {
      if (s_[i_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
    }
  }

  void skip_past(std::string_view terminator, const char* what) {
    auto pos = s_.find(terminator, i_);
    if (pos == std::string_view::npos) fail(std::string("unterminated ") + what, line_, col_);
    advance(pos + terminator.size() - i_);
  }

  void skip_space() {
    while (i_ < s_.size() && is_space(s_[i_])) advance();
  }

  std::string name() {
    std::size_t start = i_;
    while (i_ < s_.size() && !is_space(s_[i_]) && s_[i_] != '>' && s_[i_] != '/' &&
           s_[i_] != '=' && s_[i_] != '<')
      advance();
    if (start == i_) fail("expected a name", line_, col_);
    return std::string(s_.substr(start, i_ - start));
  }

  std::string decode(std::string_view raw, long line, long col) const {
    std::string out;
    for (std::size_t k = 0; k < raw.size(); ++k) {
      if (raw[k] != '&') {
        out += raw[k];
        continue;
      }
      auto semi = raw.find(';', k);
      if (semi == std::string_view::npos) fail("unterminated entity reference", line, col);
      std::string_view ent = raw.substr(k + 1, semi - k - 1);
      if (ent == "lt") {
        out += '<';
      } else if (ent == "gt") {
        out += '>';
      } else if (ent == "amp") {
        out += '&';
      } else if (ent == "quot") {
        out += '"';
      } else if (ent == "apos") {
        out += '\'';
      } else if (ent.starts_with("#")) {
        unsigned long cp = 0;
        try {
          cp = ent.starts_with("#x") ? std::stoul(std::string(ent.substr(2)), nullptr, 16)
                                     : std::stoul(std::string(ent.substr(1)), nullptr, 10);
        } catch (const std::exception&) {
          fail("bad character reference &" + std::string(ent) + ";", line, col);
        }
        append_utf8(out, cp);
      } else {
        fail("unknown entity &" + std::string(ent) + ";", line, col);
      }
      k = semi;
    }
    return out;
  }

  static void append_utf8(std::string& out, unsigned long cp) {
    if (cp < 0x80) {
      out += static_cast<char>(cp);
    } else if (cp < 0x800) {
      out += static_cast<char>(0xC0 | (cp >> 6));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
      out += static_cast<char>(0xE0 | (cp >> 12));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
      out += static_cast<char>(0xF0 | (cp >> 18));
      out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    }
  }

  void text() {
    long line = line_, col = col_;
    std::size_t start = i_;
    while (i_ < s_.size() && s_[i_] != '<') advance();
    add_text(decode(s_.substr(start, i_ - start), line, col), line, col);
  }

  void add_text(const std::string& t, long line, long col) {
    if (is_whitespace_only(t)) return;
    if (stack_.empty()) fail("text outside the root element", line, col);
    stack_.back().text += t;
  }

  void markup() {
    if (at("<?")) return skip_past("?>", "processing instruction");
    if (at("<!--")) return skip_past("-->", "comment");
    if (at("<![CDATA[")) {
      long line = line_, col = col_;
      advance(9);
      auto end = s_.find("]]>", i_);
      if (end == std::string_view::npos) fail("unterminated CDATA section", line, col);
      std::string t(s_.substr(i_, end - i_));
      advance(end + 3 - i_);
      return add_text(t, line, col);
    }
    if (at("<!")) {
      int depth = 0;
      while (i_ < s_.size()) {
        char c = s_[i_];
        advance();
        if (c == '[') ++depth;
        if (c == ']') --depth;
        if (c == '>' && depth <= 0) return;
      }
      fail("unterminated declaration", line_, col_);
    }
    if (at("</")) return end_tag();
    start_tag();
  }

  void start_tag() {
    RuleXmlElement e;
    e.line = line_;
    e.column = col_;
    advance();
    e.name = name();
    bool empty = false;
    while (true) {
      skip_space();
      if (i_ >= s_.size()) fail("unterminated start tag <" + e.name + ">", e.line, e.column);
      if (at("/>")) {
        advance(2);
        empty = true;
        break;
      }
      if (s_[i_] == '>') {
        advance();
        break;
      }
      long aline = line_, acol = col_;
      std::string key = name();
      skip_space();
      if (i_ >= s_.size() || s_[i_] != '=')
        fail("expected '=' after attribute '" + key + "' in <" + e.name + ">", aline, acol);
      advance();
      skip_space();
      if (i_ >= s_.size() || (s_[i_] != '"' && s_[i_] != '\''))
        fail("expected a quoted value for attribute '" + key + "'", aline, acol);
      char q = s_[i_];
      advance();
      auto close = s_.find(q, i_);
      if (close == std::string_view::npos) fail("unterminated attribute value", aline, acol);
      std::string_view raw = s_.substr(i_, close - i_);
      advance(close + 1 - i_);
      for (const auto& [k, _] : e.attributes)
        if (k == key) fail("duplicate attribute '" + key + "'", aline, acol);
      e.attributes.emplace_back(std::move(key), decode(raw, aline, acol));
    }

    if (stack_.empty() && root_) fail("content after the root element", e.line, e.column);
    if (!stack_.empty() && known(e.name) && known(stack_.back().name) &&
        !allows(stack_.back().name, e.name)) {
      // Find the nearest open element that accepts this one.
      std::size_t k = stack_.size();
      while (k > 0 && !allows(stack_[k - 1].name, e.name)) --k;
      if (k > 0) {
        while (stack_.size() > k) {
          warnings_.push_back("line " + std::to_string(e.line) + ": <" + stack_.back().name +
                              "> (line " + std::to_string(stack_.back().line) +
                              ") implicitly closed before <" + e.name + ">");
          pop();
        }
      }
    }
    stack_.push_back(std::move(e));
    if (empty) pop();
  }

  void end_tag() {
    long line = line_, col = col_;
    advance(2);
    std::string n = name();
    skip_space();
    if (i_ >= s_.size() || s_[i_] != '>') fail("malformed end tag </" + n + ">", line, col);
    advance();
    std::size_t k = stack_.size();
    while (k > 0 && stack_[k - 1].name != n) --k;
    if (k == 0) fail("unexpected end tag </" + n + ">", line, col);
    while (stack_.size() > k) {
      warnings_.push_back("line " + std::to_string(line) + ": <" + stack_.back().name +
                          "> (line " + std::to_string(stack_.back().line) +
                          ") implicitly closed by </" + n + ">");
      pop();
    }
    pop();
  }

  void pop() {
    RuleXmlElement e = std::move(stack_.back());
    stack_.pop_back();
    if (stack_.empty()) {
      root_ = std::move(e);
    } else {
      stack_.back().children.push_back(std::move(e));
    }
  }

  std::string_view s_;
  std::vector<std::string>& warnings_;
  std::size_t i_ = 0;
  long line_ = 1;
  long col_ = 1;
  std::vector<RuleXmlElement> stack_;
  std::optional<RuleXmlElement> root_;
};

}  // namespace

RuleXmlElement parse_rule_xml(std::string_view text, std::vector<std::string>& warnings) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  return Reader(text, warnings).run();
}

}  // namespace quarry::detail
