#include "support.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>
#include <zlib.h>

#include "quarry/text.hpp"
#include "quarry/xmlout.hpp"

namespace quarry::testing {

std::string source_path(const std::string& relative) {
  return std::string(QUARRY_SOURCE_DIR) + "/" + relative;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

void put16(std::string& out, unsigned v) {
  out += static_cast<char>(v & 0xff);
  out += static_cast<char>((v >> 8) & 0xff);
}

void put32(std::string& out, unsigned long v) {
  put16(out, static_cast<unsigned>(v & 0xffff));
  put16(out, static_cast<unsigned>((v >> 16) & 0xffff));
}

std::string raw_deflate(const std::string& data) {
  z_stream s{};
  if (deflateInit2(&s, Z_BEST_COMPRESSION, Z_DEFLATED, -MAX_WBITS, 8, Z_DEFAULT_STRATEGY) != Z_OK)
    throw std::runtime_error("deflateInit2 failed");
  std::string out(deflateBound(&s, static_cast<uLong>(data.size())), '\0');
  s.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
  s.avail_in = static_cast<uInt>(data.size());
  s.next_out = reinterpret_cast<Bytef*>(out.data());
  s.avail_out = static_cast<uInt>(out.size());
  int rc = deflate(&s, Z_FINISH);
  out.resize(s.total_out);
  deflateEnd(&s);
  if (rc != Z_STREAM_END) throw std::runtime_error("deflate failed");
  return out;
}

}  // namespace

std::string make_zip(const std::vector<std::pair<std::string, std::string>>& entries,
                     bool deflate) {
  std::string out, central;
  for (const auto& [name, data] : entries) {
    unsigned long crc = crc32(0L, reinterpret_cast<const Bytef*>(data.data()),
                              static_cast<uInt>(data.size()));
    bool pack = deflate && name != "mimetype";
    std::string body = pack ? raw_deflate(data) : data;
    unsigned long offset = out.size();
    auto header = [&](std::string& h, bool is_central) {
      put32(h, is_central ? 0x02014b50UL : 0x04034b50UL);
      if (is_central) put16(h, 20);
      put16(h, 20);
      put16(h, 0);
      put16(h, pack ? 8 : 0);
      put16(h, 0);
      put16(h, 0x3221);
      put32(h, crc);
      put32(h, body.size());
      put32(h, data.size());
      put16(h, static_cast<unsigned>(name.size()));
      put16(h, 0);
      if (is_central) {
        put16(h, 0);
        put16(h, 0);
        put16(h, 0);
        put32(h, 0);
        put32(h, offset);
      }
      h += name;
    };
    header(out, false);
    out += body;
    header(central, true);
  }
  unsigned long cd_offset = out.size();
  out += central;
  put32(out, 0x06054b50UL);
  put16(out, 0);
  put16(out, 0);
  put16(out, static_cast<unsigned>(entries.size()));
  put16(out, static_cast<unsigned>(entries.size()));
  put32(out, central.size());
  put32(out, cd_offset);
  put16(out, 0);
  return out;
}

Registry full_registry() {
  Registry r;
  register_builtin(r);
  caseimport::register_caseimport(r);
  return r;
}

std::shared_ptr<const RuleSet> load_rules(const std::string& xml) {
  static const Registry registry = full_registry();
  return load_ruleset(xml, registry);
}

std::shared_ptr<const RuleSet> load_rules(const std::string& xml, const Registry& registry) {
  return load_ruleset(xml, registry);
}

// --- grammar compatibility --------------------------------------------------

std::string grammar_snippets() {
  return read_file(source_path("tests/data/grammar_snippets.rules.xml"));
}

const std::vector<Mutation>& grammar_mutations() {
  static const std::vector<Mutation> mutations = {
      {"minmax without bounds", "<Condition type=\"and\">", "<Condition type=\"minmax\">"},
      {"minmax without max", "<Condition type=\"and\">", "<Condition type=\"minmax\" min=\"1\">"},
      {"attribute step before an element step", "path=@title;", "path=@title/x;"},
      {"descend into an attribute",
       "pre=\"de.d3web.caseParser.actions.examinations.StartCaseParagraph\"",
       "pre=\"descend\" preParameters=\"path=person/@id\""},
      {"unknown action", "SetNodeAction\"", "SetNodeActionX\""},
      {"unknown selector", "StartingNodeSelector", "StartingNodeSelectr"},
      {"unknown condition type", "type=\"contains\"", "type=\"containz\""},
      {"grouping expression missing",
       "<Grouping type=\"GROUPING_EXPRESSION\">\n  <GroupingExpression\n"
       "     matches=\"descendant-or-self::*[contains(text(),'@')]\"/>\n</Grouping>",
       "<Grouping type=\"GROUPING_EXPRESSION\"/>"},
      {"unsupported start axis", "<Start matches=\"/text:h\"/>",
       "<Start matches=\"following-sibling::text:h\"/>"},
      {"duplicate block id", "<Block ID=\"end\">", "<Block ID=\"grouping\">"},
  };
  return mutations;
}

std::string mutated_snippets(const Mutation& m) {
  std::string s = grammar_snippets();
  auto at = s.find(m.from);
  if (at == std::string::npos) throw std::logic_error("mutation '" + m.name + "' does not apply");
  return s.replace(at, m.from.size(), m.to);
}

// --- XML backend golden trees -----------------------------------------------

namespace {

SelectorResult text_value(const std::string& text) {
  DocumentPtr doc = load_xml("<v>" + escape_xml_text(text) + "</v>");
  return SelectorResult::node(doc->root(), doc);
}

std::string descend_twice(bool first, bool second) {
  OutputCursor root = make_output("output");
  WritePath person = parse_write_path("organization/person");
  WritePath id = parse_write_path("@id");
  OutputCursor a = descend(person, first, root);
  set_node(id, false, text_value("1"), a);
  OutputCursor b = descend(person, second, root);
  set_node(id, false, text_value("2"), b);
  return root.doc->serialize();
}

const std::string kDecl = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";

}  // namespace

const std::vector<XmlScenario>& xml_scenarios() {
  static const std::vector<XmlScenario> scenarios = {
      {"store /organization/person/@id",
       [] {
         OutputCursor root = make_output("output");
         set_node(parse_write_path("/organization/person/@id"), false, text_value("7"), root);
         return root.doc->serialize();
       },
       kDecl + "<output>\n  <organization>\n    <person id=\"7\"/>\n  </organization>\n</output>\n"},
      {"descend reuse, reuse", [] { return descend_twice(false, false); },
       kDecl + "<output>\n  <organization>\n    <person id=\"2\"/>\n  </organization>\n</output>\n"},
      {"descend reuse, overwrite", [] { return descend_twice(false, true); },
       kDecl + "<output>\n  <organization>\n    <person id=\"1\"/>\n    <person id=\"2\"/>\n"
               "  </organization>\n</output>\n"},
      {"descend overwrite, reuse", [] { return descend_twice(true, false); },
       kDecl + "<output>\n  <organization>\n    <person id=\"2\"/>\n  </organization>\n</output>\n"},
      {"descend overwrite, overwrite", [] { return descend_twice(true, true); },
       kDecl + "<output>\n  <organization>\n    <person id=\"1\"/>\n    <person id=\"2\"/>\n"
               "  </organization>\n</output>\n"},
      {"descend a/b twice without overwrite",
       [] {
         OutputCursor root = make_output("output");
         WritePath ab = parse_write_path("a/b");
         OutputCursor first = descend(ab, false, root);
         OutputCursor second = descend(ab, false, root);
         return root.doc->serialize() + (first.node == second.node ? "same" : "different");
       },
       kDecl + "<output>\n  <a>\n    <b/>\n  </a>\n</output>\nsame"},
      {"title from a heading",
       [] {
         DocumentPtr doc = load_xml("<h>Definition:</h>");
         NodeRef h = doc->root();
         OutputCursor root = make_output("output");
         set_node(parse_write_path("@title"), false,
                  regexp_selector(std::regex(R"(\s*(.*)\s*:)"), std::span<const NodeRef>(&h, 1)),
                  root);
         return root.doc->serialize();
       },
       kDecl + "<output title=\"Definition\"/>\n"},
      {"attribute writes are idempotent",
       [] {
         OutputCursor root = make_output("output");
         WritePath path = parse_write_path("person/@id");
         set_node(path, false, text_value("7"), root);
         std::string once = root.doc->serialize();
         set_node(path, false, text_value("7"), root);
         return once == root.doc->serialize() ? once : std::string("changed");
       },
       kDecl + "<output>\n  <person id=\"7\"/>\n</output>\n"},
      {"element path appends a copy",
       [] {
         DocumentPtr doc = load_xml("<body><p>x</p></body>");
         Block block{"b", {doc->root().children()[0]}, 1};
         OutputCursor root = make_output("output");
         set_node(parse_write_path("content"), false, identity_selector(block), root);
         return root.doc->serialize();
       },
       kDecl + "<output>\n  <content>\n    <p>x</p>\n  </content>\n</output>\n"},
  };
  return scenarios;
}

// --- block oracle ------------------------------------------------------------

namespace {

template <class T>
const T& pick(std::mt19937& rng, const std::vector<T>& v) {
  return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

bool chance(std::mt19937& rng, double p) { return std::bernoulli_distribution(p)(rng); }

int uniform(std::mt19937& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

}  // namespace

BlockCase random_block_case(std::mt19937& rng) {
  static const std::vector<std::string> names = {"h", "p", "q"};
  static const std::vector<std::string> words = {"Ende", "@", "foo", "bar", "Start", "Kopf"};
  static const std::vector<std::string> kinds = {"NONE", "GROUPING_EXPRESSION", "END_EXPRESSION",
                                                 "NEXT_BLOCK"};

  struct Para {
    std::string name;
    std::string text;
  };
  std::vector<Para> paras(static_cast<std::size_t>(uniform(rng, 0, 40)));
  std::string doc = "<body>";
  for (auto& p : paras) {
    if (chance(rng, 0.3)) doc += "\n  ";
    p.name = pick(rng, names);
    int count = uniform(rng, 1, 3);
    int bold = chance(rng, 0.25) ? uniform(rng, 0, count - 1) : -1;
    std::string markup;
    for (int w = 0; w < count; ++w) {
      const std::string& word = pick(rng, words);
      std::string sep = w ? " " : "";
      p.text += sep + word;
      markup += sep + (w == bold ? "<b>" + word + "</b>" : word);
    }
    doc += "<" + p.name + ">" + markup + "</" + p.name + ">";
  }
  doc += "\n</body>";

  struct Type {
    std::string id;
    std::vector<std::string> starts;
    std::optional<std::string> contains;
    std::string kind;
    std::string expr_word;
  };
  std::vector<Type> types(static_cast<std::size_t>(uniform(rng, 1, 3)));
  std::string rules = "<RuleSet ID=\"RS:oracle\">\n";
  for (std::size_t t = 0; t < types.size(); ++t) {
    Type& ty = types[t];
    ty.id = "T" + std::to_string(t);
    for (const auto& n : names)
      if (chance(rng, 0.5)) ty.starts.push_back(n);
    if (ty.starts.empty()) ty.starts.push_back(pick(rng, names));
    if (chance(rng, 0.5)) ty.contains = pick(rng, words);
    ty.kind = pick(rng, kinds);
    ty.expr_word = pick(rng, words);

    std::string start;
    for (const auto& s : ty.starts) start += (start.empty() ? "/" : " | /") + s;
    rules += " <Block ID=\"" + ty.id + "\">\n  <Definition>\n   <Start matches=\"" + start +
             "\"/>\n";
    if (ty.contains)
      rules += "   <Condition type=\"textContains\" value=\"" + *ty.contains + "\"/>\n";
    if (ty.kind == "NEXT_BLOCK") {
      rules += "   <Grouping type=\"NEXT_BLOCK\"/>\n";
    } else if (ty.kind != "NONE") {
      rules += "   <Grouping type=\"" + ty.kind +
               "\">\n    <GroupingExpression matches=\"descendant-or-self::*[contains(text(),'" +
               ty.expr_word + "')]\"/>\n   </Grouping>\n";
    } else if (chance(rng, 0.5)) {
      rules += "   <Grouping type=\"NONE\"/>\n";
    }
    rules += "  </Definition>\n </Block>\n";
  }
  rules += "</RuleSet>\n";

  // Enumerate: claim start nodes in type order, then expand each.
  const int n = static_cast<int>(paras.size());
  std::vector<int> claimed(static_cast<std::size_t>(n), -1);
  for (int t = 0; t < static_cast<int>(types.size()); ++t) {
    const Type& ty = types[static_cast<std::size_t>(t)];
    for (int i = 0; i < n; ++i) {
      const Para& p = paras[static_cast<std::size_t>(i)];
      bool named = std::find(ty.starts.begin(), ty.starts.end(), p.name) != ty.starts.end();
      bool cond = !ty.contains || p.text.find(*ty.contains) != std::string::npos;
      if (named && cond && claimed[static_cast<std::size_t>(i)] < 0)
        claimed[static_cast<std::size_t>(i)] = t;
    }
  }
  BlockCase out{doc, rules, {}};
  for (int i = 0; i < n; ++i) {
    int t = claimed[static_cast<std::size_t>(i)];
    if (t < 0) continue;
    const Type& ty = types[static_cast<std::size_t>(t)];
    std::vector<int> block{i};
    for (int j = i + 1; j < n; ++j) {
      bool has = paras[static_cast<std::size_t>(j)].text.find(ty.expr_word) != std::string::npos;
      bool take = ty.kind == "GROUPING_EXPRESSION" ? has
                  : ty.kind == "END_EXPRESSION"    ? !has
                  : ty.kind == "NEXT_BLOCK"        ? claimed[static_cast<std::size_t>(j)] < 0
                                                   : false;
      if (!take) break;
      block.push_back(j);
    }
    out.expected.emplace_back(ty.id, std::move(block));
  }
  return out;
}

std::vector<std::pair<std::string, std::vector<int>>> engine_blocks(const BlockCase& c) {
  auto rs = load_rules(c.rules);
  ExtractionContext ctx;
  ctx.document = load_xml(c.document);
  Fragment scope = document_scope(*ctx.document);
  std::vector<std::pair<std::string, std::vector<int>>> out;
  for (const Block& b : build_blocks(*rs, scope, ctx)) {
    std::vector<int> idx;
    for (NodeRef n : b.nodes)
      idx.push_back(static_cast<int>(std::find(scope.begin(), scope.end(), n) - scope.begin()));
    out.emplace_back(b.type_id, std::move(idx));
  }
  return out;
}

// --- path-subset conformance --------------------------------------------------

namespace {

void number_elements(NodeRef n, std::map<NodeRef, std::size_t>& ids) {
  if (!n.is_element()) return;
  ids.emplace(n, ids.size());
  for (NodeRef c : n.children()) number_elements(c, ids);
}

std::string join(const std::vector<std::string>& v) {
  std::string out = "[";
  for (const auto& s : v) out += (out.size() > 1 ? "," : "") + s;
  return out + "]";
}

}  // namespace

CorpusResult check_xpath_corpus() {
  auto corpus = nlohmann::json::parse(read_file(source_path("tests/data/xpath_corpus.json")));
  CorpusResult result;
  for (const auto& c : corpus.at("cases")) {
    ++result.cases;
    std::vector<std::string> want = c.at("expected").get<std::vector<std::string>>();
    if (!want.empty()) ++result.non_empty;
    const std::string expr = c.at("expression").get<std::string>();
    std::vector<std::string> got;
    try {
      DocumentPtr doc = load_xml(c.at("document").get<std::string>());
      std::map<NodeRef, std::size_t> ids;
      number_elements(doc->root(), ids);
      for (NodeRef n : eval(parse_path(expr), doc->root())) {
        if (n.is_attribute())
          got.push_back(std::to_string(ids.at(n.parent())) + "@" + n.name());
        else if (n.is_element())
          got.push_back(std::to_string(ids.at(n)));
        else
          got.push_back("text");
      }
    } catch (const std::exception& e) {
      got = {std::string("error: ") + e.what()};
    }
    if (got != want) result.failures.push_back(expr + ": got " + join(got) + ", want " + join(want));
  }
  return result;
}

// --- regexp oracle -----------------------------------------------------------

RegexCase random_regex_case(std::mt19937& rng) {
  static const std::vector<std::string> pieces = {"ab", "b:", "  c", "a", "xa:", "::", "b b",
                                                  "ca", "z", " "};
  static const std::vector<std::string> patterns = {
      "a+",     "(b+):",  R"(\s*(.*)\s*:)", "c(a|b)?", "(x)?a",  R"(b\s+b)", "(a)(b)",
      "[^:]*",  "(z)|a",  ":+$",            "^a",      "(c)a:?", "q",       R"((\w+)\s)",
      "a(.)b",  "(:)",    R"(\s+)",         "(b)?$",   "x?",     "(ab|ca)+"};
  std::string doc = "<body>";
  std::string text;
  int paras = uniform(rng, 1, 4);
  for (int i = 0; i < paras; ++i) {
    doc += "<p>";
    int parts = uniform(rng, 1, 5);
    int depth = 0;
    for (int k = 0; k < parts; ++k) {
      int roll = uniform(rng, 0, 3);
      if (roll == 0 && depth < 2) {
        doc += "<s>";
        ++depth;
      } else if (roll == 1 && depth > 0) {
        doc += "</s>";
        --depth;
      }
      const std::string& piece = pick(rng, pieces);
      doc += piece;
      text += piece;
    }
    while (depth-- > 0) doc += "</s>";
    doc += "</p>";
  }
  doc += "</body>";

  RegexCase c{doc, pick(rng, patterns), std::nullopt};
  std::regex re(c.pattern, std::regex::ECMAScript);
  std::smatch m;
  if (std::regex_search(text, m, re))
    c.expected = (m.size() > 1 && m[1].matched) ? m[1].str() : m[0].str();
  return c;
}

// --- colored fixtures --------------------------------------------------------

namespace {

const char* kNamespaces =
    "xmlns:office=\"http://openoffice.org/2000/office\" "
    "xmlns:style=\"http://openoffice.org/2000/style\" "
    "xmlns:text=\"http://openoffice.org/2000/text\" "
    "xmlns:fo=\"http://www.w3.org/1999/XSL/Format\" "
    "xmlns:draw=\"http://openoffice.org/2000/drawing\" "
    "xmlns:xlink=\"http://www.w3.org/1999/xlink\"";

const char* kStyles =
    "<office:document-styles %NS% office:version=\"1.0\"><office:styles>"
    "<style:style style:name=\"Standard\" style:family=\"paragraph\"/>"
    "<style:style style:name=\"Heading\" style:family=\"paragraph\" "
    "style:parent-style-name=\"Standard\"><style:properties fo:font-weight=\"bold\"/>"
    "</style:style></office:styles></office:document-styles>";

std::string with_ns(std::string s) {
  auto at = s.find("%NS%");
  return s.replace(at, 4, kNamespaces);
}

}  // namespace

const std::vector<std::string>& case_colors() {
  static const std::vector<std::string> colors = {"#ffff00", "#00FF00", "#ff0000", "#0000Ff"};
  return colors;
}

std::string case_content(const std::string& body) {
  std::string xml = "<office:document-content " + std::string(kNamespaces) +
                    " office:version=\"1.0\"><office:automatic-styles>"
                    "<style:style style:name=\"P1\" style:family=\"paragraph\" "
                    "style:parent-style-name=\"Heading\"/>";
  for (std::size_t i = 0; i < case_colors().size(); ++i)
    xml += "<style:style style:name=\"C" + std::to_string(i) +
           "\" style:family=\"text\"><style:properties style:text-background-color=\"" +
           case_colors()[i] + "\"/></style:style>";
  return xml + "</office:automatic-styles><office:body>" + body +
         "</office:body></office:document-content>";
}

ColorCase random_color_case(std::mt19937& rng) {
  const auto& colors = case_colors();
  std::string xml;
  std::map<std::string, std::size_t> runs, diagnoses;
  int word = 0;
  int sections = uniform(rng, 1, 3);
  for (int s = 0; s < sections; ++s) {
    xml += "<text:p text:style-name=\"P1\">Befund " + std::to_string(s + 1) + ":</text:p><text:p>";
    int spans = uniform(rng, 0, 4);
    for (int k = 0; k < spans; ++k) {
      std::size_t c = static_cast<std::size_t>(uniform(rng, 0, 3));
      xml += "<text:span text:style-name=\"C" + std::to_string(c) + "\">Befund" +
             std::to_string(++word) + "</text:span> und ";
      ++runs[to_lower_ascii(colors[c])];
    }
    xml += "Ende.</text:p>";
  }
  xml += "<text:p text:style-name=\"P1\">Diagnosen:</text:p><text:unordered-list>";
  int items = uniform(rng, 1, 4);
  for (int k = 0; k < items; ++k) {
    std::string name = "Diagnose " + std::to_string(k + 1);
    if (chance(rng, 0.7)) {
      std::size_t c = static_cast<std::size_t>(uniform(rng, 0, 3));
      xml += "<text:list-item><text:p><text:span text:style-name=\"C" + std::to_string(c) +
             "\">" + name + "</text:span></text:p></text:list-item>";
      ++diagnoses[to_lower_ascii(colors[c])];
    } else {
      xml += "<text:list-item><text:p>" + name + "</text:p></text:list-item>";
    }
  }
  xml += "</text:unordered-list>";

  ColorCase out{case_content(xml), 0};
  for (const auto& [color, count] : runs)
    if (auto it = diagnoses.find(color); it != diagnoses.end()) out.expected_relations += count * it->second;
  return out;
}

std::string case_container(const std::string& content_xml,
                           const std::vector<std::pair<std::string, std::string>>& extra) {
  std::vector<std::pair<std::string, std::string>> entries = {
      {"mimetype", "application/vnd.sun.xml.writer"},
      {"content.xml", content_xml},
      {"styles.xml", with_ns(kStyles)}};
  entries.insert(entries.end(), extra.begin(), extra.end());
  return make_zip(entries, true);
}

}  // namespace quarry::testing
