#include <expat.h>

#include <climits>
#include <memory>

#include "quarry/docmodel.hpp"
#include "quarry/text.hpp"
#include "quarry/zip.hpp"

namespace quarry {

namespace {

struct ParseState {
  XML_Parser parser = nullptr;
  DocumentBuilder builder;
  std::string pending;
  std::string error;
  long error_line = 0;
  long error_column = 0;

  void fail(const std::string& message) {
    if (!error.empty()) return;
    error = message;
    error_line = static_cast<long>(XML_GetCurrentLineNumber(parser));
    error_column = static_cast<long>(XML_GetCurrentColumnNumber(parser)) + 1;
    XML_StopParser(parser, XML_FALSE);
  }

  void flush_text() {
    if (pending.empty()) return;
    builder.add_text(std::move(pending));
    pending.clear();
  }
};

void XMLCALL on_start(void* data, const XML_Char* name, const XML_Char** atts) {
  auto* st = static_cast<ParseState*>(data);
  try {
    st->flush_text();
    st->builder.open_element(name);
    for (std::size_t i = 0; atts[i]; i += 2) {
      std::string_view key = atts[i];
      if (key == "xmlns") {
        st->builder.add_namespace_decl("", atts[i + 1]);
      } else if (key.starts_with("xmlns:")) {
        st->builder.add_namespace_decl(std::string(key.substr(6)), atts[i + 1]);
      }
    }
    for (std::size_t i = 0; atts[i]; i += 2) {
      std::string_view key = atts[i];
      if (key == "xmlns" || key.starts_with("xmlns:")) continue;
      st->builder.add_attribute(atts[i], atts[i + 1]);
    }
  } catch (const std::exception& e) {
    st->fail(e.what());
  }
}

void XMLCALL on_end(void* data, const XML_Char*) {
  auto* st = static_cast<ParseState*>(data);
  try {
    st->flush_text();
    st->builder.close_element();
  } catch (const std::exception& e) {
    st->fail(e.what());
  }
}

void XMLCALL on_chars(void* data, const XML_Char* s, int len) {
  static_cast<ParseState*>(data)->pending.append(s, static_cast<std::size_t>(len));
}

DocumentPtr parse_xml(std::string_view bytes, StyleTable fallback_styles,
                      std::map<std::string, std::string> resources) {
  ParseState st;
  std::unique_ptr<std::remove_pointer_t<XML_Parser>, decltype(&XML_ParserFree)> parser(
      XML_ParserCreate(nullptr), &XML_ParserFree);
  if (!parser) throw LoadError("xml: cannot create parser");
  st.parser = parser.get();
  XML_SetUserData(st.parser, &st);
  XML_SetElementHandler(st.parser, on_start, on_end);
  XML_SetCharacterDataHandler(st.parser, on_chars);

  constexpr std::size_t kChunk = 1u << 20;
  std::size_t offset = 0;
  do {
    std::size_t n = std::min(kChunk, bytes.size() - offset);
    bool last = offset + n == bytes.size();
    if (XML_Parse(st.parser, bytes.data() + offset, static_cast<int>(n), last) ==
        XML_STATUS_ERROR) {
      if (!st.error.empty()) throw LoadError("xml: " + st.error, st.error_line, st.error_column);
      throw LoadError(std::string("xml: ") + XML_ErrorString(XML_GetErrorCode(st.parser)),
                      static_cast<long>(XML_GetCurrentLineNumber(st.parser)),
                      static_cast<long>(XML_GetCurrentColumnNumber(st.parser)) + 1);
    }
    offset += n;
  } while (offset < bytes.size());

  st.builder.set_styles(std::move(fallback_styles));
  st.builder.set_resources(std::move(resources));
  return st.builder.finish();
}

}  // namespace

DocumentPtr load_xml(std::string_view bytes) { return parse_xml(bytes, {}, {}); }

DocumentPtr load_office_container(std::string_view bytes) {
  auto entries = read_zip(bytes);
  auto content = entries.find("content.xml");
  if (content == entries.end()) throw LoadError("container: missing content.xml entry");

  StyleTable named;
  if (auto styles = entries.find("styles.xml"); styles != entries.end()) {
    DocumentPtr styles_doc;
    try {
      styles_doc = load_xml(styles->second);
    } catch (const LoadError& e) {
      throw LoadError(std::string("styles.xml: ") + e.what());
    }
    named = styles_doc->styles();
  }

  std::map<std::string, std::string> resources;
  for (auto& [name, data] : entries) {
    if (name.starts_with("Pictures/")) resources.emplace(name, std::move(data));
  }
  try {
    return parse_xml(content->second, std::move(named), std::move(resources));
  } catch (const LoadError& e) {
    throw LoadError(std::string("content.xml: ") + e.what());
  }
}

InputFormat detect_format(std::string_view bytes) {
  if (bytes.starts_with("PK")) return InputFormat::container;
  if (bytes.starts_with("\xEF\xBB\xBF")) bytes.remove_prefix(3);
  std::size_t i = 0;
  while (i < bytes.size() && is_space(bytes[i])) ++i;
  if (i < bytes.size() && bytes[i] == '<') return InputFormat::xml;
  throw LoadError("unrecognized input format (expected XML or a zip container)");
}

DocumentPtr load_document(std::string_view bytes, InputFormat format) {
  if (format == InputFormat::automatic) format = detect_format(bytes);
  return format == InputFormat::container ? load_office_container(bytes) : load_xml(bytes);
}

}  // namespace quarry
