#include "toolrag/spl.hpp"

#include <charconv>
#include <map>
#include <memory>

#include "toolrag/error.hpp"
#include "toolrag/text.hpp"

namespace toolrag {

namespace {

// Just enough XML for SPL: elements, attributes, text, CDATA, comments and
// the five predefined entities plus numeric references.
struct XmlNode {
  std::string name;  // local name, namespace prefix stripped
  std::map<std::string, std::string> attributes;
  struct Child {
    std::unique_ptr<XmlNode> element;
    std::string text;
  };
  std::vector<Child> children;

  const XmlNode* child(std::string_view local) const {
    for (const auto& c : children) {
      if (c.element && c.element->name == local) return c.element.get();
    }
    return nullptr;
  }
};

void append_utf8(std::string& out, unsigned long cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x110000) {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string decode_entities(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '&') {
      out.push_back(s[i]);
      continue;
    }
    std::size_t semi = s.find(';', i);
    if (semi == std::string_view::npos || semi - i > 10) {
      out.push_back('&');
      continue;
    }
    std::string_view entity = s.substr(i + 1, semi - i - 1);
    if (entity == "amp") {
      out.push_back('&');
    } else if (entity == "lt") {
      out.push_back('<');
    } else if (entity == "gt") {
      out.push_back('>');
    } else if (entity == "quot") {
      out.push_back('"');
    } else if (entity == "apos") {
      out.push_back('\'');
    } else if (entity.size() > 1 && entity[0] == '#') {
      unsigned long cp = 0;
      bool hex = entity[1] == 'x' || entity[1] == 'X';
      std::string_view digits = entity.substr(hex ? 2 : 1);
      auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), cp, hex ? 16 : 10);
      if (ec != std::errc() || ptr != digits.data() + digits.size()) {
        out.append(s.substr(i, semi - i + 1));
      } else {
        append_utf8(out, cp);
      }
    } else {
      out.append(s.substr(i, semi - i + 1));
    }
    i = semi;
  }
  return out;
}

class XmlParser {
 public:
  explicit XmlParser(std::string_view input) : s_(input) {}

  std::unique_ptr<XmlNode> parse_document() {
    skip_misc();
    if (pos_ >= s_.size() || s_[pos_] != '<') fail("expected root element");
    auto root = parse_element(0);
    skip_misc();
    if (pos_ != s_.size()) fail("content after root element");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& message) const {
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i < std::min(pos_, s_.size()); ++i) {
      if (s_[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ParseError("xml: " + message, line, column);
  }

  bool starts(std::string_view token) const { return s_.substr(pos_, token.size()) == token; }

  void skip_until(std::string_view terminator) {
    std::size_t end = s_.find(terminator, pos_);
    if (end == std::string_view::npos) fail("unterminated construct, expected '" + std::string(terminator) + "'");
    pos_ = end + terminator.size();
  }

  void skip_space() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  void skip_misc() {
    for (;;) {
      skip_space();
      if (starts("<?")) {
        skip_until("?>");
      } else if (starts("<!--")) {
        skip_until("-->");
      } else if (starts("<!DOCTYPE") || starts("<!doctype")) {
        skip_until(">");
      } else {
        return;
      }
    }
  }

  std::string read_name() {
    std::size_t start = pos_;
    while (pos_ < s_.size()) {
      char c = s_[pos_];
      if (std::isspace(static_cast<unsigned char>(c)) || c == '/' || c == '>' || c == '=') break;
      ++pos_;
    }
    if (pos_ == start) fail("expected a name");
    return std::string(s_.substr(start, pos_ - start));
  }

  static std::string local(const std::string& qualified) {
    auto colon = qualified.find(':');
    return colon == std::string::npos ? qualified : qualified.substr(colon + 1);
  }

  std::unique_ptr<XmlNode> parse_element(int depth) {
    if (depth > 256) fail("nesting too deep");
    ++pos_;  // '<'
    auto node = std::make_unique<XmlNode>();
    std::string qualified = read_name();
    node->name = local(qualified);
    for (;;) {
      skip_space();
      if (pos_ >= s_.size()) fail("unterminated start tag <" + qualified + ">");
      if (starts("/>")) {
        pos_ += 2;
        return node;
      }
      if (s_[pos_] == '>') {
        ++pos_;
        break;
      }
      std::string attr = local(read_name());
      skip_space();
      if (pos_ >= s_.size() || s_[pos_] != '=') fail("expected '=' after attribute " + attr);
      ++pos_;
      skip_space();
      if (pos_ >= s_.size() || (s_[pos_] != '"' && s_[pos_] != '\'')) fail("expected quoted attribute value");
      char quote = s_[pos_++];
      std::size_t end = s_.find(quote, pos_);
      if (end == std::string_view::npos) fail("unterminated attribute value");
      node->attributes[attr] = decode_entities(s_.substr(pos_, end - pos_));
      pos_ = end + 1;
    }

    for (;;) {
      if (pos_ >= s_.size()) fail("missing </" + qualified + ">");
      if (starts("</")) {
        pos_ += 2;
        std::string closing = read_name();
        if (closing != qualified) fail("mismatched </" + closing + ">, expected </" + qualified + ">");
        skip_space();
        if (pos_ >= s_.size() || s_[pos_] != '>') fail("malformed end tag");
        ++pos_;
        return node;
      }
      if (starts("<!--")) {
        skip_until("-->");
      } else if (starts("<![CDATA[")) {
        pos_ += 9;
        std::size_t end = s_.find("]]>", pos_);
        if (end == std::string_view::npos) fail("unterminated CDATA");
        node->children.push_back({nullptr, std::string(s_.substr(pos_, end - pos_))});
        pos_ = end + 3;
      } else if (starts("<?")) {
        skip_until("?>");
      } else if (s_[pos_] == '<') {
        node->children.push_back({parse_element(depth + 1), {}});
      } else {
        std::size_t end = s_.find('<', pos_);
        if (end == std::string_view::npos) end = s_.size();
        node->children.push_back({nullptr, decode_entities(s_.substr(pos_, end - pos_))});
        pos_ = end;
      }
    }
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

bool is_block(const std::string& name) {
  return name == "paragraph" || name == "list" || name == "item" || name == "table" || name == "tr" ||
         name == "caption" || name == "br" || name == "section" || name == "title" || name == "thead" ||
         name == "tbody";
}

void collect_text(const XmlNode& node, std::string& out) {
  for (const auto& child : node.children) {
    if (!child.element) {
      out += child.text;
      continue;
    }
    const XmlNode& el = *child.element;
    bool block = is_block(el.name);
    if (block) out.push_back('\n');
    if (el.name == "td" || el.name == "th") out.push_back(' ');
    collect_text(el, out);
    if (block) out.push_back('\n');
  }
}

// Collapses whitespace inside lines and drops blank lines.
std::string tidy(const std::string& raw) {
  std::string out;
  for (const auto& line : text::split_lines(raw)) {
    std::string collapsed;
    bool space = false;
    for (char c : line) {
      if (std::isspace(static_cast<unsigned char>(c))) {
        space = !collapsed.empty();
        continue;
      }
      if (space) collapsed.push_back(' ');
      space = false;
      collapsed.push_back(c);
    }
    if (collapsed.empty()) continue;
    if (!out.empty()) out.push_back('\n');
    out += collapsed;
  }
  return out;
}

std::string text_of(const XmlNode& node) {
  std::string raw;
  collect_text(node, raw);
  return tidy(raw);
}

void collect_sections(const XmlNode& node, std::vector<SplSection>& out) {
  for (const auto& child : node.children) {
    if (!child.element) continue;
    const XmlNode& el = *child.element;
    if (el.name == "section") {
      SplSection section;
      if (const XmlNode* title = el.child("title")) section.title = text_of(*title);
      if (section.title.empty()) {
        if (const XmlNode* code = el.child("code")) {
          auto it = code->attributes.find("displayName");
          if (it != code->attributes.end()) section.title = it->second;
        }
      }
      if (const XmlNode* body = el.child("text")) section.narrative = text_of(*body);
      if (!section.title.empty() || !section.narrative.empty()) out.push_back(std::move(section));
    }
    collect_sections(el, out);
  }
}

const XmlNode* find_first(const XmlNode& node, std::string_view name) {
  for (const auto& child : node.children) {
    if (!child.element) continue;
    if (child.element->name == name) return child.element.get();
    if (const XmlNode* found = find_first(*child.element, name)) return found;
  }
  return nullptr;
}

const XmlNode* find_product_name(const XmlNode& node) {
  for (const auto& child : node.children) {
    if (!child.element) continue;
    const XmlNode& el = *child.element;
    if (el.name == "manufacturedProduct") {
      if (const XmlNode* name = el.child("name")) return name;
    }
    if (const XmlNode* found = find_product_name(el)) return found;
  }
  return nullptr;
}

}  // namespace

bool SplDocument::valid() const { return !set_id.empty() && version >= 1 && !sections.empty(); }

std::string SplDocument::render() const {
  std::string out = "DailyMed structured product label: " + drug_name + "\nSet ID: " + set_id +
                    "\nVersion: " + std::to_string(version) + "\n";
  for (const auto& section : sections) {
    out += "\n## " + section.title + "\n";
    if (!section.narrative.empty()) out += section.narrative + "\n";
  }
  return out;
}

SplDocument parse_spl_xml(std::string_view xml) {
  auto root = XmlParser(xml).parse_document();
  SplDocument doc;
  if (const XmlNode* set_id = root->child("setId")) {
    auto it = set_id->attributes.find("root");
    if (it != set_id->attributes.end()) doc.set_id = it->second;
  }
  if (const XmlNode* version = root->child("versionNumber")) {
    auto it = version->attributes.find("value");
    if (it != version->attributes.end()) {
      const std::string& v = it->second;
      auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), doc.version);
      if (ec != std::errc() || ptr != v.data() + v.size()) doc.version = 0;
    }
  }
  if (const XmlNode* name = find_product_name(*root)) {
    doc.drug_name = text_of(*name);
  } else if (const XmlNode* title = root->child("title")) {
    doc.drug_name = text_of(*title);
  }
  if (const XmlNode* body = find_first(*root, "structuredBody")) collect_sections(*body, doc.sections);

  if (doc.set_id.empty()) throw Error(ErrorCode::kSchemaError, "SPL document has no setId");
  if (doc.version < 1) throw Error(ErrorCode::kSchemaError, "SPL document has no valid versionNumber");
  if (doc.sections.empty()) throw Error(ErrorCode::kSchemaError, "SPL document has no sections");
  return doc;
}

}  // namespace toolrag
