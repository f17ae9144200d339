#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace toolrag {

struct SplSection {
  std::string title;      // verbatim from the label
  std::string narrative;  // text content, paragraphs separated by newlines

  bool operator==(const SplSection&) const = default;
};

/// A Structured Product Label as returned by DailyMed.
struct SplDocument {
  std::string set_id;
  int version = 0;
  std::string drug_name;
  std::vector<SplSection> sections;

  /// set id non-empty, version >= 1, at least one section.
  bool valid() const;
  /// Full narrative text, the form handed to the model.
  std::string render() const;

  bool operator==(const SplDocument&) const = default;
};

/// Parses an SPL XML document. Sections are flattened in document order,
/// nested subsections following their parent. Throws ParseError on malformed
/// XML and SchemaError when the result would violate SplDocument invariants.
SplDocument parse_spl_xml(std::string_view xml);

}  // namespace toolrag
