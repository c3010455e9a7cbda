#pragma once

// Minimal RFC 4180 reader/writer shared by the text formats.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace tcal::csv {

struct Row {
  std::size_t line{};  // 1-based line where the record starts
  std::vector<std::string> fields;
};

// Splits a document into records. Blank lines are skipped; a leading UTF-8
// BOM and CRLF line endings are accepted. Throws MalformedRow on an
// unterminated quote.
std::vector<Row> read(std::string_view document);

// Quotes a field only when it contains a separator, quote or line break.
std::string quote(std::string_view field);

}  // namespace tcal::csv
