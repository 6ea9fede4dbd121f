#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mathenc::detail {

struct MarkupEvent {
  enum class Kind { start_tag, end_tag, text };
  Kind kind = Kind::text;
  /// Lowercased local name (namespace prefix removed) for tags.
  std::string name;
  /// Entity-decoded character data for text events.
  std::string text;
  bool self_closing = false;
};

/// Splits markup into tag and text events. Comments, processing
/// instructions and doctype declarations are dropped; CDATA becomes text.
/// Throws Error(malformed_markup) on unterminated constructs.
std::vector<MarkupEvent> tokenize_markup(std::string_view markup);

std::string decode_entities(std::string_view text);

}  // namespace mathenc::detail
