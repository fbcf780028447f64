#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace memocr {

inline constexpr std::string_view kUnknownAnswer = "UNKNOWN";

// Content of the last balanced \boxed{...} in `text`.
std::optional<std::string> extract_boxed(std::string_view text);

std::string boxed(std::string_view inner);

// Lowercase, drop ASCII punctuation, collapse whitespace, trim.
std::string normalize_answer(std::string_view text);

// Sub-word exact match: some normalized gold is a contiguous substring of the
// normalized prediction (boxed content when present).
bool sem_match(std::string_view prediction, const std::vector<std::string>& golds);

}  // namespace memocr
