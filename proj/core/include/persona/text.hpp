#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace persona::text {

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

// Lowercased alphanumeric word tokens; everything else is a separator.
std::vector<std::string> tokenize_words(std::string_view s);

// "2024-01-02T03:04:05Z" <-> UTC epoch seconds.
std::optional<std::int64_t> parse_iso8601(std::string_view s);
std::string format_iso8601(std::int64_t epoch_seconds);

// Fixed 6-significant-digit formatting used by every report CSV so that
// outputs diff stably across runs and machines.
std::string format_sig6(double v);

} // namespace persona::text
