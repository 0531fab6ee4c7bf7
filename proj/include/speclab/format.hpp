#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace speclab {

/// Shortest decimal string that parses back to exactly the same double.
std::string fmt_double(double value);

/// Fixed-point with the given number of decimals (used for report tables).
std::string fmt_fixed(double value, int decimals);

/// Strict full-token double parse; rejects trailing characters and empty
/// input. Accepts the forms std::from_chars accepts (including "inf"/"nan",
/// which callers typically reject separately via std::isfinite).
bool parse_double(std::string_view token, double& out);

/// Strict full-token non-negative integer parse.
bool parse_u64(std::string_view token, std::uint64_t& out);

/// Split on a single-character separator; keeps empty fields.
std::vector<std::string_view> split(std::string_view line, char sep);

}  // namespace speclab
