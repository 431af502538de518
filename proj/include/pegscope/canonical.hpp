#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

namespace pegscope {

using Json = nlohmann::json;

/// Canonical byte form: UTF-8 JSON, keys sorted lexicographically, no
/// insignificant whitespace, numbers as shortest round-trip decimals, no
/// trailing newline. Non-finite numbers are rejected.
std::string canonical_dump(const Json& value);

/// Parse-and-reserialize. A fixed point: canonicalize(canonicalize(x)) == canonicalize(x).
Json canonicalize(const Json& value);

/// Parses text that must already be in canonical form; throws ParseError otherwise.
Json parse_canonical(std::string_view bytes);

/// Lowercase hex SHA-256 of the given bytes.
std::string sha256_hex(std::string_view bytes);

/// Shortest decimal that round-trips to `value` (std::to_chars).
std::string shortest_decimal(double value);

}  // namespace pegscope
