#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

namespace taxoforge {

// Insertion-ordered so documents keep their field order on output.
using Json = nlohmann::ordered_json;

// Parses JSON text; syntax errors become Error{syntax} with line and column.
Json parse_json(std::string_view text, std::string_view what = "document");

// Canonical textual form: two-space indent and a trailing newline.
std::string dump(const Json& j);
// One line, no trailing newline (for JSONL).
std::string dump_line(const Json& j);

std::string read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, std::string_view content);

// Field accessors that raise Error{format} naming the field.
const Json& require(const Json& obj, std::string_view key, std::string_view what);
std::string require_string(const Json& obj, std::string_view key, std::string_view what);
std::string optional_string(const Json& obj, std::string_view key, std::string_view what);

}  // namespace taxoforge
