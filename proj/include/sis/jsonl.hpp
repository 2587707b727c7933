#pragma once

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

namespace sis::jsonl {

using Json = nlohmann::ordered_json;

// Integral doubles are stored as integers so integer-valued files round-trip byte for byte.
Json number(double v);

// Calls fn(json, line_number) for every non-blank line. Parse failures and exceptions
// thrown by fn are rethrown as DataError naming the file and 1-based line number.
void for_each_line(const std::string& path, const std::function<void(const Json&, std::size_t)>& fn);

void write_lines(const std::string& path, const std::vector<std::string>& lines);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

// Typed field accessors that raise DataError with the field name on mismatch.
double get_number(const Json& j, const char* key);
long long get_int(const Json& j, const char* key);
std::string get_string(const Json& j, const char* key);
const Json& get_array(const Json& j, const char* key);

}  // namespace sis::jsonl
