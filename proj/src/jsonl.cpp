#include "sis/jsonl.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "sis/errors.hpp"

namespace sis::jsonl {

Json number(double v) {
    if (std::isfinite(v) && std::floor(v) == v && std::abs(v) < 9.0e15)
        return Json(static_cast<long long>(v));
    return Json(v);
}

void for_each_line(const std::string& path, const std::function<void(const Json&, std::size_t)>& fn) {
    std::ifstream in(path);
    if (!in) throw DataError(fmt::format("{}: cannot open file", path));
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        Json j;
        try {
            j = Json::parse(line);
        } catch (const Json::parse_error& e) {
            throw DataError(fmt::format("{}:{}: malformed JSON: {}", path, lineno, e.what()));
        }
        try {
            fn(j, lineno);
        } catch (const DataError& e) {
            throw DataError(fmt::format("{}:{}: {}", path, lineno, e.what()));
        } catch (const std::exception& e) {
            throw DataError(fmt::format("{}:{}: {}", path, lineno, e.what()));
        }
    }
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
    std::string out;
    for (const auto& l : lines) {
        out += l;
        out += '\n';
    }
    write_file(path, out);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(fmt::format("{}: cannot open file", path));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError(fmt::format("{}: cannot open for writing", path));
    out << contents;
    if (!out) throw DataError(fmt::format("{}: write failed", path));
}

double get_number(const Json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_number()) throw DataError(fmt::format("field '{}' missing or not a number", key));
    return it->get<double>();
}

long long get_int(const Json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_number_integer())
        throw DataError(fmt::format("field '{}' missing or not an integer", key));
    return it->get<long long>();
}

std::string get_string(const Json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) throw DataError(fmt::format("field '{}' missing or not a string", key));
    return it->get<std::string>();
}

const Json& get_array(const Json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_array()) throw DataError(fmt::format("field '{}' missing or not an array", key));
    return *it;
}

}  // namespace sis::jsonl
