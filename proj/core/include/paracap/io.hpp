#pragma once

#include <nlohmann/json.hpp>

#include <string>
#include <string_view>

namespace paracap {

std::string read_text_file(const std::string& path);

/// Writes to "<path>.tmp" and renames over `path`.
void write_file_atomic(const std::string& path, std::string_view contents);

nlohmann::json read_json_file(const std::string& path);
void write_json_atomic(const std::string& path, const nlohmann::json& j);

} // namespace paracap
