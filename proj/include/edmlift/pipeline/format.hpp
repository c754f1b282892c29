#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

namespace edmlift::pipeline {

/// `value` rounded to 9 significant digits.
double round9(double value);
/// "%.9g" text of `value`.
std::string format9(double value);
/// Copy of `doc` with every floating-point number rounded to 9 significant digits.
nlohmann::json round_floats(const nlohmann::json& doc);

/// Writes `text` to `path`, throwing io errors with the path in the message.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// Pretty JSON document with rounded floats and a trailing newline.
std::string json_document(const nlohmann::json& doc);
/// Compact one-line JSON with rounded floats, no newline.
std::string json_line(const nlohmann::json& doc);

}  // namespace edmlift::pipeline
