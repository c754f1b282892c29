#include "edmlift/pipeline/format.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "edmlift/core/error.hpp"

namespace edmlift::pipeline {

std::string format9(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

double round9(double value) { return std::strtod(format9(value).c_str(), nullptr); }

nlohmann::json round_floats(const nlohmann::json& doc) {
  if (doc.is_number_float()) return round9(doc.get<double>());
  if (doc.is_array() || doc.is_object()) {
    nlohmann::json out = doc;
    for (auto& item : out) item = round_floats(item);
    return out;
  }
  return doc;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "' for writing");
  out << text;
  out.close();
  if (!out) throw Error(ErrorCode::kIo, "failed writing '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string json_document(const nlohmann::json& doc) { return round_floats(doc).dump(2) + "\n"; }

std::string json_line(const nlohmann::json& doc) { return round_floats(doc).dump(); }

}  // namespace edmlift::pipeline
