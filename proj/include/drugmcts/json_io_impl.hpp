#pragma once

// Template definitions for json_io.hpp.

#include <fstream>

#include "drugmcts/error.hpp"

namespace drugmcts::io {

template <class T, class Reader>
std::vector<T> read_jsonl(const std::filesystem::path& path, ReadContext& ctx, Reader&& reader) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<T> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw SchemaError(path.string(), line_no, std::string("invalid JSON: ") + e.what());
    }
    const auto before = ctx.warnings.size();
    try {
      out.push_back(reader(j, ctx));
    } catch (const SchemaError&) {
      throw;
    } catch (const std::exception& e) {
      throw SchemaError(path.string(), line_no, e.what());
    }
    for (auto i = before; i < ctx.warnings.size(); ++i) {
      ctx.warnings[i] = path.string() + ":" + std::to_string(line_no) + ": " + ctx.warnings[i];
    }
  }
  return out;
}

template <class T>
void write_jsonl(const std::filesystem::path& path, const std::vector<T>& records) {
  std::string buf;
  for (const auto& r : records) {
    buf += to_line(to_json(r));
    buf += '\n';
  }
  write_text(path, buf);
}

}  // namespace drugmcts::io
