#include "hexweb/io/json_writer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "hexweb/errors.hpp"

namespace hexweb::io {

namespace {

void put_string(std::string& out, const std::string& s) {
  out += Json(s).dump();
}

void put_double(std::string& out, double x) {
  if (!std::isfinite(x)) {
    out += "null";
    return;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  out += buf;
  // Keep the value a JSON float so readers do not narrow it to an integer.
  if (out.find_first_of(".eEn", out.size() - std::char_traits<char>::length(buf)) == std::string::npos) out += ".0";
}

void emit(std::string& out, const Json& j, int depth) {
  const std::string pad(2 * (depth + 1), ' ');
  const std::string close(2 * depth, ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad;
        put_string(out, it.key());
        out += ": ";
        emit(out, it.value(), depth + 1);
      }
      out += "\n" + close + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      bool first = true;
      for (const Json& e : j) {
        if (!first) out += ",\n";
        first = false;
        out += pad;
        emit(out, e, depth + 1);
      }
      out += "\n" + close + "]";
      return;
    }
    case Json::value_t::number_float: put_double(out, j.get<double>()); return;
    default: out += j.dump(); return;
  }
}

}  // namespace

std::string to_json_text(const Json& j) {
  std::string out;
  emit(out, j, 0);
  out += "\n";
  return out;
}

void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  f << to_json_text(j);
  if (!f) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

}  // namespace hexweb::io
