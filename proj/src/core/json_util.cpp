#include "histprep/core/json_util.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "histprep/core/errors.hpp"

namespace histprep {

void require_keys_known(const Json& obj, std::initializer_list<const char*> allowed,
                        const std::string& where) {
  if (!obj.is_object())
    throw ParseError(where + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) {
          return key == a;
        }) == allowed.end()) {
      std::ostringstream msg;
      msg << where << ": unknown key '" << key << "' (allowed:";
      for (const char* a : allowed) msg << ' ' << a;
      msg << ")";
      throw ParseError(msg.str());
    }
  }
}

Duration duration_from_json(const Json& v, const std::string& where) {
  if (!v.is_string())
    throw ParseError(where + ": expected a duration string like \"5s\"");
  try {
    return parse_duration(v.get<std::string>());
  } catch (const ParseError& e) {
    throw ParseError(where + ": " + e.what());
  }
}

Timestamp timestamp_from_json(const Json& v, const std::string& where) {
  if (!v.is_string())
    throw ParseError(where + ": expected an ISO-8601 timestamp string");
  try {
    return parse_iso8601(v.get<std::string>());
  } catch (const ParseError& e) {
    throw ParseError(where + ": " + e.what());
  }
}

Json load_json_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ParseError("cannot open '" + path + "'");
  try {
    return Json::parse(f);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write '" + path + "'");
  f << content;
  if (!f) throw Error("write failed for '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

} // namespace histprep
