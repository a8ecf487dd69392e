#pragma once

#include <initializer_list>
#include <string>

#include <json.hpp>

#include "histprep/core/time.hpp"

namespace histprep {

using Json = nlohmann::ordered_json;

/// Strict parsing support: unknown keys are configuration errors, never
/// silently ignored. `where` is the object's path for the message.
void require_keys_known(const Json& obj, std::initializer_list<const char*> allowed,
                        const std::string& where);

/// Duration from a JSON literal like "5s" or "1.5h".
Duration duration_from_json(const Json& v, const std::string& where);

/// Timestamp from an ISO-8601 JSON string.
Timestamp timestamp_from_json(const Json& v, const std::string& where);

Json load_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

} // namespace histprep
