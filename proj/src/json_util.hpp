#pragma once

#include <string>

#include <json.hpp>

namespace depsum::detail {

// One JSON Lines record. Invalid UTF-8 in transcript text is replaced rather
// than aborting the whole export.
inline std::string dump_line(const nlohmann::json& j) {
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

}  // namespace depsum::detail
