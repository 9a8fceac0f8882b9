#pragma once

#include <cstdlib>
#include <string>

#include "hwocr/error.hpp"

namespace hwocr::detail {

struct UrlParts {
  std::string origin;  ///< scheme://host[:port]
  std::string path;    ///< starts with '/'
};

inline UrlParts split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::InvalidConfig, "endpoint must include a scheme: " + url);
  }
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

/// Empty when the variable name is empty or unset.
inline std::string read_secret(const std::string& env_name) {
  if (env_name.empty()) return {};
  const char* value = std::getenv(env_name.c_str());
  return value ? std::string(value) : std::string();
}

}  // namespace hwocr::detail
