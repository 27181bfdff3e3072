#pragma once

#include <string>
#include <utility>

#include "ctp/error.hpp"

namespace ctp::detail {

/// Splits "http://host:port/base/path" into ("http://host:port", "/base/path").
inline std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw InvalidArgument("URL without scheme: " + url);
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, ""};
  std::string path = url.substr(slash);
  while (path.size() > 1 && path.back() == '/') path.pop_back();
  if (path == "/") path.clear();
  return {url.substr(0, slash), path};
}

}  // namespace ctp::detail
