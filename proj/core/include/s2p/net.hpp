#pragma once

#include <string>
#include <string_view>

namespace s2p {

/// "http://host:port/path" split into the scheme+authority and the path.
struct UrlTarget {
  std::string base;
  std::string path;
};

UrlTarget split_url(std::string_view url);

}  // namespace s2p
