#pragma once

// Single include point for cpp-httplib so feature macros stay consistent
// across translation units.

#ifdef FLOODLENS_WITH_TLS
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif

#include <httplib.h>

#include <string>
#include <utility>

namespace floodlens {

// "http://host:port/v1" -> ("http://host:port", "/v1"); trailing slash dropped.
std::pair<std::string, std::string> split_base_url(const std::string& base_url);

} // namespace floodlens
