// Copyright 2026 The Quark Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "quark/http.hpp"

#include <cstdlib>
#include <thread>

#if defined(QUARK_WITH_OPENSSL) && !defined(CPPHTTPLIB_OPENSSL_SUPPORT)
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include "httplib.h"
#include "quark/error.hpp"

namespace quark::http {

Endpoint parse_url(std::string_view url) {
  const auto sep = url.find("://");
  if (sep == std::string_view::npos) {
    throw ValidationError("URL '" + std::string(url) + "' has no scheme");
  }
  const std::string_view scheme = url.substr(0, sep);
  if (scheme != "http" && scheme != "https") {
    throw ValidationError("unsupported URL scheme '" + std::string(scheme) + "'");
  }
#ifndef QUARK_WITH_OPENSSL
  if (scheme == "https") throw ValidationError("https support was not compiled in");
#endif
  const std::string_view rest = url.substr(sep + 3);
  const auto slash = rest.find('/');
  const std::string_view host = rest.substr(0, slash);
  if (host.empty()) throw ValidationError("URL '" + std::string(url) + "' has no host");
  Endpoint ep;
  ep.origin = std::string(scheme) + "://" + std::string(host);
  ep.path = slash == std::string_view::npos ? "/" : std::string(rest.substr(slash));
  return ep;
}

nlohmann::json post_json(std::string_view url, const nlohmann::json& body,
                         const PostOptions& options) {
  const Endpoint ep = parse_url(url);
  httplib::Client client(ep.origin);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options.timeout);
  const auto usecs =
      std::chrono::duration_cast<std::chrono::microseconds>(options.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  httplib::Headers headers;
  if (options.bearer_token) headers.emplace("Authorization", "Bearer " + *options.bearer_token);
  const std::string payload = body.dump();

  std::string last_error;
  const int attempts = std::max(0, options.retries) + 1;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(options.backoff * attempt);
    auto res = client.Post(ep.path, headers, payload, "application/json");
    if (!res) {
      last_error = "request failed: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      last_error = "HTTP status " + std::to_string(res->status);
      continue;
    }
    try {
      return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string(url) + ": reply is not JSON (" + e.what() + ")");
    }
  }
  throw TransportError(std::string(url) + ": " + last_error + " after " +
                       std::to_string(attempts) + " attempt(s)");
}

std::optional<std::string> token_from_env(std::string_view var_name) {
  if (var_name.empty()) return std::nullopt;
  const char* v = std::getenv(std::string(var_name).c_str());
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

}  // namespace quark::http
