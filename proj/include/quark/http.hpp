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

#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"

namespace quark::http {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // begins with '/'
};

// Throws ValidationError on anything but http:// or https:// URLs.
Endpoint parse_url(std::string_view url);

struct PostOptions {
  std::chrono::milliseconds timeout{60000};
  // Extra attempts after the first one.
  int retries = 2;
  std::chrono::milliseconds backoff{200};
  std::optional<std::string> bearer_token;
};

// POSTs `body` and returns the parsed JSON reply. Connection failures and
// non-2xx statuses are retried; the last failure is thrown as TransportError.
// A 2xx reply that is not JSON throws ParseError.
nlohmann::json post_json(std::string_view url, const nlohmann::json& body,
                         const PostOptions& options);

// Value of the named environment variable, if set and non-empty.
std::optional<std::string> token_from_env(std::string_view var_name);

}  // namespace quark::http
