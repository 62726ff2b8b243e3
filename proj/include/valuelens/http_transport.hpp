#pragma once

#include <chrono>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace valuelens {

struct HttpResponse {
  int status = 0;  // 0 when the request never got a response
  std::string body;
  std::map<std::string, std::string> headers;
  std::string transport_error;

  bool transport_failed() const { return status == 0; }
};

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;

/// POSTs a JSON body to base_url + path. `base_url` may carry a path prefix
/// ("http://host:8000/v1").
HttpResponse http_post_json(const std::string& base_url, const std::string& path,
                            const std::string& body, const HttpHeaders& headers,
                            std::chrono::milliseconds timeout);

HttpResponse http_get(const std::string& base_url, const std::string& path,
                      const HttpHeaders& headers, std::chrono::milliseconds timeout);

}  // namespace valuelens
