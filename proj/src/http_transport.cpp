#include "valuelens/http_transport.hpp"

#include "httplib.h"

namespace valuelens {

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path prefix without trailing slash
};

SplitUrl split_url(const std::string& base_url) {
  const auto scheme_end = base_url.find("://");
  const auto host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  const auto slash = base_url.find('/', host_start);
  SplitUrl out;
  if (slash == std::string::npos) {
    out.origin = base_url;
  } else {
    out.origin = base_url.substr(0, slash);
    out.prefix = base_url.substr(slash);
    while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
  }
  return out;
}

std::string join_path(const std::string& prefix, const std::string& path) {
  if (path.empty()) return prefix.empty() ? "/" : prefix;
  return prefix + (path.front() == '/' ? path : "/" + path);
}

httplib::Headers to_headers(const HttpHeaders& headers) {
  httplib::Headers out;
  for (const auto& [k, v] : headers) out.emplace(k, v);
  return out;
}

HttpResponse convert(const httplib::Result& res) {
  HttpResponse out;
  if (!res) {
    out.transport_error = httplib::to_string(res.error());
    return out;
  }
  out.status = res->status;
  out.body = res->body;
  for (const auto& [k, v] : res->headers) out.headers[k] = v;
  return out;
}

void configure(httplib::Client& cli, std::chrono::milliseconds timeout) {
  const auto secs = static_cast<time_t>(timeout.count() / 1000);
  const auto usecs = static_cast<time_t>((timeout.count() % 1000) * 1000);
  cli.set_connection_timeout(secs, usecs);
  cli.set_read_timeout(secs, usecs);
  cli.set_write_timeout(secs, usecs);
}

}  // namespace

HttpResponse http_post_json(const std::string& base_url, const std::string& path,
                            const std::string& body, const HttpHeaders& headers,
                            std::chrono::milliseconds timeout) {
  const auto url = split_url(base_url);
  httplib::Client cli(url.origin);
  if (!cli.is_valid()) return HttpResponse{0, {}, {}, "invalid base url '" + base_url + "'"};
  configure(cli, timeout);
  return convert(cli.Post(join_path(url.prefix, path), to_headers(headers), body, "application/json"));
}

HttpResponse http_get(const std::string& base_url, const std::string& path,
                      const HttpHeaders& headers, std::chrono::milliseconds timeout) {
  const auto url = split_url(base_url);
  httplib::Client cli(url.origin);
  if (!cli.is_valid()) return HttpResponse{0, {}, {}, "invalid base url '" + base_url + "'"};
  configure(cli, timeout);
  return convert(cli.Get(join_path(url.prefix, path), to_headers(headers)));
}

}  // namespace valuelens
