// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "finrag/error.hpp"
#include "finrag/sentiment.hpp"

namespace finrag {

namespace {

struct ParsedUrl {
  std::string scheme_host_port;
  std::string path;
};

ParsedUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos || url.compare(0, scheme_end, "http") != 0) {
    throw Error(ErrorCode::kConfig, "remote provider url must start with http://, got '" + url + "'");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

ProviderResponse remote_classify(const RemoteEndpoint& endpoint, std::string_view prompt) {
  const auto [base, path] = split_url(endpoint.url);
  httplib::Client client(base);
  const auto whole = static_cast<time_t>(std::floor(endpoint.timeout_seconds));
  const auto micros = static_cast<time_t>((endpoint.timeout_seconds - static_cast<double>(whole)) * 1e6);
  client.set_connection_timeout(whole, micros);
  client.set_read_timeout(whole, micros);
  client.set_write_timeout(whole, micros);

  const nlohmann::json body = {{"prompt", std::string(prompt)}};
  const auto result = client.Post(path, body.dump(), "application/json");
  if (!result) {
    throw Error(ErrorCode::kTransport,
                endpoint.url + ": " + httplib::to_string(result.error()));
  }
  if (result->status < 200 || result->status >= 300) {
    throw Error(ErrorCode::kTransport, endpoint.url + ": HTTP status " + std::to_string(result->status));
  }
  std::string completion;
  try {
    const auto reply = nlohmann::json::parse(result->body);
    completion = reply.at("completion").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kTransport, endpoint.url + ": malformed reply: " + e.what());
  }
  auto label = try_parse_sentiment(completion);
  return {std::move(completion), label};
}

RemoteProvider::RemoteProvider(RemoteEndpoint endpoint)
    : endpoint_(std::move(endpoint)),
      in_flight_(static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(endpoint_.max_in_flight, 1, 1024))) {
  split_url(endpoint_.url);
  if (!(endpoint_.timeout_seconds > 0.0)) throw Error(ErrorCode::kConfig, "timeout must be positive");
}

ProviderResponse RemoteProvider::classify(const ClassificationRequest& request) {
  in_flight_.acquire();
  struct Release {
    std::counting_semaphore<1024>& s;
    ~Release() { s.release(); }
  } release{in_flight_};
  return remote_classify(endpoint_, request.prompt);
}

}  // namespace finrag
