// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <atomic>
#include <chrono>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "finrag/error.hpp"
#include "finrag/sentiment.hpp"

using namespace finrag;

namespace {

// Local stub answering POST /complete; the handler decides the reply.
class Stub {
 public:
  explicit Stub(httplib::Server::Handler handler) {
    server_.Post("/complete", std::move(handler));
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~Stub() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/complete"; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

httplib::Server::Handler reply(std::string completion) {
  return [completion](const httplib::Request&, httplib::Response& res) {
    res.set_content(nlohmann::json{{"completion", completion}}.dump(), "application/json");
  };
}

ErrorCode code_of(const RemoteEndpoint& ep) {
  try {
    remote_classify(ep, "prompt");
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST_CASE("stub answering positive") {
  std::string seen;
  Stub stub([&seen](const httplib::Request& req, httplib::Response& res) {
    seen = nlohmann::json::parse(req.body).at("prompt").get<std::string>();
    res.set_content(R"({"completion": "positive"})", "application/json");
  });
  const auto r = remote_classify({stub.url(), 5.0, 1}, "Human: hi\n\nAssistant:");
  CHECK(r.label == SentimentLabel::kPositive);
  CHECK(r.raw_text == "positive");
  CHECK(seen == "Human: hi\n\nAssistant:");
}

TEST_CASE("free text with a predominant keyword") {
  Stub stub(reply("It is neutral, quite neutral, as neutral as a negative day can be."));
  RemoteProvider provider({stub.url(), 5.0, 2});
  const auto r = provider.classify({"q", nullptr, "p"});
  CHECK(r.label == SentimentLabel::kNeutral);
}

TEST_CASE("tied reply leaves the label empty") {
  Stub stub(reply("positive or negative"));
  const auto r = remote_classify({stub.url(), 5.0, 1}, "p");
  CHECK_FALSE(r.label);
}

TEST_CASE("timeout is a transport error") {
  Stub stub([](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(1500));
    res.set_content(R"({"completion": "positive"})", "application/json");
  });
  CHECK(code_of({stub.url(), 0.3, 1}) == ErrorCode::kTransport);
}

TEST_CASE("bad status and malformed body are transport errors") {
  Stub bad([](const httplib::Request&, httplib::Response& res) { res.status = 500; });
  CHECK(code_of({bad.url(), 5.0, 1}) == ErrorCode::kTransport);
  Stub junk([](const httplib::Request&, httplib::Response& res) { res.set_content("not json", "text/plain"); });
  CHECK(code_of({junk.url(), 5.0, 1}) == ErrorCode::kTransport);
}

TEST_CASE("unreachable endpoint") {
  int port = 0;
  {
    httplib::Server probe;
    port = probe.bind_to_any_port("127.0.0.1");
  }
  CHECK(code_of({"http://127.0.0.1:" + std::to_string(port) + "/x", 1.0, 1}) == ErrorCode::kTransport);
  CHECK_THROWS_AS(RemoteProvider({"ftp://host/x", 1.0, 1}), Error);
}

TEST_CASE("in-flight limit bounds concurrent requests") {
  std::atomic<int> now{0};
  std::atomic<int> peak{0};
  Stub stub([&](const httplib::Request&, httplib::Response& res) {
    const int n = ++now;
    int p = peak.load();
    while (n > p && !peak.compare_exchange_weak(p, n)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    --now;
    res.set_content(R"({"completion": "negative"})", "application/json");
  });
  RemoteProvider provider({stub.url(), 5.0, 2});
  std::vector<std::thread> threads;
  std::atomic<int> negatives{0};
  for (int i = 0; i < 6; ++i) {
    threads.emplace_back([&] {
      if (provider.classify({"q", nullptr, "p"}).label == SentimentLabel::kNegative) ++negatives;
    });
  }
  for (auto& t : threads) t.join();
  CHECK(negatives == 6);
  CHECK(peak <= 2);
}
