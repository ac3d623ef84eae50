#include <catch2/catch.hpp>

#include <atomic>
#include <cstdlib>
#include <thread>

#include "support/helpers.hpp"
#include "tritier/http_transport.hpp"

using namespace tritier;

namespace {

struct LocalServer {
    httplib::Server server;
    std::thread thread;
    int port = 0;

    ~LocalServer() { stop(); }

    void start() {
        port = server.bind_to_any_port("127.0.0.1");
        REQUIRE(port > 0);
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }

    void stop() {
        if (thread.joinable()) {
            server.stop();
            thread.join();
        }
    }

    std::string url() const { return "http://127.0.0.1:" + std::to_string(port); }
};

ModelEndpoint endpoint_for(const LocalServer& s) {
    ModelEndpoint ep;
    ep.provider = "test";
    ep.model_name = "m1";
    ep.base_url = s.url();
    ep.credentials_ref = "TRITIER_API_KEY_TEST";
    ep.requests_per_minute = 100000;
    return ep;
}

}  // namespace

TEST_CASE("http transport speaks the chat-completions wire format") {
    ::setenv("TRITIER_API_KEY_TEST", "test-key-123", 1);
    LocalServer s;
    std::string seen_auth, seen_body;
    s.server.Post("/v1/chat/completions",
                  [&](const httplib::Request& req, httplib::Response& res) {
                      seen_auth = req.get_header_value("Authorization");
                      seen_body = req.body;
                      json reply;
                      reply["choices"][0]["message"]["role"] = "assistant";
                      reply["choices"][0]["message"]["content"] = "server says hi";
                      reply["usage"]["prompt_tokens"] = 12;
                      reply["usage"]["completion_tokens"] = 5;
                      res.set_content(reply.dump(), "application/json");
                  });
    s.start();

    Gateway gw(make_http_transport(), RetryPolicy{}, [](double) {});
    ModelRequest req;
    req.system_text = "sys prompt";
    req.user_text = "hello";
    req.temperature = 0.5;
    req.max_output_tokens = 128;
    req.image = ImagePayload{"image/jpeg", {0xFF, 0xD8, 0x01, 0x02}};

    const auto resp = gw.send(endpoint_for(s), req);
    CHECK(resp.text == "server says hi");
    REQUIRE(resp.usage.has_value());
    CHECK(resp.usage->input == 12);
    CHECK(resp.usage->output == 5);
    CHECK(resp.latency_s >= 0.0);

    CHECK(seen_auth == "Bearer test-key-123");
    const json body = json::parse(seen_body);
    CHECK(body.at("model") == "m1");
    CHECK(body.at("max_tokens") == 128);
    CHECK(body.at("temperature") == Approx(0.5));
    REQUIRE(body.at("messages").size() == 2);
    CHECK(body["messages"][0]["role"] == "system");
    CHECK(body["messages"][1]["role"] == "user");
    const std::string url = body["messages"][1]["content"][1]["image_url"]["url"];
    CHECK(url.rfind("data:image/jpeg;base64,", 0) == 0);
    CHECK(url.substr(url.find(',') + 1) == "/9gBAg==");  // base64 of ff d8 01 02
}

TEST_CASE("http transport maps provider failures onto retry semantics") {
    ::setenv("TRITIER_API_KEY_TEST", "test-key-123", 1);
    SECTION("5xx is retried until success") {
        LocalServer s;
        std::atomic<int> hits{0};
        s.server.Post("/v1/chat/completions",
                      [&](const httplib::Request&, httplib::Response& res) {
                          if (++hits < 3) {
                              res.status = 503;
                              return;
                          }
                          json reply;
                          reply["choices"][0]["message"]["content"] = "third time lucky";
                          res.set_content(reply.dump(), "application/json");
                      });
        s.start();
        Gateway gw(make_http_transport(), RetryPolicy{5, 0.001, 2.0, 0.0}, [](double) {});
        const auto resp = gw.send(endpoint_for(s), {});
        CHECK(resp.text == "third time lucky");
        CHECK(resp.attempts == 3);
        CHECK(hits == 3);
    }
    SECTION("401 surfaces as an auth error without retries") {
        LocalServer s;
        std::atomic<int> hits{0};
        s.server.Post("/v1/chat/completions",
                      [&](const httplib::Request&, httplib::Response& res) {
                          ++hits;
                          res.status = 401;
                      });
        s.start();
        Gateway gw(make_http_transport(), RetryPolicy{5, 0.001, 2.0, 0.0}, [](double) {});
        CHECK_THROWS_MATCHES(gw.send(endpoint_for(s), {}), Error,
                             Catch::Matchers::Predicate<Error>(
                                 [](const Error& e) { return e.code() == Errc::auth; }));
        CHECK(hits == 1);
    }
    SECTION("missing credentials fail before any network traffic") {
        LocalServer s;
        std::atomic<int> hits{0};
        s.server.Post("/v1/chat/completions",
                      [&](const httplib::Request&, httplib::Response& res) {
                          ++hits;
                          res.status = 200;
                      });
        s.start();
        ::unsetenv("TRITIER_API_KEY_ABSENT");
        ModelEndpoint ep = endpoint_for(s);
        ep.credentials_ref = "TRITIER_API_KEY_ABSENT";
        Gateway gw(make_http_transport(), RetryPolicy{}, [](double) {});
        CHECK_THROWS_AS(gw.send(ep, {}), Error);
        CHECK(hits == 0);
    }
}

TEST_CASE("record mode captures live traffic; replay works offline") {
    ::setenv("TRITIER_API_KEY_TEST", "test-key-123", 1);
    testutil::TempDir tmp("http_rec");
    ModelRequest req;
    req.system_text = "sys";
    req.user_text = "record me";

    std::string live_text;
    ModelEndpoint ep;
    {
        LocalServer s;
        s.server.Post("/v1/chat/completions",
                      [&](const httplib::Request&, httplib::Response& res) {
                          json reply;
                          reply["choices"][0]["message"]["content"] = "live payload";
                          res.set_content(reply.dump(), "application/json");
                      });
        s.start();
        ep = endpoint_for(s);
        Gateway recording(
            std::make_shared<RecordTransport>(make_http_transport(), RecordingStore(tmp.path())),
            RetryPolicy{}, [](double) {});
        live_text = recording.send(ep, req).text;
        CHECK(live_text == "live payload");
    }
    // Server gone; replay must answer from the store alone.
    Gateway replaying(std::make_shared<ReplayTransport>(RecordingStore(tmp.path())),
                      RetryPolicy{}, [](double) {});
    const auto replayed = replaying.send(ep, req);
    CHECK(replayed.text == live_text);
    ModelRequest unseen = req;
    unseen.user_text = "never recorded";
    CHECK_THROWS_MATCHES(replaying.send(ep, unseen), Error, Catch::Matchers::Predicate<Error>(
        [](const Error& e) { return e.code() == Errc::replay_miss; }));
}
