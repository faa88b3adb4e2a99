#include <doctest.h>

#include <atomic>
#include <cstdio>
#include <thread>

#include <httplib.h>

#include "support/fixture.hpp"
#include "twinpass/errors.hpp"
#include "twinpass/gateway.hpp"

using namespace twinpass;
using nlohmann::json;

namespace {

ChatRequest sample_request(const std::string& pass_tag = "gen") {
    ChatRequest req;
    req.model = "gemma-3-4b";
    req.messages = {{"user", "hello world"}};
    req.temperature = 0.7;
    req.max_tokens = 256;
    req.pass_tag = pass_tag;
    return req;
}

}  // namespace

TEST_CASE("pass_tag distinguishes otherwise-identical requests") {
    auto a = sample_request("eval-pass-1");
    auto b = sample_request("eval-pass-2");
    CHECK(request_key(a) != request_key(b));
    CHECK(request_key(a) == request_key(a));
}

TEST_CASE("canonicalization normalizes message whitespace") {
    auto a = sample_request();
    auto b = sample_request();
    b.messages[0].content = "  hello \n\t world  ";
    CHECK(request_key(a) == request_key(b));
}

TEST_CASE("replay returns the recorded text verbatim, miss is typed") {
    auto req = sample_request();
    Cassette cassette;
    cassette.insert(request_key(req), "recorded answer");
    ReplayBackend replay(std::move(cassette));

    ChatResponse resp = replay.chat(req);
    CHECK(resp.text == "recorded answer");
    CHECK(resp.attempt_count == 1);

    auto other = sample_request("eval-pass-9");
    CHECK_THROWS_AS(replay.chat(other), CassetteMissError);
}

TEST_CASE("record then replay round-trips byte-identically") {
    std::string path = "tp_cassette_roundtrip.jsonl";
    std::remove(path.c_str());
    {
        testing::ScriptedBackend scripted(
            [](const ChatRequest& r) { return "resp:" + r.pass_tag; });
        RecordBackend recorder(scripted, path);
        for (int i = 1; i <= 3; ++i)
            recorder.chat(sample_request("eval-pass-" + std::to_string(i)));
    }
    ReplayBackend replay(Cassette::load(path));
    for (int i = 1; i <= 3; ++i) {
        auto resp = replay.chat(sample_request("eval-pass-" + std::to_string(i)));
        CHECK(resp.text == "resp:eval-pass-" + std::to_string(i));
    }
    std::remove(path.c_str());
}

TEST_CASE("live backend retries 5xx with non-decreasing backoff, caps attempts") {
    httplib::Server server;
    std::atomic<int> hits{0};
    server.Post("/v1/chat/completions",
                [&](const httplib::Request& req, httplib::Response& res) {
                    int n = ++hits;
                    json body = json::parse(req.body);
                    CHECK(body["model"] == "gemma-3-4b");
                    CHECK(req.get_header_value("Authorization") == "Bearer tok");
                    if (n < 3) {
                        res.status = 500;
                        return;
                    }
                    json out = {
                        {"model", "gemma-3-4b"},
                        {"choices",
                         {{{"message", {{"role", "assistant"}, {"content", "pong"}}}}}}};
                    res.set_content(out.dump(), "application/json");
                });
    int port = server.bind_to_any_port("127.0.0.1");
    std::thread th([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    std::vector<long> delays;
    RetryPolicy retry;
    retry.max_attempts = 3;
    retry.initial_backoff = std::chrono::milliseconds(1);
    retry.sleeper = [&](std::chrono::milliseconds d) { delays.push_back(d.count()); };

    LiveBackend live("http://127.0.0.1:" + std::to_string(port), "tok", retry);
    ChatResponse resp = live.chat(sample_request());
    CHECK(resp.text == "pong");
    CHECK(resp.attempt_count == 3);
    REQUIRE(delays.size() == 2);
    CHECK(delays[0] <= delays[1]);  // monotone non-decreasing backoff

    // a second request starts over from attempt 1
    resp = live.chat(sample_request("gen-2"));
    CHECK(resp.attempt_count == 1);
    server.stop();
    th.join();
}

TEST_CASE("live backend surfaces non-retryable status with body excerpt") {
    httplib::Server server;
    server.Post("/v1/chat/completions",
                [](const httplib::Request&, httplib::Response& res) {
                    res.status = 404;
                    res.set_content("model not found", "text/plain");
                });
    int port = server.bind_to_any_port("127.0.0.1");
    std::thread th([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    RetryPolicy retry;
    retry.initial_backoff = std::chrono::milliseconds(1);
    retry.sleeper = [](std::chrono::milliseconds) {};
    LiveBackend live("http://127.0.0.1:" + std::to_string(port), "tok", retry);
    try {
        live.chat(sample_request());
        FAIL("expected StatusError");
    } catch (const StatusError& e) {
        CHECK(e.status == 404);
        CHECK(e.body_excerpt.find("model not found") != std::string::npos);
    }
    server.stop();
    th.join();
}

TEST_CASE("transport failure after all retries is a TransportError with count") {
    RetryPolicy retry;
    retry.max_attempts = 2;
    retry.initial_backoff = std::chrono::milliseconds(1);
    retry.sleeper = [](std::chrono::milliseconds) {};
    // closed port
    LiveBackend live("http://127.0.0.1:9", "tok", retry);
    try {
        live.chat(sample_request());
        FAIL("expected TransportError");
    } catch (const TransportError& e) {
        CHECK(e.attempt_count == 2);
    }
}

TEST_CASE("cassette appends are serialized across concurrent recorders") {
    std::string path = "tp_cassette_concurrent.jsonl";
    std::remove(path.c_str());
    testing::ScriptedBackend scripted(
        [](const ChatRequest& r) { return "r:" + r.pass_tag; });
    RecordBackend recorder(scripted, path);

    std::vector<std::thread> threads;
    for (int t = 0; t < 4; ++t) {
        threads.emplace_back([&recorder, t] {
            for (int i = 0; i < 25; ++i) {
                recorder.chat(sample_request("t" + std::to_string(t) + "-" +
                                             std::to_string(i)));
            }
        });
    }
    for (auto& th : threads) th.join();

    Cassette c = Cassette::load(path);
    CHECK(c.size() == 100);
    std::remove(path.c_str());
}
