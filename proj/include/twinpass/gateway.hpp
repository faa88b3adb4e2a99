#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace twinpass {

struct ChatMessage {
    std::string role;  // system | user | assistant
    std::string content;
};

struct ChatRequest {
    std::string model;
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    int max_tokens = 1024;
    std::optional<long> seed;
    // Distinguishes otherwise-identical stochastic requests (e.g.
    // "eval-pass-2") so each ensemble pass gets its own cassette slot.
    std::string pass_tag;
};

struct ChatResponse {
    std::string text;
    std::string model;
    long latency_ms = 0;
    int attempt_count = 1;
};

// Canonical JSON of the request (sorted keys, whitespace-normalized
// message content) — the preimage of the cassette key.
std::string canonical_request(const ChatRequest& req);

// SHA-256 hex of canonical_request.
std::string request_key(const ChatRequest& req);

struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds initial_backoff{500};
    double backoff_multiplier = 2.0;
    // Injectable for tests; defaults to std::this_thread::sleep_for.
    std::function<void(std::chrono::milliseconds)> sleeper;
};

class ChatBackend {
  public:
    virtual ~ChatBackend() = default;
    virtual ChatResponse chat(const ChatRequest& req) = 0;
};

// In-memory request-key -> response-text map with a JSONL file form:
// one {key, request_summary, response_text} object per line, append-only.
class Cassette {
  public:
    Cassette() = default;
    static Cassette load(const std::string& path);

    std::optional<std::string> lookup(const std::string& key) const;
    void insert(const std::string& key, const std::string& response_text);
    size_t size() const { return entries_.size(); }

  private:
    std::unordered_map<std::string, std::string> entries_;
};

// Replays recorded responses; any unrecorded request is a
// CassetteMissError, never a live call. Lookups are read-only after
// load, safe from any thread.
class ReplayBackend : public ChatBackend {
  public:
    explicit ReplayBackend(Cassette cassette) : cassette_(std::move(cassette)) {}
    ChatResponse chat(const ChatRequest& req) override;

  private:
    const Cassette cassette_;
};

// OpenAI-compatible chat-completions client with bounded retry.
class LiveBackend : public ChatBackend {
  public:
    LiveBackend(std::string base_url, std::string api_key, RetryPolicy retry = {});
    ChatResponse chat(const ChatRequest& req) override;

  private:
    std::string base_url_;
    std::string api_key_;
    RetryPolicy retry_;
};

// Forwards to an inner backend and appends each (key, response) pair to
// a cassette file. Appends are serialized and flushed per entry.
class RecordBackend : public ChatBackend {
  public:
    RecordBackend(ChatBackend& inner, std::string cassette_path);
    ChatResponse chat(const ChatRequest& req) override;

  private:
    ChatBackend& inner_;
    std::string cassette_path_;
    std::mutex write_mutex_;
};

}  // namespace twinpass
