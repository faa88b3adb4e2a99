#include "twinpass/gateway.hpp"

#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "twinpass/errors.hpp"
#include "twinpass/mcq.hpp"

namespace twinpass {

using nlohmann::json;

namespace {

// Collapse whitespace runs to single spaces and trim; keeps cassette
// keys byte-stable across platforms and serializers.
std::string normalize_ws(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    bool in_run = false;
    for (char c : s) {
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            in_run = true;
            continue;
        }
        if (in_run && !out.empty()) out.push_back(' ');
        in_run = false;
        out.push_back(c);
    }
    return out;
}

}  // namespace

std::string canonical_request(const ChatRequest& req) {
    json j;  // nlohmann objects serialize with sorted keys
    j["model"] = req.model;
    json msgs = json::array();
    for (const auto& m : req.messages) {
        msgs.push_back({{"role", m.role}, {"content", normalize_ws(m.content)}});
    }
    j["messages"] = std::move(msgs);
    j["temperature"] = req.temperature;
    j["max_tokens"] = req.max_tokens;
    if (req.seed) j["seed"] = *req.seed;
    else j["seed"] = nullptr;
    j["pass_tag"] = req.pass_tag;
    return j.dump();
}

std::string request_key(const ChatRequest& req) {
    return sha256_hex(canonical_request(req));
}

// ---------------------------------------------------------------------------
// Cassette

Cassette Cassette::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open cassette file: " + path);
    Cassette c;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw IoError("cassette " + path + " line " + std::to_string(lineno) +
                          ": " + e.what());
        }
        c.entries_[j.at("key").get<std::string>()] =
            j.at("response_text").get<std::string>();
    }
    return c;
}

std::optional<std::string> Cassette::lookup(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void Cassette::insert(const std::string& key, const std::string& response_text) {
    entries_[key] = response_text;
}

// ---------------------------------------------------------------------------
// ReplayBackend

ChatResponse ReplayBackend::chat(const ChatRequest& req) {
    std::string key = request_key(req);
    auto text = cassette_.lookup(key);
    if (!text) throw CassetteMissError(key);
    ChatResponse resp;
    resp.text = *text;
    resp.model = req.model;
    resp.latency_ms = 0;
    resp.attempt_count = 1;
    return resp;
}

// ---------------------------------------------------------------------------
// LiveBackend

LiveBackend::LiveBackend(std::string base_url, std::string api_key, RetryPolicy retry)
    : base_url_(std::move(base_url)), api_key_(std::move(api_key)),
      retry_(std::move(retry)) {
    if (base_url_.empty()) throw ConfigError("live backend requires a base URL");
    while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
    if (!retry_.sleeper) {
        retry_.sleeper = [](std::chrono::milliseconds d) {
            std::this_thread::sleep_for(d);
        };
    }
}

ChatResponse LiveBackend::chat(const ChatRequest& req) {
    json body;
    body["model"] = req.model;
    json msgs = json::array();
    for (const auto& m : req.messages)
        msgs.push_back({{"role", m.role}, {"content", m.content}});
    body["messages"] = std::move(msgs);
    body["temperature"] = req.temperature;
    body["max_tokens"] = req.max_tokens;
    if (req.seed) body["seed"] = *req.seed;
    std::string payload = body.dump();

    httplib::Client client(base_url_);
    client.set_connection_timeout(30);
    client.set_read_timeout(300);
    httplib::Headers headers;
    if (!api_key_.empty())
        headers.emplace("Authorization", "Bearer " + api_key_);

    auto start = std::chrono::steady_clock::now();
    std::string last_error;
    auto backoff = retry_.initial_backoff;
    for (int attempt = 1; attempt <= retry_.max_attempts; ++attempt) {
        auto res = client.Post("/v1/chat/completions", headers, payload,
                               "application/json");
        if (!res) {
            last_error = "transport: " + httplib::to_string(res.error());
        } else if (res->status == 429 || res->status >= 500) {
            last_error = "status " + std::to_string(res->status);
        } else if (res->status < 200 || res->status >= 300) {
            throw StatusError(res->status, res->body.substr(0, 200));
        } else {
            json parsed;
            try {
                parsed = json::parse(res->body);
            } catch (const json::exception& e) {
                throw StatusError(res->status,
                                  std::string("unparseable body: ") + e.what());
            }
            ChatResponse out;
            out.text = parsed.at("choices").at(0).at("message").at("content")
                           .get<std::string>();
            out.model = parsed.value("model", req.model);
            out.attempt_count = attempt;
            out.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                 std::chrono::steady_clock::now() - start)
                                 .count();
            return out;
        }
        if (attempt < retry_.max_attempts) {
            retry_.sleeper(backoff);
            backoff = std::chrono::milliseconds(static_cast<long>(
                backoff.count() * retry_.backoff_multiplier));
        }
    }
    throw TransportError("chat call failed after " +
                             std::to_string(retry_.max_attempts) +
                             " attempts (" + last_error + ")",
                         retry_.max_attempts);
}

// ---------------------------------------------------------------------------
// RecordBackend

RecordBackend::RecordBackend(ChatBackend& inner, std::string cassette_path)
    : inner_(inner), cassette_path_(std::move(cassette_path)) {}

ChatResponse RecordBackend::chat(const ChatRequest& req) {
    ChatResponse resp = inner_.chat(req);

    json entry;
    entry["key"] = request_key(req);
    json summary;
    summary["model"] = req.model;
    summary["pass_tag"] = req.pass_tag;
    summary["temperature"] = req.temperature;
    summary["first_user_chars"] = req.messages.empty()
                                      ? ""
                                      : req.messages.front().content.substr(0, 80);
    entry["request_summary"] = std::move(summary);
    entry["response_text"] = resp.text;

    std::lock_guard<std::mutex> lock(write_mutex_);
    std::ofstream out(cassette_path_, std::ios::app);
    if (!out) throw IoError("cannot append to cassette: " + cassette_path_);
    out << entry.dump() << '\n';
    out.flush();
    return resp;
}

}  // namespace twinpass
