#pragma once

#include <stdexcept>
#include <string>

namespace twinpass {

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// JSON extraction failed; carries the raw model text for audit.
struct ExtractionError : std::runtime_error {
    std::string raw_text;
    explicit ExtractionError(std::string raw)
        : std::runtime_error("no balanced JSON object found in model output"),
          raw_text(std::move(raw)) {}
};

struct AnswerParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TransportError : std::runtime_error {
    int attempt_count = 0;
    TransportError(const std::string& msg, int attempts)
        : std::runtime_error(msg), attempt_count(attempts) {}
};

struct StatusError : std::runtime_error {
    int status = 0;
    std::string body_excerpt;
    StatusError(int st, std::string excerpt)
        : std::runtime_error("HTTP status " + std::to_string(st) + ": " + excerpt),
          status(st), body_excerpt(std::move(excerpt)) {}
};

struct CassetteMissError : std::runtime_error {
    std::string key;
    explicit CassetteMissError(std::string k)
        : std::runtime_error("cassette miss for request key " + k), key(std::move(k)) {}
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace twinpass
