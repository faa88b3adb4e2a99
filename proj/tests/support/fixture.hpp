#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "twinpass/gateway.hpp"
#include "twinpass/mcq.hpp"
#include "twinpass/pipeline.hpp"

namespace twinpass::testing {

// Backend that answers from a handler function; used directly in unit
// tests and behind RecordBackend to build replay cassettes.
class ScriptedBackend : public ChatBackend {
  public:
    using Handler = std::function<std::string(const ChatRequest&)>;
    explicit ScriptedBackend(Handler h) : handler_(std::move(h)) {}
    ChatResponse chat(const ChatRequest& req) override {
        ChatResponse resp;
        resp.text = handler_(req);
        resp.model = req.model;
        return resp;
    }

  private:
    Handler handler_;
};

std::string gen_json(const std::string& answer, const std::string& reasoning,
                     const std::string& category, int confidence);
std::string eval_json(int score, const std::string& critique = "looks sound");

// The 10-item fixture: known-answer replay corpus covering a confident
// hallucination (critiques 1,2,2), a unanimous 5.0 consensus, a
// reasoning-loop case scored 2.0, a Pass 1 parse failure, and mixed
// mid-tier items including one critique pass that needs re-sampling.
struct Fixture {
    Dataset dataset;
    PipelineConfig config;
    // item id -> attempt-indexed Pass 1 responses
    std::map<std::string, std::vector<std::string>> gen_responses;
    // item id -> pass index -> attempt-indexed Pass 2 responses
    std::map<std::string, std::map<int, std::vector<std::string>>> eval_responses;

    ScriptedBackend::Handler handler() const;
};

Fixture make_fixture();

// Records every request the pipeline issues for the fixture dataset
// through record mode against the scripted handler.
void build_fixture_cassette(const Fixture& fx, const std::string& cassette_path);

// Writes the fixture dataset in canonical JSON-array form.
void write_fixture_dataset(const Fixture& fx, const std::string& path);

}  // namespace twinpass::testing
