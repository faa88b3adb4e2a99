#pragma once

#include <optional>
#include <string>
#include <vector>

#include "twinpass/gateway.hpp"
#include "twinpass/mcq.hpp"
#include "twinpass/prompts.hpp"
#include "twinpass/router.hpp"

namespace twinpass {

// Pass 1 output. answer_index/verbalized_confidence are empty when the
// model's output could not be parsed after all retries.
struct GenerationRecord {
    std::string question_id;
    std::optional<int> answer_index;  // 0-based
    std::string answer_raw;           // as emitted, e.g. "option 1"
    std::string reasoning;
    std::string category;
    std::optional<int> verbalized_confidence;  // 1..5
    std::string raw_text;
    std::string generator_model;

    bool parse_failed() const { return !answer_index.has_value(); }
};

// One blind critique pass. valid implies score in {1..5}.
struct EvalPass {
    int pass_index = 0;  // 1..N
    std::optional<int> score;
    std::string assumption_check;
    std::string self_explanation;
    bool valid = false;
    std::string raw_text;
    std::string evaluator_model;
};

// Aggregated critique scores; mean is the calibrated confidence E.
struct EnsembleResult {
    std::vector<int> scores;  // valid scores only
    int n_requested = 0;
    int n_valid = 0;
    std::optional<double> mean;
    std::optional<double> median;
    bool quorum_met = false;
};

enum class ItemStatus { done, failed_transport };

struct ItemResult {
    std::string item_id;
    std::string benchmark;
    GenerationRecord generation;
    std::optional<EnsembleResult> ensemble;
    bool correct = false;
    RouteDecision route;
    ItemStatus status = ItemStatus::done;
    std::string started_at;   // ISO-8601 UTC, empty under replay
    std::string finished_at;
    std::string error;        // transport failure detail
};

struct PipelineConfig {
    std::string generator_model = "gemma-3-4b";
    std::string evaluator_model = "gemma-3-4b";  // may differ (cross-model critique)
    int n_passes = 3;
    int quorum = 2;            // minimum valid critiques before scoring
    double gen_temperature = 0.0;
    double eval_temperature = 0.7;
    int parse_retries = 2;     // extra attempts on unparseable output
    int max_tokens = 1024;
    std::vector<std::string> categories{"General"};
    PromptTemplates templates = PromptTemplates::builtin();
    ThresholdMap thresholds = ThresholdMap::default_map();
    bool wall_clock_timestamps = true;  // off under replay for byte-stable runs

    static PipelineConfig from_file(const std::string& path);
};

// "option <k>" / "option_<k>" / bare integer, case-insensitive,
// 1-based on the wire; returns the 0-based index.
int parse_answer_label(const std::string& text, int n_options);

GenerationRecord run_pass1(ChatBackend& backend, const PipelineConfig& cfg,
                           const McqItem& item);

std::vector<EvalPass> run_pass2(ChatBackend& backend, const PipelineConfig& cfg,
                                const McqItem& item, const GenerationRecord& gen);

// Mean/median over valid scores only; empty scores yield a no-signal
// result, never a fabricated value.
EnsembleResult aggregate(const std::vector<EvalPass>& passes, int quorum);

// Full Algorithm: Pass 1, N blind critiques, aggregation, correctness,
// routing. Transport failures produce a failed_transport result rather
// than aborting the run.
ItemResult evaluate_item(ChatBackend& backend, const PipelineConfig& cfg,
                         const McqItem& item);

nlohmann::json item_result_to_json(const ItemResult& r);
ItemResult item_result_from_json(const nlohmann::json& j);

}  // namespace twinpass
