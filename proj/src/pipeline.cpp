#include "twinpass/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <ctime>
#include <fstream>

#include "twinpass/errors.hpp"
#include "twinpass/json_extract.hpp"

namespace twinpass {

using nlohmann::json;

namespace {

std::string now_iso() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

ChatRequest make_request(const PipelineConfig& cfg, const std::string& model,
                         const std::string& prompt, double temperature,
                         const std::string& pass_tag) {
    ChatRequest req;
    req.model = model;
    req.messages.push_back({"user", prompt});
    req.temperature = temperature;
    req.max_tokens = cfg.max_tokens;
    req.pass_tag = pass_tag;
    return req;
}

}  // namespace

PipelineConfig PipelineConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open pipeline config: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("malformed pipeline config " + path + ": " + e.what());
    }
    PipelineConfig cfg;
    if (j.contains("generator_model")) cfg.generator_model = j["generator_model"];
    if (j.contains("evaluator_model")) cfg.evaluator_model = j["evaluator_model"];
    if (j.contains("n_passes")) cfg.n_passes = j["n_passes"];
    cfg.quorum = (cfg.n_passes + 1) / 2;
    if (j.contains("quorum")) cfg.quorum = j["quorum"];
    if (j.contains("gen_temperature")) cfg.gen_temperature = j["gen_temperature"];
    if (j.contains("eval_temperature")) cfg.eval_temperature = j["eval_temperature"];
    if (j.contains("parse_retries")) cfg.parse_retries = j["parse_retries"];
    if (j.contains("max_tokens")) cfg.max_tokens = j["max_tokens"];
    if (j.contains("categories"))
        cfg.categories = j["categories"].get<std::vector<std::string>>();
    if (j.contains("baseline_template") || j.contains("eval_template")) {
        if (!(j.contains("baseline_template") && j.contains("eval_template")))
            throw ConfigError("baseline_template and eval_template must be set together");
        cfg.templates = PromptTemplates::from_files(j["baseline_template"],
                                                    j["eval_template"]);
    }
    if (cfg.n_passes < 1) throw ConfigError("n_passes must be >= 1");
    if (cfg.quorum < 1 || cfg.quorum > cfg.n_passes)
        throw ConfigError("quorum must be in [1, n_passes]");
    if (cfg.gen_temperature < 0 || cfg.eval_temperature < 0)
        throw ConfigError("temperatures must be >= 0");
    return cfg;
}

int parse_answer_label(const std::string& text, int n_options) {
    std::string t = lower(text);
    // trim
    auto b = t.find_first_not_of(" \t\r\n\".");
    auto e = t.find_last_not_of(" \t\r\n\".");
    if (b == std::string::npos)
        throw AnswerParseError("empty answer label");
    t = t.substr(b, e - b + 1);

    size_t digits_at = std::string::npos;
    if (t.rfind("option", 0) == 0) {
        size_t p = 6;
        if (p < t.size() && (t[p] == ' ' || t[p] == '_')) ++p;
        digits_at = p;
    } else if (!t.empty() && std::isdigit(static_cast<unsigned char>(t[0]))) {
        digits_at = 0;
    }
    if (digits_at == std::string::npos || digits_at >= t.size() ||
        !std::isdigit(static_cast<unsigned char>(t[digits_at])))
        throw AnswerParseError("unrecognized answer label: \"" + text + "\"");

    size_t end = digits_at;
    while (end < t.size() && std::isdigit(static_cast<unsigned char>(t[end]))) ++end;
    if (end != t.size())
        throw AnswerParseError("unrecognized answer label: \"" + text + "\"");

    int k = std::stoi(t.substr(digits_at, end - digits_at));
    if (k < 1 || k > n_options)
        throw AnswerParseError("answer label \"" + text + "\" out of range for " +
                               std::to_string(n_options) + " options");
    return k - 1;
}

GenerationRecord run_pass1(ChatBackend& backend, const PipelineConfig& cfg,
                           const McqItem& item) {
    std::string prompt = build_baseline_prompt(cfg.templates, item, cfg.categories);

    GenerationRecord rec;
    rec.question_id = item.id;
    rec.generator_model = cfg.generator_model;

    for (int attempt = 0; attempt <= cfg.parse_retries; ++attempt) {
        std::string tag = attempt == 0 ? "gen" : "gen-retry-" + std::to_string(attempt);
        ChatRequest req = make_request(cfg, cfg.generator_model, prompt,
                                       cfg.gen_temperature, tag);
        ChatResponse resp = backend.chat(req);
        rec.raw_text = resp.text;

        try {
            json doc = extract_json(resp.text);
            if (!doc.contains("answer") || !doc["answer"].is_string())
                throw ValidationError("missing answer");
            if (!doc.contains("confidence") || !doc["confidence"].is_number_integer())
                throw ValidationError("missing integer confidence");
            int conf = doc["confidence"].get<int>();
            if (conf < 1 || conf > 5) throw ValidationError("confidence out of 1..5");

            std::string answer_raw = doc["answer"].get<std::string>();
            int idx = parse_answer_label(answer_raw,
                                         static_cast<int>(item.options.size()));
            rec.answer_index = idx;
            rec.answer_raw = answer_raw;
            rec.reasoning = doc.value("reasoning", "");
            rec.category = doc.value("category", "");
            rec.verbalized_confidence = conf;
            return rec;
        } catch (const ExtractionError&) {
        } catch (const ValidationError&) {
        } catch (const AnswerParseError&) {
        }
        // fall through to retry with a fresh sample
    }
    // parse failure: answer_index/verbalized_confidence stay empty
    return rec;
}

std::vector<EvalPass> run_pass2(ChatBackend& backend, const PipelineConfig& cfg,
                                const McqItem& item, const GenerationRecord& gen) {
    std::string prompt = build_eval_prompt(cfg.templates, item, gen);

    std::vector<EvalPass> passes;
    passes.reserve(cfg.n_passes);
    for (int i = 1; i <= cfg.n_passes; ++i) {
        EvalPass pass;
        pass.pass_index = i;
        pass.evaluator_model = cfg.evaluator_model;

        for (int attempt = 0; attempt <= cfg.parse_retries; ++attempt) {
            std::string tag = "eval-pass-" + std::to_string(i);
            if (attempt > 0) tag += "-retry-" + std::to_string(attempt);
            ChatRequest req = make_request(cfg, cfg.evaluator_model, prompt,
                                           cfg.eval_temperature, tag);
            ChatResponse resp = backend.chat(req);
            pass.raw_text = resp.text;

            try {
                json doc = extract_json(resp.text);
                if (!doc.contains("self_eval_score") ||
                    !doc["self_eval_score"].is_number_integer())
                    throw ValidationError("missing integer self_eval_score");
                int score = doc["self_eval_score"].get<int>();
                // out-of-range scores are re-sampled, never clamped
                if (score < 1 || score > 5)
                    throw ValidationError("self_eval_score out of 1..5");
                pass.score = score;
                pass.assumption_check = doc.value("assumption_check", "");
                pass.self_explanation = doc.value("self_explanation", "");
                pass.valid = true;
                break;
            } catch (const ExtractionError&) {
            } catch (const ValidationError&) {
            }
        }
        passes.push_back(std::move(pass));
    }
    return passes;
}

EnsembleResult aggregate(const std::vector<EvalPass>& passes, int quorum) {
    EnsembleResult r;
    r.n_requested = static_cast<int>(passes.size());
    for (const auto& p : passes) {
        if (p.valid && p.score) r.scores.push_back(*p.score);
    }
    r.n_valid = static_cast<int>(r.scores.size());
    if (r.n_valid > 0) {
        double sum = 0;
        for (int s : r.scores) sum += s;
        r.mean = sum / r.n_valid;

        std::vector<int> sorted = r.scores;
        std::sort(sorted.begin(), sorted.end());
        size_t mid = sorted.size() / 2;
        r.median = sorted.size() % 2 ? static_cast<double>(sorted[mid])
                                     : (sorted[mid - 1] + sorted[mid]) / 2.0;
    }
    r.quorum_met = r.n_valid >= quorum && r.n_valid >= 1;
    return r;
}

ItemResult evaluate_item(ChatBackend& backend, const PipelineConfig& cfg,
                         const McqItem& item) {
    ItemResult result;
    result.item_id = item.id;
    result.benchmark = item.benchmark;
    if (cfg.wall_clock_timestamps) result.started_at = now_iso();

    try {
        result.generation = run_pass1(backend, cfg, item);
        if (result.generation.parse_failed()) {
            result.correct = false;
            result.route = route(std::nullopt, cfg.thresholds);
        } else {
            auto passes = run_pass2(backend, cfg, item, result.generation);
            EnsembleResult ens = aggregate(passes, cfg.quorum);
            result.correct =
                result.generation.answer_index.value() == item.answer_index;
            result.route = route(ens.quorum_met ? ens.mean : std::nullopt,
                                 cfg.thresholds);
            result.ensemble = std::move(ens);
        }
        result.status = ItemStatus::done;
    } catch (const TransportError& e) {
        result.status = ItemStatus::failed_transport;
        result.error = e.what();
        result.correct = false;
        result.route = route(std::nullopt, cfg.thresholds);
    }

    if (cfg.wall_clock_timestamps) result.finished_at = now_iso();
    return result;
}

// ---------------------------------------------------------------------------
// ItemResult serialization

json item_result_to_json(const ItemResult& r) {
    json j;
    j["item_id"] = r.item_id;
    j["benchmark"] = r.benchmark;
    j["status"] = r.status == ItemStatus::done ? "done" : "failed_transport";
    j["correct"] = r.correct;
    j["started_at"] = r.started_at;
    j["finished_at"] = r.finished_at;
    if (!r.error.empty()) j["error"] = r.error;

    json gen;
    gen["question_id"] = r.generation.question_id;
    if (r.generation.answer_index) gen["answer_index"] = *r.generation.answer_index;
    else gen["answer_index"] = nullptr;
    gen["answer_raw"] = r.generation.answer_raw;
    gen["reasoning"] = r.generation.reasoning;
    gen["category"] = r.generation.category;
    if (r.generation.verbalized_confidence)
        gen["verbalized_confidence"] = *r.generation.verbalized_confidence;
    else gen["verbalized_confidence"] = nullptr;
    gen["raw_text"] = r.generation.raw_text;
    gen["generator_model"] = r.generation.generator_model;
    j["generation"] = std::move(gen);

    if (r.ensemble) {
        json ens;
        ens["scores"] = r.ensemble->scores;
        ens["n_requested"] = r.ensemble->n_requested;
        ens["n_valid"] = r.ensemble->n_valid;
        if (r.ensemble->mean) ens["mean"] = *r.ensemble->mean;
        else ens["mean"] = nullptr;
        if (r.ensemble->median) ens["median"] = *r.ensemble->median;
        else ens["median"] = nullptr;
        ens["quorum_met"] = r.ensemble->quorum_met;
        j["ensemble"] = std::move(ens);
    } else {
        j["ensemble"] = nullptr;
    }

    json rt;
    rt["zone"] = to_string(r.route.zone);
    rt["action"] = to_string(r.route.action);
    if (r.route.ensemble_mean) rt["ensemble_mean"] = *r.route.ensemble_mean;
    else rt["ensemble_mean"] = nullptr;
    j["route"] = std::move(rt);
    return j;
}

ItemResult item_result_from_json(const json& j) {
    ItemResult r;
    r.item_id = j.at("item_id").get<std::string>();
    r.benchmark = j.value("benchmark", "");
    r.status = j.at("status").get<std::string>() == "done"
                   ? ItemStatus::done
                   : ItemStatus::failed_transport;
    r.correct = j.at("correct").get<bool>();
    r.started_at = j.value("started_at", "");
    r.finished_at = j.value("finished_at", "");
    r.error = j.value("error", "");

    const json& gen = j.at("generation");
    r.generation.question_id = gen.at("question_id").get<std::string>();
    if (!gen.at("answer_index").is_null())
        r.generation.answer_index = gen["answer_index"].get<int>();
    r.generation.answer_raw = gen.value("answer_raw", "");
    r.generation.reasoning = gen.value("reasoning", "");
    r.generation.category = gen.value("category", "");
    if (!gen.at("verbalized_confidence").is_null())
        r.generation.verbalized_confidence = gen["verbalized_confidence"].get<int>();
    r.generation.raw_text = gen.value("raw_text", "");
    r.generation.generator_model = gen.value("generator_model", "");

    if (!j.at("ensemble").is_null()) {
        const json& ens = j["ensemble"];
        EnsembleResult e;
        e.scores = ens.at("scores").get<std::vector<int>>();
        e.n_requested = ens.at("n_requested").get<int>();
        e.n_valid = ens.at("n_valid").get<int>();
        if (!ens.at("mean").is_null()) e.mean = ens["mean"].get<double>();
        if (!ens.at("median").is_null()) e.median = ens["median"].get<double>();
        e.quorum_met = ens.at("quorum_met").get<bool>();
        r.ensemble = std::move(e);
    }

    const json& rt = j.at("route");
    r.route.zone = zone_from_string(rt.at("zone").get<std::string>());
    r.route.action = action_from_string(rt.at("action").get<std::string>());
    if (!rt.at("ensemble_mean").is_null())
        r.route.ensemble_mean = rt["ensemble_mean"].get<double>();
    return r;
}

}  // namespace twinpass
