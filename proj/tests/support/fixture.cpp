#include "fixture.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "twinpass/errors.hpp"

namespace twinpass::testing {

using nlohmann::json;

std::string gen_json(const std::string& answer, const std::string& reasoning,
                     const std::string& category, int confidence) {
    json j;
    j["reasoning"] = reasoning;
    j["answer"] = answer;
    j["category"] = category;
    j["confidence"] = confidence;
    return j.dump();
}

std::string eval_json(int score, const std::string& critique) {
    json j;
    j["assumption_check"] = "key assumptions reviewed";
    j["self_eval_score"] = score;
    j["self_explanation"] = critique;
    return j.dump();
}

namespace {

McqItem item(std::string id, std::string benchmark, std::string question,
             std::vector<std::string> options, int answer_index) {
    McqItem it;
    it.id = std::move(id);
    it.benchmark = std::move(benchmark);
    it.question = std::move(question);
    it.options = std::move(options);
    it.answer_index = answer_index;
    return it;
}

}  // namespace

Fixture make_fixture() {
    Fixture fx;
    fx.dataset.name = "fixture10";
    fx.dataset.source_path = "<fixture>";

    fx.config.generator_model = "gemma-3-12b";
    fx.config.evaluator_model = "gemma-3-4b";
    fx.config.n_passes = 3;
    fx.config.quorum = 2;
    fx.config.parse_retries = 2;
    fx.config.wall_clock_timestamps = false;

    auto add = [&fx](McqItem it, std::vector<std::string> gen,
                     std::map<int, std::vector<std::string>> evals) {
        fx.gen_responses[it.id] = std::move(gen);
        fx.eval_responses[it.id] = std::move(evals);
        fx.dataset.items.push_back(std::move(it));
    };

    // q01: confident acronym hallucination; critiques 1,2,2 -> mean 1.67
    add(item("q01", "teleqna", "What does CSAT stand for in service metrics?",
             {"Customer Satisfaction", "Channel State Assessment Table",
              "Coexistence Support for Access Technologies", "Cell Site Antenna Tilt"},
             0),
        {gen_json("option 3",
                  "CSAT stands for Coexistence Support for Access Technologies, "
                  "detailing coexistence between LTE, WiMAX, and NB-IoT.",
                  "Standards", 5)},
        {{1, {eval_json(1, "The reasoning invents a non-existent acronym expansion; "
                           "CSAT is Customer Satisfaction.")}},
         {2, {"```json\n" + eval_json(2, "The expansion is fabricated and the "
                                         "justification irrelevant.") + "\n```"}},
         {3, {eval_json(2, "Unsupported definition; the reasoning is misleading.")}}});

    // q02: exact component mapping; unanimous 5s -> mean 5.0
    add(item("q02", "oranbench",
             "Which measurement tracks the volume of UL PDCP SDUs received via the "
             "Xn-U UL GTP-U tunnel for data forwarding?",
             {"OR.Xn.UIPdcpSduVolRxXnUIDataForward", "OR.Xn.DIPdcpSduVolTxXnDI",
              "OR.GenericVolumeExtension", "OR.F1.UIPdcpSduVol"},
             0),
        {gen_json("option 1",
                  "The keywords UL, Rx, Xn-U and data forwarding map directly onto "
                  "option 1 while the DL and generic counters do not.",
                  "O-RAN", 5)},
        {{1, {eval_json(5, "Component mapping is exact and the exclusions are "
                           "justified.")}},
         {2, {eval_json(5)}},
         {3, {eval_json(5)}}});

    // q03: arithmetic looping with an admitted guess; critiques 2,2,2 -> mean 2.0
    add(item("q03", "srsranbench",
             "What is the number of bits to modulate in the PBCH modulator?",
             {"32", "864", "512", "1024"}, 1),
        {gen_json("option 3",
                  "QPSK carries 2 bits per symbol, 16 * 2 = 32 bits, none of the "
                  "options match so option 3 (512) seems closest.",
                  "PHY", 3)},
        {{1, {eval_json(2, "The reasoning loops over the same product and then "
                           "guesses; the conclusion is unsupported.")}},
         {2, {eval_json(2)}},
         {3, {eval_json(2)}}});

    // q04: Pass 1 never yields parseable JSON -> parse-failure record
    add(item("q04", "teleqna", "Which layer terminates RRC signalling?",
             {"PDCP", "RRC", "MAC", "PHY"}, 1),
        {"I think the answer might be B, the RRC layer, but I cannot say.",
         "The answer is surely the RRC layer itself.",
         "Answer: RRC (no structured output provided)"},
        {});

    // q05: correct with strong critiques 5,4,5 -> mean 4.67
    add(item("q05", "teleqna", "What does PRACH carry?",
             {"Random access preambles", "Paging records", "System information",
              "HARQ feedback"},
             0),
        {gen_json("option 1", "PRACH is the uplink random access channel carrying "
                              "preambles for initial access.",
                  "Access", 4)},
        {{1, {eval_json(5)}}, {2, {eval_json(4)}}, {3, {eval_json(5)}}});

    // q06: correct, critiques 4,4,4 -> mean 4.0 (Moderate)
    add(item("q06", "oranbench", "Which interface connects O-CU-CP and O-CU-UP?",
             {"E1", "F1-c", "O1", "A1"}, 0),
        {gen_json("option 1", "The E1 interface connects the CU control-plane and "
                              "user-plane functions.",
                  "Architecture", 5)},
        {{1, {eval_json(4)}}, {2, {eval_json(4)}}, {3, {eval_json(4)}}});

    // q07: wrong, critiques 3,4,3 -> mean 3.33 (LowConfidence)
    add(item("q07", "srsranbench", "Which scheduler policy is the srsRAN default?",
             {"Proportional fair", "Round robin", "Max C/I", "Priority first"}, 1),
        {gen_json("option 1", "Most production schedulers default to proportional "
                              "fair, so srsRAN likely does too.",
                  "Scheduling", 4)},
        {{1, {eval_json(3, "Plausible but argued from industry habit, not the "
                           "codebase.")}},
         {2, {eval_json(4)}},
         {3, {eval_json(3)}}});

    // q08: correct, critiques 4,4,5 -> mean 4.33 (Moderate)
    add(item("q08", "teleqna", "What is the subcarrier spacing of numerology 1?",
             {"30 kHz", "15 kHz", "60 kHz", "120 kHz"}, 0),
        {gen_json("option 1", "Numerology mu=1 doubles the base 15 kHz spacing to "
                              "30 kHz.",
                  "PHY", 5)},
        {{1, {eval_json(4)}}, {2, {eval_json(4)}}, {3, {eval_json(5)}}});

    // q09: wrong but confidently argued; critiques 3,3,3 -> mean 3.0
    add(item("q09", "oranbench", "Which component hosts the near-RT RIC xApps?",
             {"Non-RT RIC", "Near-RT RIC", "O-DU", "SMO"}, 1),
        {gen_json("option 1", "xApps are applications, so they live in the SMO's "
                              "non-real-time controller.",
                  "Architecture", 5)},
        {{1, {eval_json(3)}}, {2, {eval_json(3)}}, {3, {eval_json(3)}}});

    // q10: first critique pass returns an out-of-range score and is
    // re-sampled; valid scores {5,5,4} -> mean 4.67
    add(item("q10", "srsranbench", "Which transport does the srsRAN gNB use for F1?",
             {"SCTP", "TCP", "UDP", "QUIC"}, 0),
        {gen_json("option 1", "F1-C signalling rides on SCTP per the 3GPP transport "
                              "specifications implemented by the gNB.",
                  "Transport", 4)},
        {{1, {eval_json(7, "out-of-range score"), eval_json(5)}},
         {2, {eval_json(5)}},
         {3, {eval_json(4)}}});

    return fx;
}

ScriptedBackend::Handler Fixture::handler() const {
    return [this](const ChatRequest& req) -> std::string {
        const std::string& prompt = req.messages.front().content;
        const McqItem* found = nullptr;
        for (const auto& it : dataset.items) {
            if (prompt.find(it.question) != std::string::npos) {
                found = &it;
                break;
            }
        }
        if (!found) throw std::runtime_error("fixture: no item matches prompt");

        const std::string& tag = req.pass_tag;
        auto nth = [](const std::vector<std::string>& v, size_t i) -> std::string {
            if (i >= v.size())
                throw std::runtime_error("fixture: no scripted response for attempt " +
                                         std::to_string(i));
            return v[i];
        };

        if (tag.rfind("gen", 0) == 0) {
            size_t attempt = 0;
            auto dash = tag.rfind('-');
            if (tag != "gen" && dash != std::string::npos)
                attempt = std::stoul(tag.substr(dash + 1));
            return nth(gen_responses.at(found->id), attempt);
        }
        if (tag.rfind("eval-pass-", 0) == 0) {
            std::string rest = tag.substr(10);  // "<i>" or "<i>-retry-<k>"
            size_t dash = rest.find('-');
            int pass = std::stoi(rest.substr(0, dash));
            size_t attempt = 0;
            if (dash != std::string::npos)
                attempt = std::stoul(rest.substr(rest.rfind('-') + 1));
            return nth(eval_responses.at(found->id).at(pass), attempt);
        }
        throw std::runtime_error("fixture: unexpected pass_tag " + tag);
    };
}

void build_fixture_cassette(const Fixture& fx, const std::string& cassette_path) {
    ScriptedBackend scripted(fx.handler());
    RecordBackend recorder(scripted, cassette_path);
    for (const auto& it : fx.dataset.items) {
        evaluate_item(recorder, fx.config, it);
    }
}

void write_fixture_dataset(const Fixture& fx, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write fixture dataset: " + path);
    out << dataset_to_json(fx.dataset).dump(2) << '\n';
}

}  // namespace twinpass::testing
