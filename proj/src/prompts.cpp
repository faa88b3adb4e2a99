#include "twinpass/prompts.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "twinpass/errors.hpp"
#include "twinpass/pipeline.hpp"

namespace twinpass {

namespace {

constexpr const char* kBaselineTemplate =
    R"TPL(You are a telecommunications expert.
Read the question and options below.

Question: {question}

Options:
{options_text}

Task:
1. Provide a detailed reasoning for the correct answer.
2. Select the correct option (e.g., "option 1").
3. Categorize this question into one of the following categories:

{categories}.
4. Rate your confidence in this answer on a scale of 1-5 (5=Certain, 1=Unknown).

Respond VALID JSON ONLY with this schema:
{
  "reasoning": "string",
  "answer": "string (e.g. 'option 1')",
  "category": "string",
  "confidence": <int 1-5>
}
)TPL";

constexpr const char* kEvalTemplate =
    R"(You are a Quality Assurance AI for Telecom and O-RAN.

Review the following Question, Answer, and Reasoning.

Question: {question}
Generated Answer: {gen_answer}
Generated Reasoning: {gen_reasoning}

Task:
1. Identify Assumptions: List 1-2 key technical assumptions in the reasoning.
2. Verify Logic: Do these assumptions logically lead to the answer?
3. Rate Confidence: On a scale of 1-5 (5=Certain, 1=Unknown).

Return JSON only:
{
  "assumption_check": "string",
  "self_eval_score": <int 1-5>,
  "self_explanation": "<critique>"
}
)";

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read template file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

PromptTemplates PromptTemplates::builtin() {
    return {kBaselineTemplate, kEvalTemplate};
}

PromptTemplates PromptTemplates::from_files(const std::string& baseline_path,
                                            const std::string& eval_path) {
    return {read_file(baseline_path), read_file(eval_path)};
}

std::string render_template(const std::string& tmpl,
                            const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(tmpl.size());
    size_t pos = 0;
    while (pos < tmpl.size()) {
        size_t open = tmpl.find('{', pos);
        if (open == std::string::npos) {
            out.append(tmpl, pos, std::string::npos);
            break;
        }
        out.append(tmpl, pos, open - pos);
        size_t close = tmpl.find('}', open);
        bool replaced = false;
        if (close != std::string::npos) {
            std::string name = tmpl.substr(open + 1, close - open - 1);
            auto it = values.find(name);
            if (it != values.end()) {
                out += it->second;
                pos = close + 1;
                replaced = true;
            }
        }
        if (!replaced) {
            // literal brace (the JSON schema block in the templates)
            out.push_back('{');
            pos = open + 1;
        }
    }
    return out;
}

std::string build_baseline_prompt(const PromptTemplates& tmpl, const McqItem& item,
                                  const std::vector<std::string>& categories) {
    nlohmann::json cats = categories;  // same serialization as json.dumps
    return render_template(tmpl.baseline, {
        {"question", item.question},
        {"options_text", render_options(item)},
        {"categories", cats.dump()},
    });
}

std::string build_eval_prompt(const PromptTemplates& tmpl, const McqItem& item,
                              const GenerationRecord& gen) {
    return render_template(tmpl.eval, {
        {"question", item.question},
        {"gen_answer", gen.answer_raw},
        {"gen_reasoning", gen.reasoning},
    });
}

}  // namespace twinpass
