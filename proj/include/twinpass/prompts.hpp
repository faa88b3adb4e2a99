#pragma once

#include <map>
#include <string>
#include <vector>

#include "twinpass/mcq.hpp"

namespace twinpass {

struct GenerationRecord;  // pipeline.hpp

// Pass 1 / Pass 2 prompt templates. The built-in strings and the files
// under templates/ carry identical bytes; golden-file tests pin both.
struct PromptTemplates {
    std::string baseline;  // placeholders {question} {options_text} {categories}
    std::string eval;      // placeholders {question} {gen_answer} {gen_reasoning}

    static PromptTemplates builtin();
    static PromptTemplates from_files(const std::string& baseline_path,
                                      const std::string& eval_path);
};

// Single-pass substitution of {name} tokens; placeholder-looking text
// inside substituted values is left alone.
std::string render_template(const std::string& tmpl,
                            const std::map<std::string, std::string>& values);

std::string build_baseline_prompt(const PromptTemplates& tmpl, const McqItem& item,
                                  const std::vector<std::string>& categories);

// Blind critique prompt: receives only question, answer label, and
// reasoning; never the answer key.
std::string build_eval_prompt(const PromptTemplates& tmpl, const McqItem& item,
                              const GenerationRecord& gen);

}  // namespace twinpass
