#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace twinpass {

// One multiple-choice benchmark question. answer_index is 0-based;
// rendered labels are 1-based ("option 1") at the single conversion
// point in render_options / parse_answer_label.
struct McqItem {
    std::string id;
    std::string benchmark;
    std::string question;
    std::vector<std::string> options;  // 2..10 entries
    int answer_index = 0;
    std::string category;
};

struct Dataset {
    std::string name;
    std::string source_path;
    std::vector<McqItem> items;  // file order, stable
};

enum class DatasetFormat { JsonArray, JsonLines };

// Maps foreign export keys onto the canonical schema so real benchmark
// dumps can be ingested without code changes.
struct FieldMapping {
    std::string id_key = "id";
    std::string benchmark_key = "benchmark";
    std::string question_key = "question";
    std::string options_key = "options";
    std::string answer_key = "answer_index";
    std::string category_key = "category";
    bool answer_one_based = false;

    static FieldMapping from_file(const std::string& path);
};

Dataset load_dataset(const std::string& path, DatasetFormat format,
                     const FieldMapping& mapping = {});

// "option 1: <text>\noption 2: <text>\n..." — one line per option.
std::string render_options(const McqItem& item);

// Canonical JSON form; load(serialize(d)) == d.
nlohmann::json dataset_to_json(const Dataset& ds);

// SHA-256 hex over the canonical serialization; binds runs to datasets.
std::string dataset_content_hash(const Dataset& ds);

// SHA-256 hex digest of arbitrary bytes (shared by cassette keys and
// dataset/template hashes).
std::string sha256_hex(const std::string& bytes);

}  // namespace twinpass
