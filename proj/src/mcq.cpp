#include "twinpass/mcq.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <openssl/evp.h>

#include "twinpass/errors.hpp"

namespace twinpass {

using nlohmann::json;

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    EVP_DigestUpdate(ctx, bytes.data(), bytes.size());
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);

    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

FieldMapping FieldMapping::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read field mapping file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("malformed field mapping file " + path + ": " + e.what());
    }
    FieldMapping m;
    if (j.contains("id")) m.id_key = j["id"].get<std::string>();
    if (j.contains("benchmark")) m.benchmark_key = j["benchmark"].get<std::string>();
    if (j.contains("question")) m.question_key = j["question"].get<std::string>();
    if (j.contains("options")) m.options_key = j["options"].get<std::string>();
    if (j.contains("answer")) m.answer_key = j["answer"].get<std::string>();
    if (j.contains("category")) m.category_key = j["category"].get<std::string>();
    if (j.contains("answer_one_based")) m.answer_one_based = j["answer_one_based"].get<bool>();
    return m;
}

namespace {

std::string trim_copy(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

McqItem parse_item(const json& rec, size_t index, const FieldMapping& m) {
    auto fail = [index](const std::string& field, const std::string& why) -> McqItem {
        std::ostringstream os;
        os << "record " << index << ": field '" << field << "' " << why;
        throw ValidationError(os.str());
    };

    if (!rec.is_object()) fail("<record>", "is not a JSON object");

    McqItem item;
    if (!rec.contains(m.id_key) || !rec[m.id_key].is_string())
        fail(m.id_key, "missing or not a string");
    item.id = rec[m.id_key].get<std::string>();
    if (item.id.empty()) fail(m.id_key, "is empty");

    if (!rec.contains(m.question_key) || !rec[m.question_key].is_string())
        fail(m.question_key, "missing or not a string");
    item.question = rec[m.question_key].get<std::string>();

    if (!rec.contains(m.options_key) || !rec[m.options_key].is_array())
        fail(m.options_key, "missing or not an array");
    for (const auto& opt : rec[m.options_key]) {
        if (!opt.is_string()) fail(m.options_key, "contains a non-string entry");
        item.options.push_back(opt.get<std::string>());
    }
    if (item.options.size() < 2 || item.options.size() > 10)
        fail(m.options_key, "must contain 2..10 options, got " +
                                std::to_string(item.options.size()));
    for (size_t i = 0; i < item.options.size(); ++i) {
        if (trim_copy(item.options[i]).empty())
            fail(m.options_key, "option " + std::to_string(i + 1) + " is empty");
    }

    if (!rec.contains(m.answer_key) || !rec[m.answer_key].is_number_integer())
        fail(m.answer_key, "missing or not an integer");
    int ans = rec[m.answer_key].get<int>();
    if (m.answer_one_based) ans -= 1;
    if (ans < 0 || ans >= static_cast<int>(item.options.size()))
        fail("answer_index", "value " + std::to_string(rec[m.answer_key].get<int>()) +
                                 " out of range for " + std::to_string(item.options.size()) +
                                 " options");
    item.answer_index = ans;

    if (rec.contains(m.benchmark_key) && rec[m.benchmark_key].is_string())
        item.benchmark = rec[m.benchmark_key].get<std::string>();
    if (rec.contains(m.category_key) && rec[m.category_key].is_string())
        item.category = rec[m.category_key].get<std::string>();
    return item;
}

}  // namespace

Dataset load_dataset(const std::string& path, DatasetFormat format,
                     const FieldMapping& mapping) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dataset file: " + path);

    Dataset ds;
    ds.source_path = path;
    auto slash = path.find_last_of('/');
    ds.name = slash == std::string::npos ? path : path.substr(slash + 1);

    std::vector<json> records;
    if (format == DatasetFormat::JsonArray) {
        json root;
        try {
            in >> root;
        } catch (const json::exception& e) {
            throw ValidationError(std::string("malformed JSON array: ") + e.what());
        }
        if (!root.is_array()) throw ValidationError("top-level value is not an array");
        for (auto& r : root) records.push_back(std::move(r));
    } else {
        std::string line;
        size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (trim_copy(line).empty()) continue;
            try {
                records.push_back(json::parse(line));
            } catch (const json::exception& e) {
                throw ValidationError("line " + std::to_string(lineno) +
                                      ": malformed JSON: " + e.what());
            }
        }
    }

    std::unordered_map<std::string, size_t> seen;
    for (size_t i = 0; i < records.size(); ++i) {
        McqItem item = parse_item(records[i], i, mapping);
        auto [it, inserted] = seen.emplace(item.id, i);
        if (!inserted) {
            throw ValidationError("duplicate id \"" + item.id + "\" at positions " +
                                  std::to_string(it->second) + " and " + std::to_string(i));
        }
        ds.items.push_back(std::move(item));
    }
    return ds;
}

std::string render_options(const McqItem& item) {
    std::ostringstream os;
    for (size_t k = 0; k < item.options.size(); ++k) {
        if (k) os << '\n';
        os << "option " << (k + 1) << ": " << item.options[k];
    }
    return os.str();
}

nlohmann::json dataset_to_json(const Dataset& ds) {
    json arr = json::array();
    for (const auto& item : ds.items) {
        json rec;
        rec["id"] = item.id;
        rec["benchmark"] = item.benchmark;
        rec["question"] = item.question;
        rec["options"] = item.options;
        rec["answer_index"] = item.answer_index;
        rec["category"] = item.category;
        arr.push_back(std::move(rec));
    }
    return arr;
}

std::string dataset_content_hash(const Dataset& ds) {
    return sha256_hex(dataset_to_json(ds).dump());
}

}  // namespace twinpass
