#include "twinpass/json_extract.hpp"

#include <optional>

#include "twinpass/errors.hpp"

namespace twinpass {

using nlohmann::json;

namespace {

// Removes ``` / ```json fence lines, keeping the fenced content.
std::string strip_code_fences(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    size_t pos = 0;
    while (pos < s.size()) {
        size_t eol = s.find('\n', pos);
        std::string line = s.substr(pos, eol == std::string::npos ? std::string::npos
                                                                  : eol - pos);
        size_t first = line.find_first_not_of(" \t\r");
        bool fence = first != std::string::npos && line.compare(first, 3, "```") == 0;
        if (!fence) {
            out += line;
            out += '\n';
        }
        if (eol == std::string::npos) break;
        pos = eol + 1;
    }
    return out;
}

// Span [start, end) of the first balanced {...} outside string literals,
// searching from `from`. Returns nullopt when none is balanced.
std::optional<std::pair<size_t, size_t>> find_balanced(const std::string& s, size_t from) {
    size_t start = s.find('{', from);
    while (start != std::string::npos) {
        int depth = 0;
        bool in_str = false, esc = false;
        for (size_t i = start; i < s.size(); ++i) {
            char c = s[i];
            if (in_str) {
                if (esc) esc = false;
                else if (c == '\\') esc = true;
                else if (c == '"') in_str = false;
                continue;
            }
            if (c == '"') in_str = true;
            else if (c == '{') ++depth;
            else if (c == '}') {
                if (--depth == 0) return std::make_pair(start, i + 1);
            }
        }
        start = s.find('{', start + 1);
    }
    return std::nullopt;
}

// Drops commas immediately preceding a closing } or ] (outside strings).
std::string strip_trailing_commas(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    bool in_str = false, esc = false;
    for (size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (in_str) {
            if (esc) esc = false;
            else if (c == '\\') esc = true;
            else if (c == '"') in_str = false;
            out.push_back(c);
            continue;
        }
        if (c == '"') in_str = true;
        if (c == ',') {
            size_t j = i + 1;
            while (j < s.size() && (s[j] == ' ' || s[j] == '\t' || s[j] == '\r' || s[j] == '\n'))
                ++j;
            if (j < s.size() && (s[j] == '}' || s[j] == ']')) continue;
        }
        out.push_back(c);
    }
    return out;
}

}  // namespace

json extract_json(const std::string& text) {
    std::string body = strip_code_fences(text);
    size_t from = 0;
    while (true) {
        auto span = find_balanced(body, from);
        if (!span) throw ExtractionError(text);
        std::string candidate = body.substr(span->first, span->second - span->first);
        auto parsed = json::parse(candidate, nullptr, false);
        if (!parsed.is_discarded() && parsed.is_object()) return parsed;
        parsed = json::parse(strip_trailing_commas(candidate), nullptr, false);
        if (!parsed.is_discarded() && parsed.is_object()) return parsed;
        from = span->first + 1;  // try the next candidate object
    }
}

}  // namespace twinpass
