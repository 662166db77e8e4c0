#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "../core/types.hpp"

namespace adipc {

// Minimal TOML subset: [tables], [[arrays of tables]], scalars, flat arrays.
// Enough structure for scene files; anything fancier is a parse error.

struct TomlError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TomlValue {
    enum class Kind { Number, Boolean, String, NumberArray, StringArray };
    Kind kind = Kind::Number;
    Real num = 0;
    bool boolean = false;
    std::string str;
    std::vector<Real> arr;
    std::vector<std::string> sarr;
    int line = 0;
};

struct TomlTable {
    std::string name; // empty for the root table
    bool is_array_entry = false;
    int line = 0;
    std::map<std::string, TomlValue> kv;

    bool has(const std::string& k) const { return kv.count(k) > 0; }

    const TomlValue& require(const std::string& k) const {
        auto it = kv.find(k);
        if (it == kv.end())
            throw TomlError("table '" + (name.empty() ? "<root>" : name) +
                            "' (line " + std::to_string(line) + ") is missing key '" +
                            k + "'");
        return it->second;
    }

    Real number(const std::string& k, Real fallback) const {
        auto it = kv.find(k);
        if (it == kv.end()) return fallback;
        if (it->second.kind != TomlValue::Kind::Number)
            throw TomlError("line " + std::to_string(it->second.line) + ": key '" + k +
                            "' is not a number");
        return it->second.num;
    }
    Real number(const std::string& k) const {
        const auto& v = require(k);
        if (v.kind != TomlValue::Kind::Number)
            throw TomlError("line " + std::to_string(v.line) + ": key '" + k +
                            "' is not a number");
        return v.num;
    }
    bool boolean(const std::string& k, bool fallback) const {
        auto it = kv.find(k);
        if (it == kv.end()) return fallback;
        if (it->second.kind != TomlValue::Kind::Boolean)
            throw TomlError("line " + std::to_string(it->second.line) + ": key '" + k +
                            "' is not a boolean");
        return it->second.boolean;
    }
    std::string str(const std::string& k, const std::string& fallback) const {
        auto it = kv.find(k);
        if (it == kv.end()) return fallback;
        if (it->second.kind != TomlValue::Kind::String)
            throw TomlError("line " + std::to_string(it->second.line) + ": key '" + k +
                            "' is not a string");
        return it->second.str;
    }
    std::vector<Real> numbers(const std::string& k, std::vector<Real> fallback) const {
        auto it = kv.find(k);
        if (it == kv.end()) return fallback;
        if (it->second.kind == TomlValue::Kind::Number) return {it->second.num};
        if (it->second.kind != TomlValue::Kind::NumberArray)
            throw TomlError("line " + std::to_string(it->second.line) + ": key '" + k +
                            "' is not a numeric array");
        return it->second.arr;
    }
    Vec3 vec3(const std::string& k, const Vec3& fallback) const {
        if (!has(k)) return fallback;
        auto a = numbers(k, {});
        if (a.size() != 3)
            throw TomlError("line " + std::to_string(kv.at(k).line) + ": key '" + k +
                            "' needs exactly 3 numbers");
        return Vec3(a[0], a[1], a[2]);
    }
};

struct TomlDoc {
    TomlTable root;
    std::vector<TomlTable> tables;

    const TomlTable* find(const std::string& name) const {
        for (const auto& t : tables)
            if (t.name == name && !t.is_array_entry) return &t;
        return nullptr;
    }
    std::vector<const TomlTable*> find_all(const std::string& name) const {
        std::vector<const TomlTable*> out;
        for (const auto& t : tables)
            if (t.name == name) out.push_back(&t);
        return out;
    }
};

namespace detail {

inline std::string toml_trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline std::string toml_strip_comment(const std::string& s) {
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"') quoted = !quoted;
        if (s[i] == '#' && !quoted) return s.substr(0, i);
    }
    return s;
}

inline TomlValue toml_parse_scalar(const std::string& raw, int line) {
    TomlValue v;
    v.line = line;
    const std::string s = toml_trim(raw);
    if (s.empty()) throw TomlError("line " + std::to_string(line) + ": empty value");
    if (s.front() == '"') {
        if (s.size() < 2 || s.back() != '"')
            throw TomlError("line " + std::to_string(line) + ": unterminated string");
        v.kind = TomlValue::Kind::String;
        v.str = s.substr(1, s.size() - 2);
        return v;
    }
    if (s == "true" || s == "false") {
        v.kind = TomlValue::Kind::Boolean;
        v.boolean = (s == "true");
        return v;
    }
    char* end = nullptr;
    v.num = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
        throw TomlError("line " + std::to_string(line) + ": cannot parse value '" + s +
                        "'");
    v.kind = TomlValue::Kind::Number;
    return v;
}

inline TomlValue toml_parse_value(const std::string& raw, int line) {
    const std::string s = toml_trim(raw);
    if (!s.empty() && s.front() == '[') {
        if (s.back() != ']')
            throw TomlError("line " + std::to_string(line) + ": unterminated array");
        TomlValue v;
        v.line = line;
        const std::string body = s.substr(1, s.size() - 2);
        std::vector<TomlValue> elems;
        std::string cur;
        bool quoted = false;
        for (char c : body) {
            if (c == '"') quoted = !quoted;
            if (c == ',' && !quoted) {
                elems.push_back(toml_parse_scalar(cur, line));
                cur.clear();
            } else {
                cur += c;
            }
        }
        if (!toml_trim(cur).empty()) elems.push_back(toml_parse_scalar(cur, line));
        const bool strings =
            !elems.empty() && elems.front().kind == TomlValue::Kind::String;
        v.kind = strings ? TomlValue::Kind::StringArray : TomlValue::Kind::NumberArray;
        for (const auto& e : elems) {
            if (strings) {
                if (e.kind != TomlValue::Kind::String)
                    throw TomlError("line " + std::to_string(line) +
                                    ": mixed array element types");
                v.sarr.push_back(e.str);
            } else {
                if (e.kind != TomlValue::Kind::Number)
                    throw TomlError("line " + std::to_string(line) +
                                    ": mixed array element types");
                v.arr.push_back(e.num);
            }
        }
        return v;
    }
    return toml_parse_scalar(s, line);
}

} // namespace detail

inline TomlDoc parse_toml(std::istream& in) {
    TomlDoc doc;
    TomlTable* current = &doc.root;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string s = detail::toml_trim(detail::toml_strip_comment(line));
        if (s.empty()) continue;
        if (s.front() == '[') {
            const bool arr = s.size() > 1 && s[1] == '[';
            const std::string close = arr ? "]]" : "]";
            if (s.size() < 2 + close.size() ||
                s.substr(s.size() - close.size()) != close)
                throw TomlError("line " + std::to_string(lineno) +
                                ": malformed table header");
            TomlTable t;
            t.name = detail::toml_trim(
                s.substr(arr ? 2 : 1, s.size() - 2 * (arr ? 2 : 1)));
            if (t.name.empty())
                throw TomlError("line " + std::to_string(lineno) + ": empty table name");
            t.is_array_entry = arr;
            t.line = lineno;
            doc.tables.push_back(t);
            current = &doc.tables.back();
            continue;
        }
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw TomlError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = detail::toml_trim(s.substr(0, eq));
        if (key.empty())
            throw TomlError("line " + std::to_string(lineno) + ": empty key");
        current->kv[key] = detail::toml_parse_value(s.substr(eq + 1), lineno);
    }
    return doc;
}

inline TomlDoc parse_toml_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw TomlError("cannot open file: " + path);
    return parse_toml(f);
}

} // namespace adipc
