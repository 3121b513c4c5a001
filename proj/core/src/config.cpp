#include "survkit/config.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "survkit/error.hpp"
#include "survkit/format.hpp"

namespace survkit {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(s.substr(start));
            return out;
        }
        out.emplace_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

KeyValueConfig KeyValueConfig::parse(std::istream& in) {
    KeyValueConfig cfg;
    std::string section;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string text = trim(line);
        if (text.empty() || text[0] == '#' || text[0] == ';') continue;
        if (text.front() == '[') {
            if (text.back() != ']') {
                throw Error("config line " + std::to_string(lineno) + ": unterminated section header");
            }
            section = trim(std::string_view(text).substr(1, text.size() - 2));
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos) {
            throw Error("config line " + std::to_string(lineno) + ": expected key = value");
        }
        std::string key = trim(std::string_view(text).substr(0, eq));
        std::string value = trim(std::string_view(text).substr(eq + 1));
        if (key.empty()) {
            throw Error("config line " + std::to_string(lineno) + ": empty key");
        }
        if (cfg.contains(key)) {
            throw Error("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        }
        cfg.entries_.push_back({section, std::move(key), std::move(value)});
    }
    return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file " + path.string());
    return parse(in);
}

bool KeyValueConfig::contains(const std::string& key) const {
    return get(key).has_value();
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
    for (const auto& e : entries_) {
        if (e.key == key) return e.value;
    }
    return std::nullopt;
}

std::string KeyValueConfig::get_or(const std::string& key, const std::string& fallback) const {
    return get(key).value_or(fallback);
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    double out = 0.0;
    if (!parse_double(*v, out)) throw Error("config key '" + key + "': not a number: " + *v);
    return out;
}

long long KeyValueConfig::get_int(const std::string& key, long long fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    long long out = 0;
    if (!parse_int(*v, out)) throw Error("config key '" + key + "': not an integer: " + *v);
    return out;
}

void KeyValueConfig::set(const std::string& key, const std::string& value,
                         const std::string& section) {
    for (auto& e : entries_) {
        if (e.key == key) {
            e.value = value;
            return;
        }
    }
    entries_.push_back({section, key, value});
}

void KeyValueConfig::write(std::ostream& out) const {
    std::vector<std::string> sections;
    for (const auto& e : entries_) {
        bool seen = false;
        for (const auto& s : sections) seen = seen || s == e.section;
        if (!seen) sections.push_back(e.section);
    }
    bool first = true;
    for (const auto& s : sections) {
        if (!s.empty()) {
            if (!first) out << '\n';
            out << '[' << s << "]\n";
        }
        first = false;
        for (const auto& e : entries_) {
            if (e.section == s) out << e.key << " = " << e.value << '\n';
        }
    }
}

}  // namespace survkit
