#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace survkit {

/// Plain-text `key = value` file with `[section]` headers. Keys are unique
/// across the whole file; sections only group them. `#` and `;` start
/// comments.
class KeyValueConfig {
public:
    struct Entry {
        std::string section;
        std::string key;
        std::string value;
    };

    static KeyValueConfig parse(std::istream& in);
    static KeyValueConfig load(const std::filesystem::path& path);

    bool contains(const std::string& key) const;
    std::optional<std::string> get(const std::string& key) const;
    std::string get_or(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key, long long fallback) const;

    /// Replaces the value of an existing key or appends it to `section`.
    void set(const std::string& key, const std::string& value,
             const std::string& section = "");

    const std::vector<Entry>& entries() const noexcept { return entries_; }

    /// Entries grouped by section in first-appearance order.
    void write(std::ostream& out) const;

private:
    std::vector<Entry> entries_;
};

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

}  // namespace survkit
