#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace kslab {

/// Line-oriented `key = value` file with `[section]` headers and `#` comments.
/// Keys before the first header belong to section "run".
class KeyValueConfig {
public:
    /// Throws std::invalid_argument with the line number on malformed lines or duplicate keys.
    static KeyValueConfig parse(std::istream& in);
    static KeyValueConfig parse_string(const std::string& text);
    static KeyValueConfig load(const std::string& path);

    bool has(const std::string& section, const std::string& key) const;
    void set(const std::string& section, const std::string& key, const std::string& value);

    std::string get(const std::string& section, const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    long get_int(const std::string& section, const std::string& key, long fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
    /// Comma-separated list; empty when absent.
    std::vector<double> get_list(const std::string& section, const std::string& key) const;

    /// Keys never read through a getter, as "section.key". Used to reject typos.
    std::vector<std::string> unused() const;

    /// Sections and keys in insertion order.
    void write(std::ostream& out) const;

private:
    const std::string* find(const std::string& section, const std::string& key) const;

    std::vector<std::string> sections_;
    std::map<std::string, std::vector<std::pair<std::string, std::string>>> data_;
    mutable std::map<std::string, bool> used_;
};

}  // namespace kslab
