#include "kslab/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace kslab {

namespace {

std::string trim(const std::string& s)
{
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

double to_double(const std::string& text, const std::string& where)
{
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument(where + ": expected a number, got '" + text + "'");
    }
    if (used != text.size()) throw std::invalid_argument(where + ": expected a number, got '" + text + "'");
    return v;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::istream& in)
{
    KeyValueConfig cfg;
    std::string section = "run";
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3)
                throw std::invalid_argument("config line " + std::to_string(lineno) + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
        if (cfg.has(section, key))
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": duplicate key " + section + "." +
                                        key);
        cfg.set(section, key, value);
    }
    return cfg;
}

KeyValueConfig KeyValueConfig::parse_string(const std::string& text)
{
    std::istringstream in(text);
    return parse(in);
}

KeyValueConfig KeyValueConfig::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file " + path);
    return parse(in);
}

const std::string* KeyValueConfig::find(const std::string& section, const std::string& key) const
{
    const auto it = data_.find(section);
    if (it == data_.end()) return nullptr;
    for (const auto& [k, v] : it->second) {
        if (k == key) {
            used_[section + "." + key] = true;
            return &v;
        }
    }
    return nullptr;
}

bool KeyValueConfig::has(const std::string& section, const std::string& key) const
{
    const auto it = data_.find(section);
    if (it == data_.end()) return false;
    return std::any_of(it->second.begin(), it->second.end(), [&](const auto& kv) { return kv.first == key; });
}

void KeyValueConfig::set(const std::string& section, const std::string& key, const std::string& value)
{
    auto& entries = data_[section];
    if (std::find(sections_.begin(), sections_.end(), section) == sections_.end()) sections_.push_back(section);
    for (auto& [k, v] : entries) {
        if (k == key) {
            v = value;
            return;
        }
    }
    entries.emplace_back(key, value);
    used_.emplace(section + "." + key, false);
}

std::string KeyValueConfig::get(const std::string& section, const std::string& key, const std::string& fallback) const
{
    const auto* v = find(section, key);
    return v ? *v : fallback;
}

double KeyValueConfig::get_double(const std::string& section, const std::string& key, double fallback) const
{
    const auto* v = find(section, key);
    return v ? to_double(*v, section + "." + key) : fallback;
}

long KeyValueConfig::get_int(const std::string& section, const std::string& key, long fallback) const
{
    const auto* v = find(section, key);
    if (!v) return fallback;
    const double d = to_double(*v, section + "." + key);
    if (d != static_cast<double>(static_cast<long>(d)))
        throw std::invalid_argument(section + "." + key + ": expected an integer, got '" + *v + "'");
    return static_cast<long>(d);
}

bool KeyValueConfig::get_bool(const std::string& section, const std::string& key, bool fallback) const
{
    const auto* v = find(section, key);
    if (!v) return fallback;
    const auto s = lower(*v);
    if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
    if (s == "false" || s == "no" || s == "off" || s == "0") return false;
    throw std::invalid_argument(section + "." + key + ": expected a boolean, got '" + *v + "'");
}

std::vector<double> KeyValueConfig::get_list(const std::string& section, const std::string& key) const
{
    std::vector<double> out;
    const auto* v = find(section, key);
    if (!v) return out;
    std::stringstream ss(*v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(to_double(item, section + "." + key));
    }
    return out;
}

std::vector<std::string> KeyValueConfig::unused() const
{
    std::vector<std::string> out;
    for (const auto& sec : sections_) {
        for (const auto& [k, v] : data_.at(sec)) {
            if (!used_.at(sec + "." + k)) out.push_back(sec + "." + k);
        }
    }
    return out;
}

void KeyValueConfig::write(std::ostream& out) const
{
    bool first = true;
    for (const auto& sec : sections_) {
        if (!first) out << '\n';
        first = false;
        out << '[' << sec << "]\n";
        for (const auto& [k, v] : data_.at(sec)) out << k << " = " << v << '\n';
    }
}

}  // namespace kslab
