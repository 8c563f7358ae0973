#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace conelab {

// Flat key-value configuration text: one `key = value` pair per line,
// `#` starts a comment, blank lines ignored, UTF-8. Keys are
// dot-separated lowercase identifiers.
class Config {
public:
    Config() = default;

    static Config parse_file(const std::string& path);
    static Config parse_text(const std::string& text);

    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const { return kv_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long get_long(const std::string& key, long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    // Validation: every present key must be in the allowed set, every
    // required key present. Throws std::invalid_argument otherwise.
    void validate(const std::set<std::string>& allowed,
                  const std::vector<std::string>& required) const;

    const std::map<std::string, std::string>& entries() const { return kv_; }

private:
    std::map<std::string, std::string> kv_;
};

}  // namespace conelab
