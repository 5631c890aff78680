#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace binplay {

// Flat "section.key = value" configuration. Every tunable in the project
// has a default here; loading a file overrides defaults and rejects
// unknown keys.
class Config {
public:
    static Config defaults();
    static Config load_file(const std::string& path);

    // Parse overrides from text (defaults already applied).
    void apply_text(const std::string& text, const std::string& origin);

    bool has(const std::string& key) const;
    void set(const std::string& key, const std::string& value);

    const std::string& get_str(const std::string& key) const;
    std::int64_t get_int(const std::string& key) const;
    std::uint64_t get_u64(const std::string& key) const;
    std::size_t get_size(const std::string& key) const;
    double get_double(const std::string& key) const;
    bool get_bool(const std::string& key) const;
    std::vector<std::uint64_t> get_u64_list(const std::string& key) const;

    // "0|1,2|3,..." -> one class set per comma-separated group.
    std::vector<std::vector<int>> get_class_sets(const std::string& key) const;

    // Canonical "key = value" lines in sorted key order.
    std::string resolved_text() const;

    // FNV-1a 64 of the resolved text.
    std::uint64_t hash() const;

private:
    std::map<std::string, std::string> values_;
};

}  // namespace binplay
