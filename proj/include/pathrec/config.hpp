#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace pathrec {

// Flat "key = value" settings file; '#' starts a comment, blank lines are
// skipped. Keys keep first-seen order; later assignments overwrite.
class Config {
public:
    static Config load(const std::filesystem::path& file);
    static Config parse(const std::string& text, const std::string& origin = "<config>");

    bool has(const std::string& key) const;
    const std::string& get(const std::string& key) const;
    std::string get_or(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double_or(const std::string& key, double fallback) const;
    long long get_int(const std::string& key) const;
    long long get_int_or(const std::string& key, long long fallback) const;
    void set(const std::string& key, std::string value);

    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
    std::string to_text() const;

private:
    std::optional<std::size_t> find(const std::string& key) const;
    std::vector<std::pair<std::string, std::string>> entries_;
};

} // namespace pathrec
