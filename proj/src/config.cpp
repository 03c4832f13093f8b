#include "pathrec/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "pathrec/error.hpp"

namespace pathrec {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

} // namespace

Config Config::load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw Error("cannot open " + file.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), file.string());
}

Config Config::parse(const std::string& text, const std::string& origin) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view s = trim(line);
        if (s.empty() || s.front() == '#') continue;
        std::size_t eq = s.find('=');
        if (eq == std::string_view::npos)
            throw Error(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
        std::string key(trim(s.substr(0, eq)));
        std::string value(trim(s.substr(eq + 1)));
        if (key.empty())
            throw Error(origin + ":" + std::to_string(lineno) + ": empty key");
        cfg.set(key, std::move(value));
    }
    return cfg;
}

std::optional<std::size_t> Config::find(const std::string& key) const {
    for (std::size_t i = 0; i < entries_.size(); ++i)
        if (entries_[i].first == key) return i;
    return std::nullopt;
}

bool Config::has(const std::string& key) const { return find(key).has_value(); }

const std::string& Config::get(const std::string& key) const {
    if (auto i = find(key)) return entries_[*i].second;
    throw Error("missing config key '" + key + "'");
}

std::string Config::get_or(const std::string& key, const std::string& fallback) const {
    if (auto i = find(key)) return entries_[*i].second;
    return fallback;
}

double Config::get_double(const std::string& key) const {
    const std::string& v = get(key);
    double out = 0.0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size())
        throw Error("config key '" + key + "' is not a number: '" + v + "'");
    return out;
}

double Config::get_double_or(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

long long Config::get_int(const std::string& key) const {
    const std::string& v = get(key);
    long long out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size())
        throw Error("config key '" + key + "' is not an integer: '" + v + "'");
    return out;
}

long long Config::get_int_or(const std::string& key, long long fallback) const {
    return has(key) ? get_int(key) : fallback;
}

void Config::set(const std::string& key, std::string value) {
    if (auto i = find(key)) {
        entries_[*i].second = std::move(value);
        return;
    }
    entries_.emplace_back(key, std::move(value));
}

std::string Config::to_text() const {
    std::string out;
    for (const auto& [k, v] : entries_) {
        out += k;
        out += " = ";
        out += v;
        out += '\n';
    }
    return out;
}

} // namespace pathrec
