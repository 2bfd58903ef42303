#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace trigcm {

// Flat `key = value` text with '#' comments. Keys keep sorted order so the
// rendered text is canonical.
class KeyValueConfig {
   public:
    static KeyValueConfig parse(std::string_view text);
    static KeyValueConfig load(const std::filesystem::path& path);

    void set(const std::string& key, std::string value);
    void set(const std::string& key, double value);
    void set(const std::string& key, std::uint64_t value);
    void set(const std::string& key, bool value);
    void set(const std::string& key, const std::vector<std::size_t>& values);
    // Overlays every entry of `other`.
    void merge(const KeyValueConfig& other);

    bool contains(const std::string& key) const { return values_.contains(key); }
    std::optional<std::string> get(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<std::size_t> get_sizes(const std::string& key, const std::vector<std::size_t>& fallback) const;
    std::vector<std::string> get_list(const std::string& key, const std::vector<std::string>& fallback) const;

    // Throws DomainError naming the first key not in `allowed`.
    void require_known(const std::vector<std::string>& allowed) const;

    const std::map<std::string, std::string>& entries() const { return values_; }
    std::string render() const;

   private:
    std::map<std::string, std::string> values_;
};

// Round-trippable decimal form (%.17g).
std::string format_double(double v);

}  // namespace trigcm
