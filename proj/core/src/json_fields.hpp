#pragma once

#include <initializer_list>
#include <set>
#include <string>
#include <utility>

#include <json.hpp>

#include "activeteach/errors.hpp"

namespace activeteach::detail {

using nlohmann::json;

/// Typed, path-aware accessors over one JSON object.
class Fields {
public:
    Fields(const json& object, std::string path) : object_(object), path_(std::move(path)) {
        if (!object_.is_object()) throw ConfigError(path_ + ": expected an object");
    }

    std::string at(const std::string& key) const { return path_ + "." + key; }
    bool has(const std::string& key) const { return object_.contains(key); }
    const json& raw(const std::string& key) const { return object_.at(key); }

    void reject_unknown(std::initializer_list<const char*> known) const {
        std::set<std::string> allowed(known.begin(), known.end());
        for (const auto& item : object_.items()) {
            if (!allowed.contains(item.key())) throw ConfigError(at(item.key()) + ": unknown field");
        }
    }

    double number(const std::string& key, double fallback) const {
        if (!has(key)) return fallback;
        const auto& v = raw(key);
        if (!v.is_number()) throw ConfigError(at(key) + ": expected a number");
        return v.get<double>();
    }

    std::uint32_t count(const std::string& key, std::uint32_t fallback) const {
        if (!has(key)) return fallback;
        const auto& v = raw(key);
        if (!v.is_number_integer() || v.get<long long>() < 0 || v.get<long long>() > 0xFFFFFFFFll) {
            throw ConfigError(at(key) + ": expected a non-negative integer");
        }
        return v.get<std::uint32_t>();
    }

    std::uint64_t seed(const std::string& key, std::uint64_t fallback) const {
        if (!has(key)) return fallback;
        const auto& v = raw(key);
        if (!v.is_number_unsigned()) throw ConfigError(at(key) + ": expected a non-negative integer");
        return v.get<std::uint64_t>();
    }

    bool flag(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        const auto& v = raw(key);
        if (!v.is_boolean()) throw ConfigError(at(key) + ": expected true or false");
        return v.get<bool>();
    }

    std::string text(const std::string& key, const std::string& fallback) const {
        if (!has(key)) return fallback;
        const auto& v = raw(key);
        if (!v.is_string()) throw ConfigError(at(key) + ": expected a string");
        return v.get<std::string>();
    }

    std::pair<double, double> bounds(const std::string& key, std::pair<double, double> fallback) const {
        if (!has(key)) return fallback;
        const auto& v = raw(key);
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
            throw ConfigError(at(key) + ": expected [low, high]");
        }
        return {v[0].get<double>(), v[1].get<double>()};
    }

private:
    const json& object_;
    std::string path_;
};

/// Re-raises a domain ConfigError with the field path in front.
template <class Fn>
auto with_path(const std::string& path, Fn&& fn) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

}  // namespace activeteach::detail
