#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>

#include "activeteach/leitner.hpp"
#include "activeteach/psychologist.hpp"

namespace activeteach::tutor {

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::filesystem::path data_dir = "tutor-data";
    std::filesystem::path vocabulary = "data/sample_vocabulary.tsv";
    std::uint64_t seed = 1;

    std::uint32_t items_per_arm = 200;
    std::uint32_t session_questions = 100;
    std::uint32_t training_days = 6;
    std::uint32_t choices = 6;
    /// "myopic", "conservative", or "balanced" (seeded coin per user).
    std::string planner = "balanced";
    double rho = 0.9;
    GridSpec grid;
    LeitnerConfig leitner;
    Seconds iteration_duration = 4.0;
    /// Where the planner expects the second session of a day to begin, relative to the first.
    Seconds second_session_offset = 900.0;

    /// Honour the X-Debug-Now request header. Test deployments only.
    bool allow_time_override = false;
    int http_threads = 4;

    void validate() const;
};

/// Unknown keys and wrong types raise ConfigError naming the field.
ServiceConfig parse_service_config(std::string_view json_text);
ServiceConfig load_service_config(const std::filesystem::path& path);

using EnvLookup = std::function<const char*(const char*)>;

/// ACTIVETEACH_HOST, ACTIVETEACH_PORT, ACTIVETEACH_DATA_DIR, ACTIVETEACH_VOCABULARY, ACTIVETEACH_SEED.
void apply_env_overrides(ServiceConfig& cfg, const EnvLookup& lookup);
void apply_env_overrides(ServiceConfig& cfg);

}  // namespace activeteach::tutor
