#include "activeteach/tutor/service_config.hpp"

#include <cerrno>
#include <cstdlib>
#include <limits>
#include <fstream>
#include <sstream>

#include "../json_fields.hpp"

namespace activeteach::tutor {

using detail::Fields;
using detail::json;
using detail::with_path;

void ServiceConfig::validate() const {
    if (port < 0 || port > 65535) throw ConfigError("port: must be within 0..65535");
    if (items_per_arm < 1) throw ConfigError("items_per_arm: must be at least 1");
    if (session_questions < 1) throw ConfigError("session_questions: must be at least 1");
    if (training_days < 1) throw ConfigError("training_days: must be at least 1");
    if (choices < 2) throw ConfigError("choices: must be at least 2");
    if (items_per_arm < choices) throw ConfigError("items_per_arm: must be at least choices");
    if (planner != "myopic" && planner != "conservative" && planner != "balanced") {
        throw ConfigError("planner: expected myopic, conservative or balanced");
    }
    if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("rho: must lie in (0, 1)");
    if (!(iteration_duration > 0.0)) throw ConfigError("iteration_duration: must be positive");
    if (!(second_session_offset >= 0.0) ||
        second_session_offset + 2 * iteration_duration * session_questions > 86400.0) {
        throw ConfigError("second_session_offset: both sessions must fit in one day");
    }
    if (http_threads < 1) throw ConfigError("http_threads: must be at least 1");
    with_path("grid", [&] { grid.validate(); return 0; });
    with_path("leitner", [&] { leitner.validate(); return 0; });
}

ServiceConfig parse_service_config(std::string_view json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    Fields f(root, "config");
    f.reject_unknown({"host", "port", "data_dir", "vocabulary", "seed", "items_per_arm",
                      "session_questions", "training_days", "choices", "planner", "rho", "grid",
                      "leitner", "iteration_duration", "second_session_offset",
                      "allow_time_override", "http_threads"});
    ServiceConfig cfg;
    cfg.host = f.text("host", cfg.host);
    cfg.port = static_cast<int>(f.count("port", static_cast<std::uint32_t>(cfg.port)));
    cfg.data_dir = f.text("data_dir", cfg.data_dir.string());
    cfg.vocabulary = f.text("vocabulary", cfg.vocabulary.string());
    cfg.seed = f.seed("seed", cfg.seed);
    cfg.items_per_arm = f.count("items_per_arm", cfg.items_per_arm);
    cfg.session_questions = f.count("session_questions", cfg.session_questions);
    cfg.training_days = f.count("training_days", cfg.training_days);
    cfg.choices = f.count("choices", cfg.choices);
    cfg.planner = f.text("planner", cfg.planner);
    cfg.rho = f.number("rho", cfg.rho);
    cfg.iteration_duration = f.number("iteration_duration", cfg.iteration_duration);
    cfg.second_session_offset = f.number("second_session_offset", cfg.second_session_offset);
    cfg.allow_time_override = f.flag("allow_time_override", cfg.allow_time_override);
    cfg.http_threads = static_cast<int>(f.count("http_threads", static_cast<std::uint32_t>(cfg.http_threads)));
    if (f.has("grid")) {
        Fields g(f.raw("grid"), f.at("grid"));
        g.reject_unknown({"alpha_points", "alpha_bounds", "beta_points", "beta_bounds"});
        cfg.grid.alpha_points = g.count("alpha_points", static_cast<std::uint32_t>(cfg.grid.alpha_points));
        cfg.grid.beta_points = g.count("beta_points", static_cast<std::uint32_t>(cfg.grid.beta_points));
        std::tie(cfg.grid.alpha_low, cfg.grid.alpha_high) =
            g.bounds("alpha_bounds", {cfg.grid.alpha_low, cfg.grid.alpha_high});
        std::tie(cfg.grid.beta_low, cfg.grid.beta_high) =
            g.bounds("beta_bounds", {cfg.grid.beta_low, cfg.grid.beta_high});
    }
    if (f.has("leitner")) {
        Fields l(f.raw("leitner"), f.at("leitner"));
        l.reject_unknown({"delta_a", "delta_b"});
        cfg.leitner.delta_a = l.number("delta_a", cfg.leitner.delta_a);
        cfg.leitner.delta_b = l.number("delta_b", cfg.leitner.delta_b);
    }
    with_path("config", [&] { cfg.validate(); return 0; });
    return cfg;
}

ServiceConfig load_service_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_service_config(text.str());
}

namespace {

long long parse_integer(const char* name, const char* value, long long low, long long high) {
    char* end = nullptr;
    errno = 0;
    const long long v = std::strtoll(value, &end, 10);
    if (errno != 0 || end == value || *end != '\0' || v < low || v > high) {
        throw ConfigError(std::string(name) + ": '" + value + "' is not a valid integer");
    }
    return v;
}

}  // namespace

void apply_env_overrides(ServiceConfig& cfg, const EnvLookup& lookup) {
    if (const char* v = lookup("ACTIVETEACH_HOST")) cfg.host = v;
    if (const char* v = lookup("ACTIVETEACH_PORT")) {
        cfg.port = static_cast<int>(parse_integer("ACTIVETEACH_PORT", v, 0, 65535));
    }
    if (const char* v = lookup("ACTIVETEACH_DATA_DIR")) cfg.data_dir = v;
    if (const char* v = lookup("ACTIVETEACH_VOCABULARY")) cfg.vocabulary = v;
    if (const char* v = lookup("ACTIVETEACH_SEED")) {
        cfg.seed = static_cast<std::uint64_t>(
            parse_integer("ACTIVETEACH_SEED", v, 0, std::numeric_limits<long long>::max()));
    }
}

void apply_env_overrides(ServiceConfig& cfg) {
    apply_env_overrides(cfg, [](const char* name) { return std::getenv(name); });
}

}  // namespace activeteach::tutor
