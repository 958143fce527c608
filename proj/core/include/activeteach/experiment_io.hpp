#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "activeteach/simulator.hpp"

namespace activeteach {

/// Parses an experiment config (JSON). Unknown keys and type mismatches raise ConfigError
/// naming the offending field, e.g. "config.grid.alpha_points".
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
/// Canonical JSON echo of a config; parse_experiment_config(to_json(c)) reproduces c.
std::string experiment_config_to_json(const ExperimentConfig& cfg);

/// One row of metrics.tsv.
struct MetricsRow {
    std::uint32_t learner = 0;
    std::string teacher;
    std::uint32_t n_learned = 0;
    std::uint32_t n_seen = 0;
    std::optional<double> ratio;
};

/// metrics.tsv: learner, teacher, n_learned, n_seen, ratio ("NA" when nothing was seen).
void write_metrics_table(std::ostream& out, const ExperimentResult& result);
std::vector<MetricsRow> read_metrics_table(std::istream& in);

/// prediction_error.tsv: teacher, learner, session, error (model-based teachers only).
void write_error_table(std::ostream& out, const ExperimentResult& result);

struct ErrorRow {
    std::string teacher;
    std::uint32_t learner = 0;
    std::uint32_t session = 0;
    double error = 0.0;
};
std::vector<ErrorRow> read_error_table(std::istream& in);

/// learners.tsv: learner, item ("*" for EF), alpha, beta.
void write_learner_table(std::ostream& out, const std::vector<LearnerSpec>& learners);

/// trials.tsv: one TrialRecord per line.
void write_trial_table(std::ostream& out, const ExperimentResult& result);

}  // namespace activeteach
