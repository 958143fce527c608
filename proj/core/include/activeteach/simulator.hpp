#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "activeteach/learner.hpp"
#include "activeteach/leitner.hpp"
#include "activeteach/psychologist.hpp"
#include "activeteach/schedule.hpp"
#include "activeteach/teacher.hpp"

namespace activeteach {

struct ExperimentConfig {
    std::uint32_t population_size = 100;
    std::uint32_t item_count = 500;
    Schedule schedule = Schedule::daily(6, 100);
    std::vector<TeacherKind> teachers{TeacherKind::Leitner, TeacherKind::Myopic,
                                      TeacherKind::Conservative};
    ModelKind model = ModelKind::EF;
    bool omniscient = false;
    double rho = 0.9;
    GridSpec grid;
    PopulationConfig population;
    LeitnerConfig leitner;
    std::uint64_t seed = 0;
    /// Worker threads for the per-learner fan-out; 0 picks the hardware concurrency.
    std::uint32_t threads = 0;
    bool keep_trials = false;

    void validate() const;
};

/// One iteration of a simulated teaching run.
struct TrialRecord {
    std::uint32_t learner = 0;
    TeacherKind teacher = TeacherKind::Leitner;
    std::uint32_t session = 0;
    std::uint32_t step = 0;
    Seconds time = 0.0;
    ItemId item = 0;
    bool first_presentation = false;
    bool outcome = false;
    std::optional<double> predicted_recall;
    double true_recall = 1.0;
};

struct RunMetrics {
    std::uint32_t learner = 0;
    TeacherKind teacher = TeacherKind::Leitner;
    std::uint32_t n_learned = 0;
    std::uint32_t n_seen = 0;
    /// Mean |predicted - true| per session; empty for teachers without a model.
    std::vector<double> session_error;
    std::vector<TrialRecord> trials;  // filled when keep_trials is set

    std::optional<double> ratio() const;
};

struct ExperimentResult {
    std::vector<LearnerSpec> learners;
    std::map<TeacherKind, std::vector<RunMetrics>> runs;  // ordered by learner index
};

/// Learners for the experiment, with the Leitner inclusion filter applied when configured.
std::vector<LearnerSpec> sample_population(const ExperimentConfig& cfg);

/// Teaches one learner with one teacher along the schedule and scores it at eval_time.
RunMetrics run_learner(const ExperimentConfig& cfg, const LearnerSpec& learner,
                       std::uint32_t learner_index, TeacherKind teacher,
                       const std::shared_ptr<const ParamGrid>& grid);

ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Mean absolute prediction error per session over records carrying a prediction.
std::vector<double> prediction_error_series(std::span<const TrialRecord> records,
                                            std::uint32_t session_count);
/// Same, against the binary outcome rather than the true probability.
std::vector<double> outcome_error_series(std::span<const TrialRecord> records,
                                         std::uint32_t session_count);

}  // namespace activeteach
