#include "activeteach/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "activeteach/errors.hpp"

namespace activeteach {

namespace {

constexpr std::uint64_t kPopulationStream = 0x504F50;
constexpr std::uint64_t kResponseStream = 0x524553;
constexpr std::uint64_t kLeitnerStream = 0x4C4549;

std::unique_ptr<Teacher> make_teacher(const ExperimentConfig& cfg, const LearnerSpec& learner,
                                      std::uint32_t learner_index, TeacherKind kind,
                                      const std::shared_ptr<const ParamGrid>& grid) {
    if (kind == TeacherKind::Leitner) {
        auto seed_rng = make_rng(cfg.seed, kLeitnerStream, learner_index);
        return std::make_unique<LeitnerTeacher>(cfg.item_count, cfg.leitner, seed_rng());
    }
    std::unique_ptr<Psychologist> psychologist;
    if (cfg.omniscient) {
        psychologist = std::make_unique<OmniscientPsychologist>(learner.model, learner.params);
    } else {
        psychologist = std::make_unique<BayesianPsychologist>(BeliefBank(cfg.model, grid));
    }
    PlannerConfig planner{cfg.rho, cfg.item_count,
                          kind == TeacherKind::Myopic ? PlannerKind::Myopic : PlannerKind::Conservative};
    return std::make_unique<PlanningTeacher>(planner, cfg.schedule, std::move(psychologist));
}

std::vector<double> series(std::span<const TrialRecord> records, std::uint32_t session_count,
                           bool against_outcome) {
    std::vector<double> sum(session_count, 0.0);
    std::vector<std::uint32_t> count(session_count, 0);
    for (const auto& r : records) {
        if (!r.predicted_recall || r.session >= session_count) continue;
        const double target = against_outcome ? (r.outcome ? 1.0 : 0.0) : r.true_recall;
        sum[r.session] += r.first_presentation ? 0.0 : std::abs(*r.predicted_recall - target);
        ++count[r.session];
    }
    std::vector<double> out;
    for (std::uint32_t s = 0; s < session_count; ++s) {
        if (count[s] == 0) return {};
        out.push_back(sum[s] / count[s]);
    }
    return out;
}

template <class Fn>
void parallel_for(std::uint32_t count, std::uint32_t threads, Fn&& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, count);
    if (threads <= 1) {
        for (std::uint32_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::uint32_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::uint32_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::uint32_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace

void ExperimentConfig::validate() const {
    if (population_size == 0) throw ConfigError("population_size must be >= 1");
    if (item_count == 0) throw ConfigError("item_count must be >= 1");
    if (teachers.empty()) throw ConfigError("no teachers to compare");
    if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("rho must lie in (0, 1)");
    grid.validate();
    population.validate();
    leitner.validate();
}

std::optional<double> RunMetrics::ratio() const {
    if (n_seen == 0) return std::nullopt;
    return static_cast<double>(n_learned) / n_seen;
}

std::vector<LearnerSpec> sample_population(const ExperimentConfig& cfg) {
    const auto cells = viable_cells(cfg.population, cfg.item_count, cfg.schedule, cfg.leitner, cfg.rho, cfg.seed);
    std::vector<LearnerSpec> learners(cfg.population_size);
    parallel_for(cfg.population_size, cfg.threads, [&](std::uint32_t index) {
        auto rng = make_rng(cfg.seed, kPopulationStream, index);
        for (std::uint32_t attempt = 0; attempt < cfg.population.max_attempts; ++attempt) {
            LearnerSpec spec = draw_learner(cells, cfg.model, cfg.item_count, rng);
            if (!cfg.population.require_leitner_learning ||
                leitner_items_learned(spec, cfg.item_count, cfg.schedule, cfg.leitner, cfg.rho) >= 1) {
                learners[index] = std::move(spec);
                return;
            }
        }
        throw ConfigError("no learner passing the Leitner filter after " +
                          std::to_string(cfg.population.max_attempts) + " attempts");
    });
    return learners;
}

RunMetrics run_learner(const ExperimentConfig& cfg, const LearnerSpec& learner,
                       std::uint32_t learner_index, TeacherKind kind,
                       const std::shared_ptr<const ParamGrid>& grid) {
    learner.validate(cfg.item_count);
    auto teacher = make_teacher(cfg, learner, learner_index, kind, grid);
    auto rng = make_rng(cfg.seed, kResponseStream, learner_index);
    const auto& schedule = cfg.schedule;

    std::vector<TrialRecord> trials;
    trials.reserve(schedule.horizon());
    for (std::uint32_t step = 0; step < schedule.horizon(); ++step) {
        const Seconds t = schedule.time_of_step(step);
        const Decision d = teacher->next(t);
        const ItemState before = teacher->history().items[d.item];
        TrialRecord r;
        r.learner = learner_index;
        r.teacher = kind;
        r.session = schedule.session_of_step(step);
        r.step = step;
        r.time = t;
        r.item = d.item;
        r.first_presentation = d.first_presentation;
        r.true_recall = before.seen() ? recall_probability(before, learner.params_for(d.item), t) : 1.0;
        r.outcome = simulate_learner_response(learner, rng, d.item, before, t);
        r.predicted_recall = d.predicted_recall;
        teacher->observe(d.item, r.outcome, t);
        trials.push_back(r);
    }

    RunMetrics metrics;
    metrics.learner = learner_index;
    metrics.teacher = kind;
    const auto& history = teacher->history();
    metrics.n_seen = static_cast<std::uint32_t>(history.introduced.size());
    for (ItemId item : history.introduced) {
        if (recall_probability(history.items[item], learner.params_for(item), schedule.eval_time()) >=
            cfg.rho) {
            ++metrics.n_learned;
        }
    }
    metrics.session_error = prediction_error_series(
        trials, static_cast<std::uint32_t>(schedule.sessions().size()));
    if (cfg.keep_trials) metrics.trials = std::move(trials);
    return metrics;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentResult result;
    result.learners = sample_population(cfg);
    const auto grid = std::make_shared<const ParamGrid>(cfg.grid);

    const auto arms = static_cast<std::uint32_t>(cfg.teachers.size());
    std::vector<RunMetrics> flat(static_cast<std::size_t>(arms) * cfg.population_size);
    parallel_for(static_cast<std::uint32_t>(flat.size()), cfg.threads, [&](std::uint32_t job) {
        const std::uint32_t learner = job / arms;
        const TeacherKind kind = cfg.teachers[job % arms];
        flat[job] = run_learner(cfg, result.learners[learner], learner, kind, grid);
    });
    for (std::uint32_t job = 0; job < flat.size(); ++job) {
        result.runs[cfg.teachers[job % arms]].push_back(std::move(flat[job]));
    }
    return result;
}

std::vector<double> prediction_error_series(std::span<const TrialRecord> records,
                                            std::uint32_t session_count) {
    return series(records, session_count, false);
}

std::vector<double> outcome_error_series(std::span<const TrialRecord> records,
                                         std::uint32_t session_count) {
    return series(records, session_count, true);
}

}  // namespace activeteach
