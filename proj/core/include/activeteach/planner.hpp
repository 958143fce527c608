#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "activeteach/memory_model.hpp"
#include "activeteach/psychologist.hpp"
#include "activeteach/schedule.hpp"

namespace activeteach {

enum class PlannerKind { Myopic, Conservative };

std::string_view to_string(PlannerKind kind);
PlannerKind parse_planner_kind(std::string_view text);

struct PlannerConfig {
    double rho = 0.9;
    std::uint32_t item_count = 0;
    PlannerKind kind = PlannerKind::Myopic;

    /// Throws ConfigError unless 0 < rho < 1 and item_count >= 1.
    void validate() const;
};

/**
 * Presentation history of a learner over an item universe of size Q.
 *
 * `introduced` lists items in first-presentation order; `step` counts completed iterations and
 * `clock` is the time at which the next decision is taken.
 */
struct TeacherState {
    std::vector<ItemState> items;
    std::vector<ItemId> introduced;
    std::uint32_t step = 0;
    Seconds clock = 0.0;

    TeacherState() = default;
    explicit TeacherState(std::uint32_t item_count) : items(item_count) {}

    std::uint32_t item_count() const { return static_cast<std::uint32_t>(items.size()); }
    /// Position of `item` in `introduced`, or introduced.size() if never presented.
    std::size_t introduction_rank(ItemId item) const;
    /// Records a presentation of `item` at `now` and advances `step`.
    void present(ItemId item, Seconds now);

    friend bool operator==(const TeacherState&, const TeacherState&) = default;
};

/// Number of introduced items whose predicted recall at `at` is >= rho.
std::size_t reward_count(const TeacherState& state, const RecallPredictor& predictor, double rho,
                         Seconds at);

/// Greedy choice at state.clock: the lowest-recall item below rho (earliest introduced on ties),
/// else the next unseen item in universe order, else the lowest-recall introduced item.
ItemId myopic_select(const TeacherState& state, const RecallPredictor& predictor,
                     const PlannerConfig& cfg);

struct ConservativeTrace {
    std::uint32_t rollouts = 0;
    std::uint32_t vetoes = 0;
};

/// Myopic choice vetoed while a frozen-belief myopic rollout to the horizon shows that the
/// items introduced up to and including the proposal cannot all reach rho at evaluation.
ItemId conservative_select(const TeacherState& state, const RecallPredictor& predictor,
                           const PlannerConfig& cfg, const Schedule& schedule,
                           ConservativeTrace* trace = nullptr);

/// Dispatches on cfg.kind.
ItemId plan_next(const TeacherState& state, const RecallPredictor& predictor,
                 const PlannerConfig& cfg, const Schedule& schedule);

/**
 * Plays the myopic policy, restricted to `universe`, on a copy of `state` for every remaining
 * step up to the schedule horizon. The first simulated step happens at state.clock, later ones
 * at their scheduled times. Beliefs are not touched.
 */
TeacherState rollout_myopic(TeacherState state, const RecallPredictor& predictor,
                            std::span<const ItemId> universe, double rho,
                            const Schedule& schedule);

/// Scheduled time of `step`, never earlier than `after`.
Seconds step_time(const Schedule& schedule, std::uint32_t step, Seconds after);

}  // namespace activeteach
