#include "activeteach/planner.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "activeteach/errors.hpp"

namespace activeteach {

namespace {

/// Items a restricted myopic teacher may choose from.
struct Candidates {
    std::size_t introduced_prefix;       // first k introduced items are eligible
    bool allow_new;                      // unseen items may be introduced
    const std::vector<char>* mask = nullptr;  // optional extra membership filter

    bool admits(ItemId item) const { return mask == nullptr || (*mask)[item] != 0; }
};

ItemId myopic_among(const TeacherState& state, const RecallPredictor& predictor, double rho,
                    const Candidates& candidates) {
    const Seconds now = state.clock;
    const std::size_t limit = std::min(candidates.introduced_prefix, state.introduced.size());
    ItemId lowest = 0;
    double lowest_p = std::numeric_limits<double>::infinity();
    bool found = false;
    for (std::size_t rank = 0; rank < limit; ++rank) {
        const ItemId item = state.introduced[rank];
        if (!candidates.admits(item)) continue;
        const double p = predictor.predict_recall(item, state.items[item], now);
        if (p < lowest_p) {
            lowest_p = p;
            lowest = item;
            found = true;
        }
    }
    if (found && lowest_p < rho) return lowest;
    if (candidates.allow_new) {
        for (ItemId item = 0; item < state.item_count(); ++item) {
            if (!state.items[item].seen() && candidates.admits(item)) return item;
        }
    }
    if (found) return lowest;
    throw ConfigError("no candidate item available for selection");
}

void run_rollout(TeacherState& state, const RecallPredictor& predictor, double rho,
                 const Schedule& schedule, const Candidates& candidates) {
    const std::uint32_t horizon = schedule.horizon();
    Seconds t = state.clock;
    while (state.step < horizon) {
        state.clock = t;
        state.present(myopic_among(state, predictor, rho, candidates), t);
        if (state.step < horizon) t = step_time(schedule, state.step, t);
    }
}

constexpr std::size_t kAllIntroduced = std::numeric_limits<std::size_t>::max();

}  // namespace

std::string_view to_string(PlannerKind kind) {
    return kind == PlannerKind::Myopic ? "myopic" : "conservative";
}

PlannerKind parse_planner_kind(std::string_view text) {
    if (text == "myopic") return PlannerKind::Myopic;
    if (text == "conservative") return PlannerKind::Conservative;
    throw ConfigError("unknown planner '" + std::string(text) + "' (expected myopic or conservative)");
}

void PlannerConfig::validate() const {
    if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("rho must lie in (0, 1)");
    if (item_count == 0) throw ConfigError("item universe is empty");
}

std::size_t TeacherState::introduction_rank(ItemId item) const {
    const auto it = std::find(introduced.begin(), introduced.end(), item);
    return static_cast<std::size_t>(std::distance(introduced.begin(), it));
}

void TeacherState::present(ItemId item, Seconds now) {
    if (item >= items.size()) {
        throw ConfigError("item " + std::to_string(item) + " outside the universe");
    }
    const bool first = !items[item].seen();
    items[item] = record_presentation(items[item], now);
    if (first) introduced.push_back(item);
    ++step;
    clock = now;
}

Seconds step_time(const Schedule& schedule, std::uint32_t step, Seconds after) {
    const auto session = schedule.session_of_step(step);
    const Seconds duration = schedule.sessions()[session].iteration_duration;
    return std::max(schedule.time_of_step(step), after + duration);
}

std::size_t reward_count(const TeacherState& state, const RecallPredictor& predictor, double rho,
                         Seconds at) {
    std::size_t count = 0;
    for (ItemId item : state.introduced) {
        if (predictor.predict_recall(item, state.items[item], at) >= rho) ++count;
    }
    return count;
}

ItemId myopic_select(const TeacherState& state, const RecallPredictor& predictor,
                     const PlannerConfig& cfg) {
    cfg.validate();
    if (state.item_count() != cfg.item_count) {
        throw ConfigError("teacher state and planner disagree on the universe size");
    }
    return myopic_among(state, predictor, cfg.rho, {state.introduced.size(), true});
}

ItemId conservative_select(const TeacherState& state, const RecallPredictor& predictor,
                           const PlannerConfig& cfg, const Schedule& schedule,
                           ConservativeTrace* trace) {
    cfg.validate();
    if (state.item_count() != cfg.item_count) {
        throw ConfigError("teacher state and planner disagree on the universe size");
    }
    Candidates candidates{state.introduced.size(), true};
    std::vector<char> mask(state.item_count(), 0);
    while (true) {
        const ItemId proposal = myopic_among(state, predictor, cfg.rho, candidates);
        const std::size_t rank = state.introduction_rank(proposal);
        if (rank == 0) return proposal;

        // Items that must all be memorised: everything introduced up to the proposal.
        std::fill(mask.begin(), mask.end(), 0);
        for (std::size_t r = 0; r < rank; ++r) mask[state.introduced[r]] = 1;
        mask[proposal] = 1;

        TeacherState sim = state;
        sim.present(proposal, state.clock);
        if (sim.step < schedule.horizon()) {
            sim.clock = step_time(schedule, sim.step, state.clock);
            run_rollout(sim, predictor, cfg.rho, schedule,
                        Candidates{kAllIntroduced, false, &mask});
        }
        if (trace) ++trace->rollouts;

        bool feasible = true;
        for (std::size_t r = 0; r <= rank && feasible; ++r) {
            const ItemId item = sim.introduced[r];
            feasible = predictor.predict_recall(item, sim.items[item], schedule.eval_time()) >=
                       cfg.rho;
        }
        if (feasible) return proposal;
        if (trace) ++trace->vetoes;
        candidates = Candidates{rank, false};
    }
}

ItemId plan_next(const TeacherState& state, const RecallPredictor& predictor,
                 const PlannerConfig& cfg, const Schedule& schedule) {
    return cfg.kind == PlannerKind::Myopic ? myopic_select(state, predictor, cfg)
                                           : conservative_select(state, predictor, cfg, schedule);
}

TeacherState rollout_myopic(TeacherState state, const RecallPredictor& predictor,
                            std::span<const ItemId> universe, double rho,
                            const Schedule& schedule) {
    std::vector<char> mask(state.item_count(), 0);
    for (ItemId item : universe) {
        if (item >= mask.size()) throw ConfigError("rollout universe exceeds the item universe");
        mask[item] = 1;
    }
    if (state.step >= schedule.horizon() || universe.empty()) return state;
    run_rollout(state, predictor, rho, schedule, Candidates{kAllIntroduced, true, &mask});
    return state;
}

}  // namespace activeteach
