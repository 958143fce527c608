#include "activeteach/teacher.hpp"

#include <string>

#include "activeteach/errors.hpp"

namespace activeteach {

std::string_view to_string(TeacherKind kind) {
    switch (kind) {
        case TeacherKind::Leitner: return "leitner";
        case TeacherKind::Myopic: return "myopic";
        case TeacherKind::Conservative: return "conservative";
    }
    return "unknown";
}

TeacherKind parse_teacher_kind(std::string_view text) {
    if (text == "leitner") return TeacherKind::Leitner;
    if (text == "myopic") return TeacherKind::Myopic;
    if (text == "conservative") return TeacherKind::Conservative;
    throw ConfigError("unknown teacher '" + std::string(text) +
                      "' (expected leitner, myopic or conservative)");
}

LeitnerTeacher::LeitnerTeacher(std::uint32_t item_count, LeitnerConfig cfg, std::uint64_t seed)
    : leitner_(item_count, cfg, seed), history_(item_count) {}

Decision LeitnerTeacher::next(Seconds now) {
    history_.clock = now;
    const ItemId item = leitner_select(leitner_, now, history_.step);
    return Decision{item, !history_.items[item].seen(), std::nullopt};
}

void LeitnerTeacher::observe(ItemId item, bool outcome, Seconds now) {
    leitner_update(leitner_, item, outcome, now);
    history_.present(item, now);
}

PlanningTeacher::PlanningTeacher(PlannerConfig cfg, Schedule schedule,
                                 std::unique_ptr<Psychologist> psychologist)
    : cfg_(cfg),
      schedule_(std::move(schedule)),
      psychologist_(std::move(psychologist)),
      state_(cfg.item_count) {
    cfg_.validate();
    if (!psychologist_) throw ConfigError("planning teacher needs a psychologist");
}

TeacherKind PlanningTeacher::kind() const {
    return cfg_.kind == PlannerKind::Myopic ? TeacherKind::Myopic : TeacherKind::Conservative;
}

Decision PlanningTeacher::next(Seconds now) {
    state_.clock = now;
    const ItemId item = plan_next(state_, *psychologist_, cfg_, schedule_);
    const auto& item_state = state_.items[item];
    if (!item_state.seen()) return Decision{item, true, 1.0};
    return Decision{item, false, psychologist_->predict_recall(item, item_state, now)};
}

void PlanningTeacher::observe(ItemId item, bool outcome, Seconds now) {
    if (item >= state_.item_count()) {
        throw ConfigError("item " + std::to_string(item) + " outside the universe");
    }
    const ItemState before = state_.items[item];
    if (before.seen()) psychologist_->observe(item, before, outcome, now);
    state_.present(item, now);
}

}  // namespace activeteach
