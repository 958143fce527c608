#pragma once

#include <memory>
#include <optional>
#include <string_view>

#include "activeteach/leitner.hpp"
#include "activeteach/planner.hpp"
#include "activeteach/psychologist.hpp"
#include "activeteach/schedule.hpp"

namespace activeteach {

enum class TeacherKind { Leitner, Myopic, Conservative };

std::string_view to_string(TeacherKind kind);
TeacherKind parse_teacher_kind(std::string_view text);

struct Decision {
    ItemId item = 0;
    bool first_presentation = false;
    /// Teacher's recall estimate at decision time; 1 for first presentations, absent for Leitner.
    std::optional<double> predicted_recall;
};

/// One learner's teacher: chooses items and absorbs outcomes, one iteration at a time.
class Teacher {
public:
    virtual ~Teacher() = default;

    virtual TeacherKind kind() const = 0;
    /// Chooses the item for the next iteration at `now`. Does not change state except for
    /// Leitner's waiting-queue bookkeeping.
    virtual Decision next(Seconds now) = 0;
    /// Applies the outcome of presenting `item` at `now`; first presentations skip inference.
    virtual void observe(ItemId item, bool outcome, Seconds now) = 0;
    /// Presentation history, shared by every teacher kind.
    virtual const TeacherState& history() const = 0;
};

class LeitnerTeacher final : public Teacher {
public:
    LeitnerTeacher(std::uint32_t item_count, LeitnerConfig cfg, std::uint64_t seed);

    TeacherKind kind() const override { return TeacherKind::Leitner; }
    Decision next(Seconds now) override;
    void observe(ItemId item, bool outcome, Seconds now) override;
    const TeacherState& history() const override { return history_; }

    const LeitnerState& leitner() const { return leitner_; }

private:
    LeitnerState leitner_;
    TeacherState history_;
};

/// Psychologist + planner.
class PlanningTeacher final : public Teacher {
public:
    PlanningTeacher(PlannerConfig cfg, Schedule schedule, std::unique_ptr<Psychologist> psychologist);

    TeacherKind kind() const override;
    Decision next(Seconds now) override;
    void observe(ItemId item, bool outcome, Seconds now) override;
    const TeacherState& history() const override { return state_; }

    const Psychologist& psychologist() const { return *psychologist_; }
    const PlannerConfig& config() const { return cfg_; }
    const Schedule& schedule() const { return schedule_; }

private:
    PlannerConfig cfg_;
    Schedule schedule_;
    std::unique_ptr<Psychologist> psychologist_;
    TeacherState state_;
};

}  // namespace activeteach
