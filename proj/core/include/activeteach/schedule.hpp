#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "activeteach/memory_model.hpp"

namespace activeteach {

inline constexpr Seconds kSecondsPerDay = 86400.0;

struct Session {
    Seconds start = 0.0;
    std::uint32_t iterations = 0;
    Seconds iteration_duration = 4.0;

    Seconds end() const { return start + iteration_duration * iterations; }
};

/**
 * Deterministic teaching calendar known to the teacher in advance.
 *
 * Steps are numbered globally across sessions, 0 .. horizon()-1; step k happens at
 * time_of_step(k). The final reward is evaluated at eval_time().
 */
class Schedule {
public:
    /// Throws ConfigError for empty/overlapping/unsorted sessions or eval_time before the end.
    Schedule(std::vector<Session> sessions, Seconds eval_time);

    /// `sessions` daily sessions of `iterations` steps starting at `first_start`, one day apart,
    /// evaluated one day after the last session's start.
    static Schedule daily(std::uint32_t sessions, std::uint32_t iterations,
                          Seconds iteration_duration = 4.0, Seconds first_start = 0.0);

    const std::vector<Session>& sessions() const { return sessions_; }
    Seconds eval_time() const { return eval_time_; }
    /// Total number of teaching steps (the horizon F).
    std::uint32_t horizon() const { return horizon_; }

    Seconds time_of_step(std::uint32_t step) const;
    std::uint32_t session_of_step(std::uint32_t step) const;
    /// Step index of the first iteration of `session`.
    std::uint32_t first_step_of_session(std::uint32_t session) const;
    /// Session whose [start, end) window contains `t`.
    std::optional<std::uint32_t> session_at(Seconds t) const;

private:
    std::vector<Session> sessions_;
    std::vector<std::uint32_t> first_step_;
    Seconds eval_time_;
    std::uint32_t horizon_ = 0;
};

}  // namespace activeteach
