#include "activeteach/schedule.hpp"

#include <algorithm>
#include <string>

#include "activeteach/errors.hpp"

namespace activeteach {

Schedule::Schedule(std::vector<Session> sessions, Seconds eval_time)
    : sessions_(std::move(sessions)), eval_time_(eval_time) {
    if (sessions_.empty()) throw ConfigError("schedule has no sessions");
    for (std::size_t i = 0; i < sessions_.size(); ++i) {
        const auto& s = sessions_[i];
        if (s.iterations == 0) {
            throw ConfigError("session " + std::to_string(i) + " has no iterations");
        }
        if (!(s.iteration_duration > 0.0)) {
            throw ConfigError("session " + std::to_string(i) + " has non-positive iteration duration");
        }
        if (i > 0 && s.start < sessions_[i - 1].end()) {
            throw ConfigError("session " + std::to_string(i) + " overlaps the previous one");
        }
        first_step_.push_back(horizon_);
        horizon_ += s.iterations;
    }
    if (eval_time_ < sessions_.back().end()) {
        throw ConfigError("evaluation time precedes the end of the last session");
    }
}

Schedule Schedule::daily(std::uint32_t sessions, std::uint32_t iterations,
                         Seconds iteration_duration, Seconds first_start) {
    std::vector<Session> out;
    for (std::uint32_t d = 0; d < sessions; ++d) {
        out.push_back({first_start + kSecondsPerDay * d, iterations, iteration_duration});
    }
    return Schedule(std::move(out), first_start + kSecondsPerDay * sessions);
}

std::uint32_t Schedule::session_of_step(std::uint32_t step) const {
    if (step >= horizon_) throw ConfigError("step " + std::to_string(step) + " beyond horizon");
    const auto it = std::upper_bound(first_step_.begin(), first_step_.end(), step);
    return static_cast<std::uint32_t>(std::distance(first_step_.begin(), it) - 1);
}

std::uint32_t Schedule::first_step_of_session(std::uint32_t session) const {
    if (session >= sessions_.size()) throw ConfigError("no session " + std::to_string(session));
    return first_step_[session];
}

Seconds Schedule::time_of_step(std::uint32_t step) const {
    const auto session = session_of_step(step);
    const auto& s = sessions_[session];
    return s.start + s.iteration_duration * (step - first_step_[session]);
}

std::optional<std::uint32_t> Schedule::session_at(Seconds t) const {
    for (std::uint32_t i = 0; i < sessions_.size(); ++i) {
        if (t >= sessions_[i].start && t < sessions_[i].end()) return i;
    }
    return std::nullopt;
}

}  // namespace activeteach
