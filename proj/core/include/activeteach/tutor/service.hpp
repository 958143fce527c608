#pragma once

#include <atomic>
#include <cstdint>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "activeteach/teacher.hpp"
#include "activeteach/tutor/service_config.hpp"
#include "activeteach/tutor/store.hpp"

namespace activeteach::tutor {

/// Wall clock in seconds. Replaceable so tests can drive time.
class Clock {
public:
    virtual ~Clock() = default;
    virtual Seconds now() const = 0;
};

class SystemClock final : public Clock {
public:
    Seconds now() const override;
};

class ManualClock final : public Clock {
public:
    explicit ManualClock(Seconds start = 0.0) : now_(start) {}
    Seconds now() const override { return now_.load(); }
    void set(Seconds t) { now_.store(t); }
    void advance(Seconds dt) { now_.store(now_.load() + dt); }

private:
    std::atomic<Seconds> now_;
};

class ServiceError : public Error {
public:
    enum class Code {
        BadRequest,
        Unauthorized,
        NotFound,
        OutsideWindow,
        SessionComplete,
        EvaluationComplete,
        Stale,
        Duplicate,
        Conflict,
    };

    ServiceError(Code code, const std::string& what) : Error(what), code_(code) {}
    Code code() const { return code_; }

private:
    Code code_;
};

std::string_view to_string(ServiceError::Code code);

inline constexpr int kLeitnerArm = 0;
inline constexpr int kModelArm = 1;

struct NewUser {
    std::optional<std::string> id;
    /// Daily session time; defaults to the current time.
    std::optional<Seconds> start;
    /// Overrides the configured planner assignment.
    std::optional<std::string> planner;
};

struct CreatedUser {
    std::string id;
    std::string token;
    std::string planner;
    Seconds start = 0.0;
};

struct SessionSlot {
    std::uint32_t day = 0;
    int arm = 0;
    Seconds opens_at = 0.0;
    std::uint32_t answered = 0;
};

struct UserSchedule {
    Seconds start = 0.0;
    std::uint32_t training_days = 0;
    std::uint32_t session_questions = 0;
    std::vector<SessionSlot> sessions;  // two per training day, in teaching order
    Seconds evaluation_opens_at = 0.0;
    std::optional<std::uint32_t> current_day;  // absent before start
};

struct Question {
    int arm = 0;
    Phase phase = Phase::Training;
    std::uint32_t trial = 0;
    std::uint32_t session = 0;
    std::string item_id;
    std::string prompt;
    std::vector<std::string> choices;
    bool first_presentation = false;
    /// Revealed with first presentations only.
    std::optional<std::string> answer;
    std::uint32_t answered_in_session = 0;
    std::uint32_t quota = 0;
};

struct AnswerAck {
    bool correct = false;
    std::string correct_answer;
    std::uint32_t answered_in_session = 0;
    bool session_complete = false;
};

struct ItemVerdict {
    std::string item_id;
    std::vector<bool> responses;
    bool learned = false;
};

struct EvaluationResult {
    bool complete = false;
    std::uint32_t answered = 0;
    std::uint32_t total = 0;  // 2 * n_seen
    std::vector<ItemVerdict> verdicts;  // in universe order
    std::uint32_t n_learned = 0;
    std::uint32_t n_seen = 0;
    std::optional<double> ratio;
};

struct ItemEstimate {
    std::string item_id;
    double alpha = 0.0;
    double beta = 0.0;
};

struct ArmStats {
    int arm = 0;
    std::string teacher;
    std::uint32_t n_answered = 0;
    std::uint32_t n_seen = 0;
    std::optional<EvaluationSummary> evaluation;
    std::vector<ItemEstimate> estimates;  // model arm only
};

/// Comparable view of an arm's teacher, used by the replay-equality check.
struct ArmSnapshot {
    TeacherState history;
    std::optional<LeitnerState> leitner;
    /// Reviewed items and their belief weights (model arm).
    std::vector<std::pair<ItemId, std::vector<double>>> beliefs;

    friend bool operator==(const ArmSnapshot&, const ArmSnapshot&) = default;
};

/**
 * Live teaching sessions for human learners.
 *
 * Every user owns two disjoint item sets. Arm 0 is taught by a Leitner teacher, arm 1 by a
 * model-based planner on the ISEF model. Teacher state lives in memory and is rebuilt on demand by
 * replaying the persisted trial log, so a restart between any two trials is invisible to the
 * learner.
 */
class TutorService {
public:
    TutorService(ServiceConfig cfg, std::shared_ptr<Clock> clock);
    ~TutorService();

    const ServiceConfig& config() const { return cfg_; }
    Seconds now() const { return clock_->now(); }

    /// Parses, validates and persists a vocabulary document. Returns the number of items added.
    std::size_t ingest_vocabulary(std::istream& document);
    std::size_t vocabulary_size() const;

    CreatedUser create_user(const NewUser& request);
    /// Throws Unauthorized when the token does not match.
    void authenticate(const std::string& user, const std::string& token) const;

    UserSchedule schedule(const std::string& user, Seconds now) const;

    Question next_question(const std::string& user, int arm, Seconds now);
    AnswerAck submit_answer(const std::string& user, int arm, std::uint32_t trial,
                            const std::string& item_id, const std::string& chosen, Seconds now);

    Question next_evaluation_question(const std::string& user, int arm, Seconds now);
    AnswerAck submit_evaluation_answer(const std::string& user, int arm, std::uint32_t trial,
                                       const std::string& item_id, const std::string& chosen,
                                       Seconds now);
    EvaluationResult evaluation(const std::string& user, int arm) const;

    std::vector<ArmStats> stats(const std::string& user) const;

    ArmSnapshot snapshot(const std::string& user, int arm) const;
    /// Drops cached teachers; the next request rebuilds them from the store.
    void evict_cache();

private:
    struct Arm;
    struct UserEntry;

    UserEntry& load_user(const std::string& user) const;
    Arm& arm_of(UserEntry& u, int arm) const;
    void ensure_teacher(UserEntry& u, Arm& a) const;
    std::unique_ptr<Teacher> make_teacher(const UserEntry& u, int arm) const;
    std::vector<std::string> draw_choices(const UserEntry& u, int arm, Phase phase,
                                          std::uint32_t trial, ItemId item) const;
    Question render(const UserEntry& u, const PendingQuestion& p, std::uint32_t answered) const;
    std::vector<ItemId> evaluation_order(const UserEntry& u, const Arm& a) const;
    EvaluationResult evaluate(const UserEntry& u, const Arm& a) const;

    ServiceConfig cfg_;
    std::shared_ptr<Clock> clock_;
    std::unique_ptr<Store> store_;
    std::shared_ptr<const ParamGrid> grid_;
    mutable std::mutex vocab_mutex_;
    mutable std::vector<VocabularyItem> vocabulary_;
    mutable std::map<std::string, std::size_t> vocab_index_;
    mutable std::mutex users_mutex_;
    mutable std::map<std::string, std::unique_ptr<UserEntry>> users_;
};

}  // namespace activeteach::tutor
