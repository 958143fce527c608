#pragma once

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "activeteach/memory_model.hpp"
#include "activeteach/tutor/vocabulary.hpp"

struct sqlite3;

namespace activeteach::tutor {

class StoreError : public Error {
public:
    explicit StoreError(const std::string& what) : Error("store: " + what) {}
};

enum class Phase { Training, Evaluation };

std::string_view to_string(Phase phase);

struct UserRecord {
    std::string id;
    std::string token;
    Seconds start = 0.0;  // day-0 session time
    std::uint64_t seed = 0;
    std::string planner;  // "myopic" | "conservative", used by arm 1
    int first_arm = 0;    // arm taught first on day 0
    /// Vocabulary ids per arm, in universe order.
    std::vector<std::string> items[2];
};

/// Question handed out and not yet answered.
struct PendingQuestion {
    std::string user;
    int arm = 0;
    Phase phase = Phase::Training;
    std::uint32_t trial = 0;  // per (user, arm, phase) counter
    std::uint32_t session = 0;
    Seconds time = 0.0;
    ItemId item = 0;  // index in the arm's universe
    std::vector<std::string> choices;
    bool first_presentation = false;
    std::optional<double> predicted_recall;
};

struct StoredTrial {
    PendingQuestion question;
    Seconds answered_at = 0.0;
    std::string chosen;
    bool outcome = false;
};

struct EvaluationSummary {
    std::uint32_t n_learned = 0;
    std::uint32_t n_seen = 0;
    Seconds completed_at = 0.0;
};

/// SQLite-backed persistence. Trials are append-only. All methods are thread-safe.
class Store {
public:
    explicit Store(const std::filesystem::path& db_path);
    ~Store();
    Store(const Store&) = delete;
    Store& operator=(const Store&) = delete;

    /// All-or-nothing; an id already present rejects the whole batch.
    std::size_t add_vocabulary(const std::vector<VocabularyItem>& items);
    std::vector<VocabularyItem> vocabulary() const;

    void add_user(const UserRecord& user);
    std::optional<UserRecord> user(const std::string& id) const;
    std::vector<std::string> user_ids() const;

    void put_pending(const PendingQuestion& q);
    std::optional<PendingQuestion> pending(const std::string& user, int arm) const;

    /// Appends the trial and clears the matching pending question in one transaction.
    void commit_trial(const StoredTrial& trial);
    std::vector<StoredTrial> trials(const std::string& user, int arm, Phase phase) const;

    void put_evaluation(const std::string& user, int arm, const EvaluationSummary& summary);
    std::optional<EvaluationSummary> evaluation(const std::string& user, int arm) const;

private:
    void exec(const char* sql) const;

    sqlite3* db_ = nullptr;
    mutable std::mutex mutex_;
};

}  // namespace activeteach::tutor
