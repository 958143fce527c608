#include "activeteach/tutor/store.hpp"

#include <sqlite3.h>

#include <json.hpp>

namespace activeteach::tutor {

using nlohmann::json;

std::string_view to_string(Phase phase) {
    return phase == Phase::Training ? "train" : "eval";
}

namespace {

Phase parse_phase(std::string_view s) {
    if (s == "train") return Phase::Training;
    if (s == "eval") return Phase::Evaluation;
    throw StoreError("unknown phase '" + std::string(s) + "'");
}

class Stmt {
public:
    Stmt(sqlite3* db, const char* sql) : db_(db) {
        if (sqlite3_prepare_v2(db, sql, -1, &stmt_, nullptr) != SQLITE_OK) {
            throw StoreError(std::string("prepare failed: ") + sqlite3_errmsg(db));
        }
    }
    ~Stmt() { sqlite3_finalize(stmt_); }
    Stmt(const Stmt&) = delete;
    Stmt& operator=(const Stmt&) = delete;

    Stmt& bind(int i, const std::string& v) {
        check(sqlite3_bind_text(stmt_, i, v.c_str(), static_cast<int>(v.size()), SQLITE_TRANSIENT));
        return *this;
    }
    Stmt& bind(int i, double v) {
        check(sqlite3_bind_double(stmt_, i, v));
        return *this;
    }
    Stmt& bind(int i, std::int64_t v) {
        check(sqlite3_bind_int64(stmt_, i, v));
        return *this;
    }
    Stmt& bind(int i, std::optional<double> v) {
        check(v ? sqlite3_bind_double(stmt_, i, *v) : sqlite3_bind_null(stmt_, i));
        return *this;
    }

    /// True while rows are available.
    bool step() {
        const int rc = sqlite3_step(stmt_);
        if (rc == SQLITE_ROW) return true;
        if (rc == SQLITE_DONE) return false;
        throw StoreError(std::string("step failed: ") + sqlite3_errmsg(db_));
    }

    std::string text(int col) const {
        const auto* p = sqlite3_column_text(stmt_, col);
        return p ? reinterpret_cast<const char*>(p) : "";
    }
    double real(int col) const { return sqlite3_column_double(stmt_, col); }
    std::int64_t integer(int col) const { return sqlite3_column_int64(stmt_, col); }
    std::optional<double> nullable_real(int col) const {
        if (sqlite3_column_type(stmt_, col) == SQLITE_NULL) return std::nullopt;
        return real(col);
    }

private:
    void check(int rc) {
        if (rc != SQLITE_OK) throw StoreError(std::string("bind failed: ") + sqlite3_errmsg(db_));
    }

    sqlite3* db_;
    sqlite3_stmt* stmt_ = nullptr;
};

json to_json(const std::vector<std::string>& v) { return json(v); }

std::vector<std::string> strings_from(const std::string& text) {
    return json::parse(text).get<std::vector<std::string>>();
}

constexpr const char* kSchema = R"sql(
CREATE TABLE IF NOT EXISTS vocabulary(
    position INTEGER PRIMARY KEY,
    id TEXT NOT NULL UNIQUE,
    prompt TEXT NOT NULL,
    answer TEXT NOT NULL);
CREATE TABLE IF NOT EXISTS users(
    id TEXT PRIMARY KEY,
    token TEXT NOT NULL,
    start REAL NOT NULL,
    seed INTEGER NOT NULL,
    planner TEXT NOT NULL,
    first_arm INTEGER NOT NULL,
    items0 TEXT NOT NULL,
    items1 TEXT NOT NULL);
CREATE TABLE IF NOT EXISTS pending(
    user_id TEXT NOT NULL,
    arm INTEGER NOT NULL,
    phase TEXT NOT NULL,
    trial INTEGER NOT NULL,
    session INTEGER NOT NULL,
    time REAL NOT NULL,
    item INTEGER NOT NULL,
    choices TEXT NOT NULL,
    first INTEGER NOT NULL,
    predicted REAL,
    PRIMARY KEY(user_id, arm));
CREATE TABLE IF NOT EXISTS trials(
    seq INTEGER PRIMARY KEY AUTOINCREMENT,
    user_id TEXT NOT NULL,
    arm INTEGER NOT NULL,
    phase TEXT NOT NULL,
    trial INTEGER NOT NULL,
    session INTEGER NOT NULL,
    time REAL NOT NULL,
    answered_at REAL NOT NULL,
    item INTEGER NOT NULL,
    choices TEXT NOT NULL,
    chosen TEXT NOT NULL,
    outcome INTEGER NOT NULL,
    first INTEGER NOT NULL,
    predicted REAL,
    UNIQUE(user_id, arm, phase, trial));
CREATE TRIGGER IF NOT EXISTS trials_no_update BEFORE UPDATE ON trials
    BEGIN SELECT RAISE(ABORT, 'trials are append-only'); END;
CREATE TRIGGER IF NOT EXISTS trials_no_delete BEFORE DELETE ON trials
    BEGIN SELECT RAISE(ABORT, 'trials are append-only'); END;
CREATE TABLE IF NOT EXISTS evaluations(
    user_id TEXT NOT NULL,
    arm INTEGER NOT NULL,
    n_learned INTEGER NOT NULL,
    n_seen INTEGER NOT NULL,
    completed_at REAL NOT NULL,
    PRIMARY KEY(user_id, arm));
)sql";

}  // namespace

Store::Store(const std::filesystem::path& db_path) {
    const int rc = sqlite3_open_v2(db_path.string().c_str(), &db_,
                                   SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX,
                                   nullptr);
    if (rc != SQLITE_OK) {
        std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
        sqlite3_close(db_);
        db_ = nullptr;
        throw StoreError("cannot open " + db_path.string() + ": " + msg);
    }
    sqlite3_busy_timeout(db_, 5000);
    try {
        exec("PRAGMA journal_mode=WAL;");
        exec("PRAGMA synchronous=FULL;");
        exec(kSchema);
    } catch (...) {
        sqlite3_close(db_);
        db_ = nullptr;
        throw;
    }
}

Store::~Store() {
    if (db_) sqlite3_close(db_);
}

void Store::exec(const char* sql) const {
    char* err = nullptr;
    if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
        std::string msg = err ? err : "unknown error";
        sqlite3_free(err);
        throw StoreError(msg);
    }
}

namespace {

/// Rolls back unless committed.
class Transaction {
public:
    explicit Transaction(sqlite3* db) : db_(db) { run("BEGIN IMMEDIATE"); }
    ~Transaction() {
        if (!done_) sqlite3_exec(db_, "ROLLBACK", nullptr, nullptr, nullptr);
    }
    void commit() {
        run("COMMIT");
        done_ = true;
    }

private:
    void run(const char* sql) {
        char* err = nullptr;
        if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
            std::string msg = err ? err : "unknown error";
            sqlite3_free(err);
            throw StoreError(msg);
        }
    }

    sqlite3* db_;
    bool done_ = false;
};

}  // namespace

std::size_t Store::add_vocabulary(const std::vector<VocabularyItem>& items) {
    std::lock_guard lock(mutex_);
    Transaction tx(db_);
    std::int64_t position = 0;
    {
        Stmt q(db_, "SELECT COALESCE(MAX(position) + 1, 0) FROM vocabulary");
        if (q.step()) position = q.integer(0);
    }
    for (const auto& item : items) {
        Stmt exists(db_, "SELECT 1 FROM vocabulary WHERE id = ?1");
        exists.bind(1, item.id);
        if (exists.step()) throw StoreError("duplicate vocabulary id '" + item.id + "'");
        Stmt ins(db_, "INSERT INTO vocabulary(position, id, prompt, answer) VALUES (?1, ?2, ?3, ?4)");
        ins.bind(1, position++).bind(2, item.id).bind(3, item.prompt).bind(4, item.answer);
        ins.step();
    }
    tx.commit();
    return items.size();
}

std::vector<VocabularyItem> Store::vocabulary() const {
    std::lock_guard lock(mutex_);
    std::vector<VocabularyItem> out;
    Stmt q(db_, "SELECT id, prompt, answer FROM vocabulary ORDER BY position");
    while (q.step()) out.push_back({q.text(0), q.text(1), q.text(2)});
    return out;
}

void Store::add_user(const UserRecord& user) {
    std::lock_guard lock(mutex_);
    Stmt exists(db_, "SELECT 1 FROM users WHERE id = ?1");
    exists.bind(1, user.id);
    if (exists.step()) throw StoreError("user '" + user.id + "' already exists");
    Stmt ins(db_,
             "INSERT INTO users(id, token, start, seed, planner, first_arm, items0, items1) "
             "VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8)");
    ins.bind(1, user.id)
        .bind(2, user.token)
        .bind(3, user.start)
        .bind(4, static_cast<std::int64_t>(user.seed))
        .bind(5, user.planner)
        .bind(6, static_cast<std::int64_t>(user.first_arm))
        .bind(7, to_json(user.items[0]).dump())
        .bind(8, to_json(user.items[1]).dump());
    ins.step();
}

std::optional<UserRecord> Store::user(const std::string& id) const {
    std::lock_guard lock(mutex_);
    Stmt q(db_,
           "SELECT id, token, start, seed, planner, first_arm, items0, items1 FROM users "
           "WHERE id = ?1");
    q.bind(1, id);
    if (!q.step()) return std::nullopt;
    UserRecord u;
    u.id = q.text(0);
    u.token = q.text(1);
    u.start = q.real(2);
    u.seed = static_cast<std::uint64_t>(q.integer(3));
    u.planner = q.text(4);
    u.first_arm = static_cast<int>(q.integer(5));
    u.items[0] = strings_from(q.text(6));
    u.items[1] = strings_from(q.text(7));
    return u;
}

std::vector<std::string> Store::user_ids() const {
    std::lock_guard lock(mutex_);
    std::vector<std::string> out;
    Stmt q(db_, "SELECT id FROM users ORDER BY id");
    while (q.step()) out.push_back(q.text(0));
    return out;
}

void Store::put_pending(const PendingQuestion& p) {
    std::lock_guard lock(mutex_);
    Stmt ins(db_,
             "INSERT OR REPLACE INTO pending(user_id, arm, phase, trial, session, time, item, "
             "choices, first, predicted) VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8, ?9, ?10)");
    ins.bind(1, p.user)
        .bind(2, static_cast<std::int64_t>(p.arm))
        .bind(3, std::string(to_string(p.phase)))
        .bind(4, static_cast<std::int64_t>(p.trial))
        .bind(5, static_cast<std::int64_t>(p.session))
        .bind(6, p.time)
        .bind(7, static_cast<std::int64_t>(p.item))
        .bind(8, to_json(p.choices).dump())
        .bind(9, static_cast<std::int64_t>(p.first_presentation))
        .bind(10, p.predicted_recall);
    ins.step();
}

std::optional<PendingQuestion> Store::pending(const std::string& user, int arm) const {
    std::lock_guard lock(mutex_);
    Stmt q(db_,
           "SELECT phase, trial, session, time, item, choices, first, predicted FROM pending "
           "WHERE user_id = ?1 AND arm = ?2");
    q.bind(1, user).bind(2, static_cast<std::int64_t>(arm));
    if (!q.step()) return std::nullopt;
    PendingQuestion p;
    p.user = user;
    p.arm = arm;
    p.phase = parse_phase(q.text(0));
    p.trial = static_cast<std::uint32_t>(q.integer(1));
    p.session = static_cast<std::uint32_t>(q.integer(2));
    p.time = q.real(3);
    p.item = static_cast<ItemId>(q.integer(4));
    p.choices = strings_from(q.text(5));
    p.first_presentation = q.integer(6) != 0;
    p.predicted_recall = q.nullable_real(7);
    return p;
}

void Store::commit_trial(const StoredTrial& t) {
    std::lock_guard lock(mutex_);
    const auto& p = t.question;
    Transaction tx(db_);
    Stmt ins(db_,
             "INSERT INTO trials(user_id, arm, phase, trial, session, time, answered_at, item, "
             "choices, chosen, outcome, first, predicted) "
             "VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8, ?9, ?10, ?11, ?12, ?13)");
    ins.bind(1, p.user)
        .bind(2, static_cast<std::int64_t>(p.arm))
        .bind(3, std::string(to_string(p.phase)))
        .bind(4, static_cast<std::int64_t>(p.trial))
        .bind(5, static_cast<std::int64_t>(p.session))
        .bind(6, p.time)
        .bind(7, t.answered_at)
        .bind(8, static_cast<std::int64_t>(p.item))
        .bind(9, to_json(p.choices).dump())
        .bind(10, t.chosen)
        .bind(11, static_cast<std::int64_t>(t.outcome))
        .bind(12, static_cast<std::int64_t>(p.first_presentation))
        .bind(13, p.predicted_recall);
    ins.step();
    Stmt del(db_, "DELETE FROM pending WHERE user_id = ?1 AND arm = ?2");
    del.bind(1, p.user).bind(2, static_cast<std::int64_t>(p.arm));
    del.step();
    tx.commit();
}

std::vector<StoredTrial> Store::trials(const std::string& user, int arm, Phase phase) const {
    std::lock_guard lock(mutex_);
    Stmt q(db_,
           "SELECT trial, session, time, answered_at, item, choices, chosen, outcome, first, "
           "predicted FROM trials WHERE user_id = ?1 AND arm = ?2 AND phase = ?3 ORDER BY trial");
    q.bind(1, user).bind(2, static_cast<std::int64_t>(arm)).bind(3, std::string(to_string(phase)));
    std::vector<StoredTrial> out;
    while (q.step()) {
        StoredTrial t;
        auto& p = t.question;
        p.user = user;
        p.arm = arm;
        p.phase = phase;
        p.trial = static_cast<std::uint32_t>(q.integer(0));
        p.session = static_cast<std::uint32_t>(q.integer(1));
        p.time = q.real(2);
        t.answered_at = q.real(3);
        p.item = static_cast<ItemId>(q.integer(4));
        p.choices = strings_from(q.text(5));
        t.chosen = q.text(6);
        t.outcome = q.integer(7) != 0;
        p.first_presentation = q.integer(8) != 0;
        p.predicted_recall = q.nullable_real(9);
        out.push_back(std::move(t));
    }
    return out;
}

void Store::put_evaluation(const std::string& user, int arm, const EvaluationSummary& s) {
    std::lock_guard lock(mutex_);
    Stmt ins(db_,
             "INSERT OR REPLACE INTO evaluations(user_id, arm, n_learned, n_seen, completed_at) "
             "VALUES (?1, ?2, ?3, ?4, ?5)");
    ins.bind(1, user)
        .bind(2, static_cast<std::int64_t>(arm))
        .bind(3, static_cast<std::int64_t>(s.n_learned))
        .bind(4, static_cast<std::int64_t>(s.n_seen))
        .bind(5, s.completed_at);
    ins.step();
}

std::optional<EvaluationSummary> Store::evaluation(const std::string& user, int arm) const {
    std::lock_guard lock(mutex_);
    Stmt q(db_,
           "SELECT n_learned, n_seen, completed_at FROM evaluations WHERE user_id = ?1 AND arm = ?2");
    q.bind(1, user).bind(2, static_cast<std::int64_t>(arm));
    if (!q.step()) return std::nullopt;
    return EvaluationSummary{static_cast<std::uint32_t>(q.integer(0)),
                             static_cast<std::uint32_t>(q.integer(1)), q.real(2)};
}

}  // namespace activeteach::tutor
