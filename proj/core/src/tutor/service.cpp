#include "activeteach/tutor/service.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "activeteach/learner.hpp"

namespace activeteach::tutor {

namespace {

constexpr std::uint64_t kItemSetStream = 0x49544D;
constexpr std::uint64_t kAssignStream = 0x41534E;
constexpr std::uint64_t kChoiceStream = 0x434843;
constexpr std::uint64_t kEvalOrderStream = 0x45564C;
constexpr std::uint64_t kLeitnerStream = 0x4C4549;

std::uint64_t user_seed(std::uint64_t base, const std::string& id) {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (unsigned char c : id) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h ^ (base * 0x9E3779B97F4A7C15ULL);
}

bool valid_user_id(const std::string& id) {
    if (id.empty() || id.size() > 64) return false;
    return std::all_of(id.begin(), id.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '-' || c == '_';
    });
}

std::string random_hex(std::size_t bytes) {
    std::random_device rd;
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (std::size_t i = 0; i < bytes; ++i) {
        const auto b = rd() & 0xFF;
        out += kHex[b >> 4];
        out += kHex[b & 0xF];
    }
    return out;
}

ServiceError fail(ServiceError::Code code, const std::string& what) { return {code, what}; }

}  // namespace

std::string_view to_string(ServiceError::Code code) {
    using C = ServiceError::Code;
    switch (code) {
        case C::BadRequest: return "bad_request";
        case C::Unauthorized: return "unauthorized";
        case C::NotFound: return "not_found";
        case C::OutsideWindow: return "outside_session_window";
        case C::SessionComplete: return "session_complete";
        case C::EvaluationComplete: return "evaluation_complete";
        case C::Stale: return "stale_question";
        case C::Duplicate: return "duplicate_submission";
        case C::Conflict: return "conflict";
    }
    return "unknown";
}

Seconds SystemClock::now() const {
    using namespace std::chrono;
    return duration<double>(system_clock::now().time_since_epoch()).count();
}

struct TutorService::Arm {
    int index = 0;
    std::mutex mutex;
    std::unique_ptr<Teacher> teacher;
    std::vector<std::uint32_t> answered_per_day;
    std::uint32_t answered = 0;
};

struct TutorService::UserEntry {
    UserRecord record;
    std::vector<std::size_t> vocab[2];  // arm universe -> vocabulary index
    Arm arms[2];
};

TutorService::TutorService(ServiceConfig cfg, std::shared_ptr<Clock> clock)
    : cfg_(std::move(cfg)), clock_(std::move(clock)) {
    cfg_.validate();
    if (!clock_) clock_ = std::make_shared<SystemClock>();
    std::error_code ec;
    std::filesystem::create_directories(cfg_.data_dir, ec);
    if (ec) {
        throw StoreError("cannot create data directory " + cfg_.data_dir.string() + ": " +
                         ec.message());
    }
    store_ = std::make_unique<Store>(cfg_.data_dir / "tutor.sqlite3");
    grid_ = std::make_shared<const ParamGrid>(cfg_.grid);
    vocabulary_ = store_->vocabulary();
    for (std::size_t i = 0; i < vocabulary_.size(); ++i) vocab_index_[vocabulary_[i].id] = i;
}

TutorService::~TutorService() = default;

std::size_t TutorService::ingest_vocabulary(std::istream& document) {
    const auto items = parse_vocabulary(document);
    std::lock_guard lock(vocab_mutex_);
    const auto added = store_->add_vocabulary(items);
    for (const auto& item : items) {
        vocab_index_[item.id] = vocabulary_.size();
        vocabulary_.push_back(item);
    }
    return added;
}

std::size_t TutorService::vocabulary_size() const {
    std::lock_guard lock(vocab_mutex_);
    return vocabulary_.size();
}

CreatedUser TutorService::create_user(const NewUser& request) {
    std::string id = request.id.value_or("u" + random_hex(6));
    if (!valid_user_id(id)) {
        throw fail(ServiceError::Code::BadRequest,
                   "user id must be 1-64 characters of [A-Za-z0-9_-]");
    }
    UserRecord rec;
    rec.id = id;
    rec.token = random_hex(16);
    rec.start = request.start.value_or(now());
    rec.seed = user_seed(cfg_.seed, id);

    const std::uint32_t q = cfg_.items_per_arm;
    std::vector<std::size_t> order;
    {
        std::lock_guard lock(vocab_mutex_);
        if (vocabulary_.size() < 2 * static_cast<std::size_t>(q)) {
            throw fail(ServiceError::Code::Conflict,
                       "vocabulary has " + std::to_string(vocabulary_.size()) + " items, " +
                           std::to_string(2 * q) + " needed");
        }
        order.resize(vocabulary_.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        auto rng = make_rng(rec.seed, kItemSetStream, 0);
        std::shuffle(order.begin(), order.end(), rng);
        for (int arm = 0; arm < 2; ++arm) {
            std::set<std::string> answers;
            for (std::uint32_t k = 0; k < q; ++k) {
                const auto& item = vocabulary_[order[arm * q + k]];
                rec.items[arm].push_back(item.id);
                answers.insert(item.answer);
            }
            if (answers.size() < cfg_.choices) {
                throw fail(ServiceError::Code::Conflict,
                           "item set has fewer distinct answers than choices per question");
            }
        }
    }

    auto assign = make_rng(rec.seed, kAssignStream, 0);
    std::string planner = request.planner.value_or(cfg_.planner);
    if (planner == "balanced") planner = (assign() & 1) ? "conservative" : "myopic";
    if (planner != "myopic" && planner != "conservative") {
        throw fail(ServiceError::Code::BadRequest, "planner must be myopic or conservative");
    }
    rec.planner = planner;
    rec.first_arm = static_cast<int>(assign() & 1);

    try {
        store_->add_user(rec);
    } catch (const StoreError& e) {
        if (store_->user(id)) throw fail(ServiceError::Code::Conflict, "user already exists");
        throw;
    }
    return CreatedUser{rec.id, rec.token, rec.planner, rec.start};
}

TutorService::UserEntry& TutorService::load_user(const std::string& user) const {
    std::lock_guard lock(users_mutex_);
    if (auto it = users_.find(user); it != users_.end()) return *it->second;
    auto rec = store_->user(user);
    if (!rec) throw fail(ServiceError::Code::NotFound, "unknown user '" + user + "'");
    auto entry = std::make_unique<UserEntry>();
    {
        std::lock_guard vlock(vocab_mutex_);
        for (int arm = 0; arm < 2; ++arm) {
            for (const auto& id : rec->items[arm]) {
                const auto it = vocab_index_.find(id);
                if (it == vocab_index_.end()) {
                    throw StoreError("user '" + user + "' references missing item '" + id + "'");
                }
                entry->vocab[arm].push_back(it->second);
            }
        }
    }
    entry->record = std::move(*rec);
    for (int arm = 0; arm < 2; ++arm) entry->arms[arm].index = arm;
    auto& ref = *entry;
    users_.emplace(user, std::move(entry));
    return ref;
}

void TutorService::authenticate(const std::string& user, const std::string& token) const {
    const auto& u = load_user(user);
    if (token != u.record.token) throw fail(ServiceError::Code::Unauthorized, "invalid token");
}

TutorService::Arm& TutorService::arm_of(UserEntry& u, int arm) const {
    if (arm != 0 && arm != 1) throw fail(ServiceError::Code::NotFound, "arm must be 0 or 1");
    return u.arms[arm];
}

namespace {

/// Arm taught first on `day`.
int first_arm_on(const UserRecord& u, std::uint32_t day) {
    return (day % 2 == 0) ? u.first_arm : 1 - u.first_arm;
}

}  // namespace

std::unique_ptr<Teacher> TutorService::make_teacher(const UserEntry& u, int arm) const {
    const auto& rec = u.record;
    const std::uint32_t q = static_cast<std::uint32_t>(rec.items[arm].size());
    if (arm == kLeitnerArm) {
        return std::make_unique<LeitnerTeacher>(q, cfg_.leitner,
                                                make_rng(rec.seed, kLeitnerStream, 0)());
    }
    std::vector<Session> sessions;
    for (std::uint32_t d = 0; d < cfg_.training_days; ++d) {
        const Seconds offset = first_arm_on(rec, d) == arm ? 0.0 : cfg_.second_session_offset;
        sessions.push_back(Session{rec.start + d * kSecondsPerDay + offset,
                                   cfg_.session_questions, cfg_.iteration_duration});
    }
    Schedule schedule(std::move(sessions), rec.start + cfg_.training_days * kSecondsPerDay);
    PlannerConfig pc{cfg_.rho, q, parse_planner_kind(rec.planner)};
    auto psych = std::make_unique<BayesianPsychologist>(BeliefBank(ModelKind::ISEF, grid_));
    return std::make_unique<PlanningTeacher>(pc, std::move(schedule), std::move(psych));
}

void TutorService::ensure_teacher(UserEntry& u, Arm& a) const {
    if (a.teacher) return;
    auto teacher = make_teacher(u, a.index);
    std::vector<std::uint32_t> per_day(cfg_.training_days, 0);
    const bool leitner = a.index == kLeitnerArm;
    const auto trials = store_->trials(u.record.id, a.index, Phase::Training);
    for (const auto& t : trials) {
        const auto& p = t.question;
        if (leitner) {
            const auto d = teacher->next(p.time);
            if (d.item != p.item) {
                throw StoreError("replay diverged at trial " + std::to_string(p.trial));
            }
        }
        teacher->observe(p.item, t.outcome, p.time);
        if (p.session < per_day.size()) ++per_day[p.session];
    }
    if (auto p = store_->pending(u.record.id, a.index); p && p->phase == Phase::Training) {
        const auto d = teacher->next(p->time);
        if (d.item != p->item) throw StoreError("replay diverged at pending question");
    }
    a.answered_per_day = std::move(per_day);
    a.answered = static_cast<std::uint32_t>(trials.size());
    a.teacher = std::move(teacher);
}

std::vector<std::string> TutorService::draw_choices(const UserEntry& u, int arm, Phase phase,
                                                    std::uint32_t trial, ItemId item) const {
    const std::uint64_t stream = kChoiceStream * 4 + static_cast<std::uint64_t>(arm) * 2 +
                                 (phase == Phase::Evaluation ? 1 : 0);
    auto rng = make_rng(u.record.seed, stream, trial);
    std::lock_guard lock(vocab_mutex_);
    const std::string& correct = vocabulary_[u.vocab[arm][item]].answer;
    std::vector<std::size_t> pool(u.vocab[arm]);
    std::shuffle(pool.begin(), pool.end(), rng);
    std::vector<std::string> choices{correct};
    for (std::size_t idx : pool) {
        if (choices.size() == cfg_.choices) break;
        const auto& answer = vocabulary_[idx].answer;
        if (std::find(choices.begin(), choices.end(), answer) == choices.end()) {
            choices.push_back(answer);
        }
    }
    std::shuffle(choices.begin(), choices.end(), rng);
    return choices;
}

Question TutorService::render(const UserEntry& u, const PendingQuestion& p,
                              std::uint32_t answered) const {
    std::lock_guard lock(vocab_mutex_);
    const auto& item = vocabulary_[u.vocab[p.arm][p.item]];
    Question q;
    q.arm = p.arm;
    q.phase = p.phase;
    q.trial = p.trial;
    q.session = p.session;
    q.item_id = item.id;
    q.prompt = item.prompt;
    q.choices = p.choices;
    q.first_presentation = p.first_presentation;
    if (p.first_presentation) q.answer = item.answer;
    q.answered_in_session = answered;
    q.quota = p.phase == Phase::Training ? cfg_.session_questions : 0;
    return q;
}

UserSchedule TutorService::schedule(const std::string& user, Seconds now) const {
    auto& u = load_user(user);
    UserSchedule s;
    s.start = u.record.start;
    s.training_days = cfg_.training_days;
    s.session_questions = cfg_.session_questions;
    s.evaluation_opens_at = u.record.start + cfg_.training_days * kSecondsPerDay;
    if (now >= u.record.start) {
        s.current_day = static_cast<std::uint32_t>(std::floor((now - u.record.start) / kSecondsPerDay));
    }
    for (std::uint32_t d = 0; d < cfg_.training_days; ++d) {
        const int first = first_arm_on(u.record, d);
        for (int arm : {first, 1 - first}) {
            auto& a = u.arms[arm];
            std::lock_guard lock(a.mutex);
            ensure_teacher(u, a);
            s.sessions.push_back(SessionSlot{d, arm, u.record.start + d * kSecondsPerDay,
                                             a.answered_per_day[d]});
        }
    }
    return s;
}

Question TutorService::next_question(const std::string& user, int arm_index, Seconds now) {
    auto& u = load_user(user);
    auto& a = arm_of(u, arm_index);
    auto& other = u.arms[1 - arm_index];
    std::scoped_lock lock(a.mutex, other.mutex);
    ensure_teacher(u, a);

    if (auto p = store_->pending(user, arm_index)) {
        if (p->phase != Phase::Training) {
            throw fail(ServiceError::Code::Conflict, "an evaluation question is pending");
        }
        return render(u, *p, a.answered_per_day[p->session]);
    }

    const auto& rec = u.record;
    if (now < rec.start) throw fail(ServiceError::Code::OutsideWindow, "training has not started");
    const auto day = static_cast<std::uint32_t>(std::floor((now - rec.start) / kSecondsPerDay));
    if (day >= cfg_.training_days) {
        throw fail(ServiceError::Code::OutsideWindow, "training is over");
    }
    if (a.answered_per_day[day] >= cfg_.session_questions) {
        throw fail(ServiceError::Code::SessionComplete, "session complete");
    }
    if (first_arm_on(rec, day) != arm_index) {
        ensure_teacher(u, other);
        if (other.answered_per_day[day] < cfg_.session_questions) {
            throw fail(ServiceError::Code::OutsideWindow,
                       "arm " + std::to_string(1 - arm_index) + " is taught first today");
        }
    }
    if (now < a.teacher->history().clock) {
        throw fail(ServiceError::Code::BadRequest, "time is earlier than the last trial");
    }

    PendingQuestion p;
    try {
        const Decision d = a.teacher->next(now);
        p.user = user;
        p.arm = arm_index;
        p.phase = Phase::Training;
        p.trial = a.answered;
        p.session = day;
        p.time = now;
        p.item = d.item;
        p.choices = draw_choices(u, arm_index, Phase::Training, p.trial, d.item);
        p.first_presentation = d.first_presentation;
        p.predicted_recall = d.predicted_recall;
        store_->put_pending(p);
    } catch (...) {
        a.teacher.reset();
        throw;
    }
    return render(u, p, a.answered_per_day[day]);
}

AnswerAck TutorService::submit_answer(const std::string& user, int arm_index, std::uint32_t trial,
                                      const std::string& item_id, const std::string& chosen,
                                      Seconds now) {
    auto& u = load_user(user);
    auto& a = arm_of(u, arm_index);
    std::lock_guard lock(a.mutex);
    ensure_teacher(u, a);

    auto p = store_->pending(user, arm_index);
    if (trial < a.answered) {
        throw fail(ServiceError::Code::Duplicate,
                   "trial " + std::to_string(trial) + " was already answered");
    }
    if (!p || p->phase != Phase::Training || p->trial != trial) {
        throw fail(ServiceError::Code::Stale, "no pending question with that trial number");
    }
    std::string answer;
    {
        std::lock_guard vlock(vocab_mutex_);
        const auto& item = vocabulary_[u.vocab[arm_index][p->item]];
        if (item.id != item_id) {
            throw fail(ServiceError::Code::Stale, "item does not match the pending question");
        }
        answer = item.answer;
    }
    if (std::find(p->choices.begin(), p->choices.end(), chosen) == p->choices.end()) {
        throw fail(ServiceError::Code::BadRequest, "answer is not one of the choices");
    }
    if (now < p->time) throw fail(ServiceError::Code::BadRequest, "answer predates the question");

    const bool outcome = chosen == answer;
    store_->commit_trial(StoredTrial{*p, now, chosen, outcome});
    a.teacher->observe(p->item, outcome, p->time);
    ++a.answered;
    const auto done = ++a.answered_per_day[p->session];
    return AnswerAck{outcome, answer, done, done >= cfg_.session_questions};
}

std::vector<ItemId> TutorService::evaluation_order(const UserEntry& u, const Arm& a) const {
    const auto& introduced = a.teacher->history().introduced;
    std::vector<ItemId> order(introduced.begin(), introduced.end());
    order.insert(order.end(), introduced.begin(), introduced.end());
    auto rng = make_rng(u.record.seed, kEvalOrderStream, static_cast<std::uint64_t>(a.index));
    std::shuffle(order.begin(), order.end(), rng);
    return order;
}

Question TutorService::next_evaluation_question(const std::string& user, int arm_index,
                                                Seconds now) {
    auto& u = load_user(user);
    auto& a = arm_of(u, arm_index);
    std::lock_guard lock(a.mutex);
    ensure_teacher(u, a);

    const auto done = static_cast<std::uint32_t>(
        store_->trials(user, arm_index, Phase::Evaluation).size());
    auto pending = store_->pending(user, arm_index);
    if (pending && pending->phase == Phase::Evaluation) return render(u, *pending, done);

    if (now < u.record.start + cfg_.training_days * kSecondsPerDay) {
        throw fail(ServiceError::Code::OutsideWindow, "evaluation has not opened");
    }
    const auto order = evaluation_order(u, a);
    if (done >= order.size()) {
        throw fail(ServiceError::Code::EvaluationComplete, "evaluation complete");
    }
    PendingQuestion p;
    p.user = user;
    p.arm = arm_index;
    p.phase = Phase::Evaluation;
    p.trial = done;
    p.session = cfg_.training_days;
    p.time = now;
    p.item = order[done];
    p.choices = draw_choices(u, arm_index, Phase::Evaluation, done, p.item);
    store_->put_pending(p);
    // An abandoned training question was just dropped; rebuild so memory matches the log.
    if (pending) a.teacher.reset();
    return render(u, p, done);
}

AnswerAck TutorService::submit_evaluation_answer(const std::string& user, int arm_index,
                                                 std::uint32_t trial, const std::string& item_id,
                                                 const std::string& chosen, Seconds now) {
    auto& u = load_user(user);
    auto& a = arm_of(u, arm_index);
    std::lock_guard lock(a.mutex);
    ensure_teacher(u, a);

    const auto done = static_cast<std::uint32_t>(
        store_->trials(user, arm_index, Phase::Evaluation).size());
    if (trial < done) {
        throw fail(ServiceError::Code::Duplicate,
                   "evaluation trial " + std::to_string(trial) + " was already answered");
    }
    auto p = store_->pending(user, arm_index);
    if (!p || p->phase != Phase::Evaluation || p->trial != trial) {
        throw fail(ServiceError::Code::Stale, "no pending evaluation question with that number");
    }
    std::string answer;
    {
        std::lock_guard vlock(vocab_mutex_);
        const auto& item = vocabulary_[u.vocab[arm_index][p->item]];
        if (item.id != item_id) {
            throw fail(ServiceError::Code::Stale, "item does not match the pending question");
        }
        answer = item.answer;
    }
    if (std::find(p->choices.begin(), p->choices.end(), chosen) == p->choices.end()) {
        throw fail(ServiceError::Code::BadRequest, "answer is not one of the choices");
    }
    if (now < p->time) throw fail(ServiceError::Code::BadRequest, "answer predates the question");

    const bool outcome = chosen == answer;
    store_->commit_trial(StoredTrial{*p, now, chosen, outcome});
    const auto total = static_cast<std::uint32_t>(2 * a.teacher->history().introduced.size());
    const bool complete = done + 1 >= total;
    if (complete) {
        const auto result = evaluate(u, a);
        store_->put_evaluation(user, arm_index,
                               EvaluationSummary{result.n_learned, result.n_seen, now});
    }
    return AnswerAck{outcome, answer, done + 1, complete};
}

EvaluationResult TutorService::evaluation(const std::string& user, int arm_index) const {
    auto& u = load_user(user);
    auto& a = arm_of(u, arm_index);
    std::lock_guard lock(a.mutex);
    ensure_teacher(u, a);
    return evaluate(u, a);
}

EvaluationResult TutorService::evaluate(const UserEntry& u, const Arm& a) const {
    const int arm_index = a.index;
    const std::string& user = u.record.id;
    const auto& introduced = a.teacher->history().introduced;
    std::map<ItemId, std::vector<bool>> responses;
    for (ItemId item : introduced) responses[item];
    const auto trials = store_->trials(user, arm_index, Phase::Evaluation);
    for (const auto& t : trials) responses[t.question.item].push_back(t.outcome);

    EvaluationResult r;
    r.answered = static_cast<std::uint32_t>(trials.size());
    r.total = static_cast<std::uint32_t>(2 * introduced.size());
    r.complete = r.answered >= r.total;
    r.n_seen = static_cast<std::uint32_t>(introduced.size());
    std::lock_guard vlock(vocab_mutex_);
    for (const auto& [item, resp] : responses) {
        ItemVerdict v;
        v.item_id = vocabulary_[u.vocab[arm_index][item]].id;
        v.responses = resp;
        v.learned = resp.size() == 2 && resp[0] && resp[1];
        r.n_learned += v.learned ? 1 : 0;
        r.verdicts.push_back(std::move(v));
    }
    if (r.n_seen > 0) r.ratio = static_cast<double>(r.n_learned) / r.n_seen;
    return r;
}

std::vector<ArmStats> TutorService::stats(const std::string& user) const {
    auto& u = load_user(user);
    std::vector<ArmStats> out;
    for (int arm = 0; arm < 2; ++arm) {
        auto& a = u.arms[arm];
        std::lock_guard lock(a.mutex);
        ensure_teacher(u, a);
        ArmStats s;
        s.arm = arm;
        s.teacher = std::string(to_string(a.teacher->kind()));
        s.n_answered = a.answered;
        s.n_seen = static_cast<std::uint32_t>(a.teacher->history().introduced.size());
        s.evaluation = store_->evaluation(user, arm);
        if (const auto* pt = dynamic_cast<const PlanningTeacher*>(a.teacher.get())) {
            const auto* bp = dynamic_cast<const BayesianPsychologist*>(&pt->psychologist());
            if (bp) {
                std::lock_guard vlock(vocab_mutex_);
                for (ItemId item : bp->bank().reviewed_items()) {
                    const auto mean = bp->bank().belief_for(item).posterior_mean();
                    s.estimates.push_back(
                        {vocabulary_[u.vocab[arm][item]].id, mean.alpha, mean.beta});
                }
            }
        }
        out.push_back(std::move(s));
    }
    return out;
}

ArmSnapshot TutorService::snapshot(const std::string& user, int arm_index) const {
    auto& u = load_user(user);
    auto& a = arm_of(u, arm_index);
    std::lock_guard lock(a.mutex);
    ensure_teacher(u, a);
    ArmSnapshot s;
    s.history = a.teacher->history();
    if (const auto* lt = dynamic_cast<const LeitnerTeacher*>(a.teacher.get())) {
        s.leitner = lt->leitner();
    }
    if (const auto* pt = dynamic_cast<const PlanningTeacher*>(a.teacher.get())) {
        if (const auto* bp = dynamic_cast<const BayesianPsychologist*>(&pt->psychologist())) {
            for (ItemId item : bp->bank().reviewed_items()) {
                const auto w = bp->bank().belief_for(item).weights();
                s.beliefs.emplace_back(item, std::vector<double>(w.begin(), w.end()));
            }
        }
    }
    return s;
}

void TutorService::evict_cache() {
    std::lock_guard lock(users_mutex_);
    users_.clear();
}

}  // namespace activeteach::tutor
