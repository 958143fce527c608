// Acceptance suite: one PASS/FAIL line per primary criterion, nonzero exit if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>

#include "activeteach/analysis.hpp"
#include "activeteach/experiment_io.hpp"
#include "activeteach/leitner.hpp"
#include "activeteach/planner.hpp"
#include "activeteach/simulator.hpp"
#include "activeteach/tutor/service.hpp"
#include "oracles.hpp"

using namespace activeteach;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

ItemState seen(std::uint32_t n, Seconds last) {
    ItemState s;
    s.presentations = n;
    s.last_presentation = last;
    return s;
}

// ---------------------------------------------------------------------------------------------

Outcome closed_form() {
    struct Case {
        double alpha, beta;
        std::uint32_t n;
        double dt, expected;
    };
    const Case cases[] = {
        {0.025, 0.5, 1, 0.0, 1.0},
        {0.01, 0.3, 1, 0.0, 1.0},
        {0.025, 0.5, 2, 10.0, std::exp(-0.125)},
        {0.025, 0.9999, 2, 1e6, std::exp(-2.5)},
    };
    for (const auto& c : cases) {
        const double r = recall_probability(seen(c.n, 0.0), {c.alpha, c.beta}, c.dt);
        if (std::abs(r - c.expected) > 1e-12) {
            return {false, "hand value mismatch at alpha=" + std::to_string(c.alpha)};
        }
    }
    if (std::abs(recall_probability(seen(2, 0.0), {0.025, 0.5}, 10.0) - 0.88250) > 5e-6 ||
        std::abs(recall_probability(seen(2, 0.0), {0.025, 0.9999}, 1e6) - 0.08208) > 5e-6) {
        return {false, "rounded hand values"};
    }

    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> log_alpha(std::log(2e-7), std::log(2.5e-2));
    std::uniform_real_distribution<double> beta(1e-4, 0.9999);
    std::uniform_real_distribution<double> log_dt(0.0, std::log(1e6));
    std::uniform_real_distribution<double> log_c(-5.0, 5.0);
    std::uniform_int_distribution<std::uint32_t> count(1, 30);
    const int draws = 100000;
    int strict_checks = 0;
    for (int i = 0; i < draws; ++i) {
        const ParamPoint p{std::exp(log_alpha(rng)), beta(rng)};
        const auto n = count(rng);
        const double dt = std::exp(log_dt(rng));
        const double r = recall_probability(seen(n, 0.0), p, dt);
        if (std::abs(r - oracle::recall(p, n, dt)) > 1e-12) return {false, "oracle mismatch"};
        if (!(r >= 0.0 && r <= 1.0)) return {false, "out of range"};
        const double later = recall_probability(seen(n, 0.0), p, dt * 1.5);
        const double more = recall_probability(seen(n + 1, 0.0), p, dt);
        if (later > r || more < r) return {false, "monotonicity"};
        // Strict where the value is representable away from the ends of [0, 1].
        if (r > 1e-250 && r < 0.999) {
            ++strict_checks;
            if (!(later < r) || !(more > r)) return {false, "strict monotonicity"};
        }
        const double c = std::exp(log_c(rng));
        const double scaled = recall_probability(seen(n, 0.0), {p.alpha * c, p.beta}, dt / c);
        if (std::abs(scaled - r) > 1e-12) return {false, "scaling"};
    }
    return {true, std::to_string(draws) + " draws, " + std::to_string(strict_checks) + " strict"};
}

// ---------------------------------------------------------------------------------------------

Outcome bayes_oracle() {
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> side(1, 5);
    std::uniform_real_distribution<double> log_alpha(std::log(1e-5), std::log(1e-2));
    std::uniform_real_distribution<double> beta(0.05, 0.9);
    std::uniform_real_distribution<double> weight(0.05, 1.0);
    std::uniform_int_distribution<int> length(1, 30);
    std::uniform_int_distribution<std::uint32_t> count(1, 6);
    std::uniform_real_distribution<double> log_dt(std::log(10.0), std::log(1e4));
    std::bernoulli_distribution coin(0.5);

    double worst = 0.0;
    int sequences = 0;
    for (; sequences < 1000; ++sequences) {
        const int a = side(rng), b = side(rng);
        std::vector<ParamPoint> points;
        std::vector<double> prior;
        for (int i = 0; i < a * b; ++i) {
            points.push_back({std::exp(log_alpha(rng)), beta(rng)});
            prior.push_back(weight(rng));
        }
        auto grid = std::make_shared<const ParamGrid>(points);
        Belief belief(grid, prior);
        std::vector<oracle::Observation> obs;
        const int len = length(rng);
        for (int k = 0; k < len; ++k) {
            const auto n = count(rng);
            const double dt = std::exp(log_dt(rng));
            const bool outcome = coin(rng);
            belief.update(seen(n, 0.0), outcome, dt);
            obs.push_back({n, dt, outcome});
        }
        const auto expected = oracle::posterior(points, prior, obs);
        for (std::size_t i = 0; i < expected.size(); ++i) {
            worst = std::max(worst, std::abs(belief.weights()[i] - expected[i]));
        }
    }
    std::ostringstream d;
    d << sequences << " sequences, max abs diff " << worst;
    return {worst <= 1e-12, d.str()};
}

// ---------------------------------------------------------------------------------------------

std::vector<int> play(const std::vector<ParamPoint>& truth, const Schedule& schedule, PlannerKind kind,
                      double rho) {
    const auto q = static_cast<std::uint32_t>(truth.size());
    OmniscientPsychologist psych(ModelKind::ISEF, truth);
    PlannerConfig cfg{rho, q, kind};
    TeacherState state(q);
    std::vector<int> seq;
    for (std::uint32_t k = 0; k < schedule.horizon(); ++k) {
        state.clock = schedule.time_of_step(k);
        const ItemId item = plan_next(state, psych, cfg, schedule);
        state.present(item, state.clock);
        seq.push_back(static_cast<int>(item));
    }
    return seq;
}

Outcome planner_oracle() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(4242);
    std::uniform_int_distribution<std::uint32_t> items(1, 3);
    std::uniform_int_distribution<std::uint32_t> per_session(1, 3);
    std::uniform_real_distribution<double> log_alpha(std::log(1e-3), std::log(5e-2));
    std::uniform_real_distribution<double> beta(0.1, 0.95);
    std::uniform_real_distribution<double> gap(20.0, 400.0);
    const double rho = 0.9;
    int violations = 0, myopic_optimal = 0, conservative_optimal = 0;
    const int instances = 50;
    for (int i = 0; i < instances; ++i) {
        std::vector<ParamPoint> truth;
        const auto q = items(rng);
        for (std::uint32_t k = 0; k < q; ++k) truth.push_back({std::exp(log_alpha(rng)), beta(rng)});
        const auto f1 = per_session(rng), f2 = per_session(rng);  // F = f1 + f2 <= 6
        const double second = f1 * 4.0 + gap(rng);
        const Schedule schedule({{0.0, f1, 4.0}, {second, f2, 4.0}}, second + f2 * 4.0 + gap(rng));
        const int best = oracle::exhaustive_best(truth, schedule, rho);
        const int myopic = oracle::reward(truth, play(truth, schedule, PlannerKind::Myopic, rho), schedule, rho);
        const int conservative =
            oracle::reward(truth, play(truth, schedule, PlannerKind::Conservative, rho), schedule, rho);
        violations += (myopic > best) + (conservative > best);
        myopic_optimal += myopic == best;
        conservative_optimal += conservative == best;
    }
    const double elapsed = seconds_since(t0);
    std::ostringstream d;
    d << instances << " instances, bound violations " << violations << ", greedy-optimal " << myopic_optimal << "/"
      << instances << ", conservative-optimal " << conservative_optimal << "/" << instances << ", " << elapsed << " s";
    return {violations == 0 && elapsed < 60.0, d.str()};
}

// ---------------------------------------------------------------------------------------------

Outcome leitner_determinism() {
    LeitnerConfig cfg;  // 4 s, doubling
    {
        LeitnerState s(2, cfg, 1);
        leitner_update(s, 0, false, 100.0);
        if (s.box[0] != 1u || s.due[0] != 108.0) return {false, "new item"};
        leitner_update(s, 0, false, 200.0);
        if (s.box[0] != 0u || s.due[0] != 204.0) return {false, "demotion"};
    }
    {
        LeitnerState s(2, cfg, 1);
        leitner_update(s, 1, true, 0.0);
        leitner_update(s, 1, true, 50.0);
        if (s.box[1] != 2u || s.due[1] != 66.0) return {false, "promotion"};
    }

    auto script = [](std::uint64_t seed) {
        LeitnerTeacher teacher(8, LeitnerConfig{}, seed);
        const bool outcomes[20] = {1, 0, 1, 1, 0, 1, 0, 0, 1, 1, 1, 0, 1, 1, 0, 1, 1, 1, 0, 1};
        std::vector<ItemId> seq;
        for (std::uint32_t k = 0; k < 20; ++k) {
            const Seconds t = 4.0 * k;
            const auto d = teacher.next(t);
            teacher.observe(d.item, outcomes[k], t);
            seq.push_back(d.item);
        }
        return std::make_pair(seq, teacher.leitner());
    };
    const auto a = script(99);
    const auto b = script(99);
    if (a.first != b.first || !(a.second == b.second)) return {false, "20-trial replay differs"};
    return {true, "3 transitions, 20-trial replay identical"};
}

// ---------------------------------------------------------------------------------------------

double mean_of(const std::vector<double>& v, std::size_t from, std::size_t to) {
    double s = 0.0;
    for (std::size_t i = from; i < to; ++i) s += v[i];
    return s / static_cast<double>(to - from);
}

Outcome directional_replication() {
    const auto t0 = Clock::now();
    auto base = load_experiment_config(fs::path(ACTIVETEACH_SOURCE_DIR) / "config" / "desk.json");
    const std::vector<std::string> arms{"leitner", "myopic", "conservative"};
    int a_batches = 0, b_batches = 0;
    std::map<TeacherKind, std::vector<double>> error_sum;
    std::map<TeacherKind, std::size_t> error_count;
    std::ostringstream d;
    const int batches = 5;
    for (int batch = 0; batch < batches; ++batch) {
        auto cfg = base;
        cfg.seed = base.seed + static_cast<std::uint64_t>(batch);
        const auto result = run_experiment(cfg);

        std::stringstream table;
        write_metrics_table(table, result);
        const auto report = analyze_metrics(read_metrics_table(table), arms);
        bool a_ok = true, b_ok = true;
        for (const auto& c : report.comparisons) {
            if (c.metric == "n_learned") {
                a_ok = a_ok && c.arm_summary.median > c.baseline_summary.median && c.p_corrected < 0.05;
            }
            if (c.metric == "ratio" && c.arm == "myopic") {
                b_ok = b_ok && c.arm_summary.median < c.baseline_summary.median;
            }
            if (c.metric == "n_learned") {
                d << "[seed " << cfg.seed << " " << c.arm << " median " << c.arm_summary.median << " vs "
                  << c.baseline_summary.median << " p=" << c.p_corrected << "] ";
            }
        }
        a_batches += a_ok;
        b_batches += b_ok;

        for (const auto& [kind, runs] : result.runs) {
            if (kind == TeacherKind::Leitner) continue;
            for (const auto& r : runs) {
                auto& acc = error_sum[kind];
                acc.resize(r.session_error.size(), 0.0);
                for (std::size_t s = 0; s < r.session_error.size(); ++s) acc[s] += r.session_error[s];
                ++error_count[kind];
            }
        }
    }
    bool c_ok = !error_sum.empty();
    for (auto& [kind, acc] : error_sum) {
        for (double& x : acc) x /= static_cast<double>(error_count[kind]);
        const double first = mean_of(acc, 0, 2);
        const double last = mean_of(acc, acc.size() - 2, acc.size());
        c_ok = c_ok && last < first;
        d << "[" << to_string(kind) << " error first2 " << first << " last2 " << last << "] ";
    }
    const double elapsed = seconds_since(t0);
    const bool a_ok = a_batches >= 4;
    const bool b_ok = b_batches == batches;
    d << "(a) " << a_batches << "/" << batches << " (b) " << b_batches << "/" << batches << " (c) "
      << (c_ok ? "yes" : "no") << ", " << elapsed << " s";
    return {a_ok && b_ok && c_ok && elapsed <= 1800.0, d.str()};
}

// ---------------------------------------------------------------------------------------------

Outcome omniscient_zero_error() {
    std::size_t checked = 0;
    for (auto model : {ModelKind::EF, ModelKind::ISEF}) {
        ExperimentConfig cfg;
        cfg.population_size = 6;
        cfg.item_count = 25;
        cfg.schedule = Schedule::daily(3, 30);
        cfg.teachers = {TeacherKind::Myopic, TeacherKind::Conservative};
        cfg.model = model;
        cfg.omniscient = true;
        cfg.seed = 11;
        const auto result = run_experiment(cfg);
        for (const auto& [kind, runs] : result.runs) {
            for (const auto& r : runs) {
                if (r.session_error.size() != 3) return {false, "missing error series"};
                for (double e : r.session_error) {
                    if (e != 0.0) return {false, "nonzero error " + std::to_string(e)};
                    ++checked;
                }
            }
        }
    }
    return {true, std::to_string(checked) + " session errors, all exactly 0"};
}

// ---------------------------------------------------------------------------------------------

Outcome parameter_recovery() {
    std::mt19937_64 rng(31337);
    std::uniform_real_distribution<double> log10_alpha(-5.0, -2.5);
    std::uniform_real_distribution<double> beta(0.2, 0.8);
    std::uniform_real_distribution<double> jitter(std::log(0.5), std::log(2.0));
    auto grid = std::make_shared<const ParamGrid>(GridSpec{});
    int within = 0;
    std::ostringstream d;
    for (int i = 0; i < 20; ++i) {
        const ParamPoint truth{std::pow(10.0, log10_alpha(rng)), beta(rng)};
        // 50 items, each probed once after the first and once after the second presentation, at lags
        // around the true half-life.
        BeliefBank bank(ModelKind::EF, grid);
        Seconds t = 0.0;
        for (ItemId item = 0; item < 50; ++item) {
            ItemState s = record_presentation({}, t);
            for (int probe = 0; probe < 2; ++probe) {
                const double rate = forgetting_rate(truth, s.presentations);
                t += std::log(2.0) / rate * std::exp(jitter(rng));
                const bool outcome =
                    std::bernoulli_distribution(recall_probability(s, truth, t))(rng);
                bank.observe(item, s, outcome, t);
                s = record_presentation(s, t);
            }
        }
        const auto estimate = bank.belief_for(0).posterior_mean();
        const double err = std::abs(std::log10(estimate.alpha) - std::log10(truth.alpha));
        within += err <= 0.5;
    }
    d << within << "/20 within 0.5 decades";
    return {within >= 16, d.str()};
}

// ---------------------------------------------------------------------------------------------

namespace tutor_check {

using namespace activeteach::tutor;

constexpr Seconds kStart = 5'000'000.0;

struct Env {
    fs::path dir;
    ServiceConfig cfg;
    std::shared_ptr<ManualClock> clock = std::make_shared<ManualClock>(kStart);
    std::unique_ptr<TutorService> service;

    Env(const std::string& name, std::uint32_t quota) {
        dir = fs::temp_directory_path() / ("activeteach-acceptance-" + name + "-" + std::to_string(::getpid()));
        fs::remove_all(dir);
        cfg.data_dir = dir;
        cfg.items_per_arm = 60;
        cfg.session_questions = quota;
        cfg.training_days = 3;
        cfg.grid = GridSpec{20, 2e-7, 2.5e-2, 20, 1e-4, 0.9999};
        service = std::make_unique<TutorService>(cfg, clock);
        std::ostringstream doc;
        for (int i = 0; i < 150; ++i) doc << "w" << i << "\tp" << i << "\ta" << i << "\n";
        std::istringstream in(doc.str());
        service->ingest_vocabulary(in);
    }
    ~Env() {
        service.reset();
        fs::remove_all(dir);
    }
    void restart() {
        service.reset();
        service = std::make_unique<TutorService>(cfg, clock);
    }
};

std::string answer_for(const std::string& id) { return "a" + id.substr(1); }

struct Shown {
    std::string item;
    std::vector<std::string> choices;
    friend bool operator==(const Shown&, const Shown&) = default;
};

Shown answer(Env& env, const std::string& user, int arm, std::mt19937_64& rng) {
    const auto q = env.service->next_question(user, arm, env.clock->now());
    env.clock->advance(3.0);
    std::string choice = answer_for(q.item_id);
    if (std::bernoulli_distribution(0.35)(rng)) {
        choice = *std::find_if(q.choices.begin(), q.choices.end(), [&](const auto& c) { return c != choice; });
    }
    env.service->submit_answer(user, arm, q.trial, q.item_id, choice, env.clock->now());
    env.clock->advance(1.0);
    return {q.item_id, q.choices};
}

int first_arm(Env& env, const std::string& user, std::uint32_t day) {
    for (const auto& slot : env.service->schedule(user, kStart).sessions) {
        if (slot.day == day) return slot.arm;
    }
    return 0;
}

/// Full training run; optionally crashes after `crash_at` answers with a question outstanding.
std::vector<Shown> run(std::optional<int> crash_at) {
    Env env("restart", 25);
    const auto user = env.service->create_user(NewUser{"learner", kStart, std::string("conservative")}).id;
    std::mt19937_64 rng(8);
    std::vector<Shown> shown;
    int count = 0;
    for (std::uint32_t day = 0; day < 3; ++day) {
        env.clock->set(kStart + day * kSecondsPerDay);
        const int first = first_arm(env, user, day);
        for (int arm : {first, 1 - first}) {
            for (int k = 0; k < 25; ++k, ++count) {
                if (crash_at && count == *crash_at) {
                    env.service->next_question(user, arm, env.clock->now());
                    env.restart();
                }
                shown.push_back(answer(env, user, arm, rng));
            }
        }
    }
    return shown;
}

}  // namespace tutor_check

Outcome service_replay() {
    using namespace tutor_check;
    // Replay equality on a 200-trial fixture: 100 per arm over two days.
    Env env("fixture", 50);
    const auto user = env.service->create_user(NewUser{"fixture", kStart, std::string("conservative")}).id;
    std::mt19937_64 rng(3);
    std::uint32_t trials = 0;
    for (std::uint32_t day = 0; day < 2; ++day) {
        env.clock->set(kStart + day * kSecondsPerDay);
        const int first = first_arm(env, user, day);
        for (int arm : {first, 1 - first}) {
            for (int k = 0; k < 50; ++k, ++trials) answer(env, user, arm, rng);
        }
    }
    const auto live0 = env.service->snapshot(user, 0);
    const auto live1 = env.service->snapshot(user, 1);
    env.restart();
    const bool replay_ok = trials == 200 && env.service->snapshot(user, 0) == live0 &&
                           env.service->snapshot(user, 1) == live1;

    const auto reference = run(std::nullopt);
    int restarts_ok = 0;
    const int cuts[] = {1, 24, 26, 61, 99, 140};
    for (int cut : cuts) restarts_ok += run(cut) == reference;
    std::ostringstream d;
    d << "replay of " << trials << " trials " << (replay_ok ? "equal" : "DIFFERS") << ", restart sequences "
      << restarts_ok << "/" << std::size(cuts) << " identical";
    return {replay_ok && restarts_ok == static_cast<int>(std::size(cuts)), d.str()};
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"closed-form model suite", closed_form},
        {"bayes oracle equivalence", bayes_oracle},
        {"planner oracle bound", planner_oracle},
        {"leitner determinism", leitner_determinism},
        {"directional replication", directional_replication},
        {"omniscient zero-error", omniscient_zero_error},
        {"parameter recovery", parameter_recovery},
        {"service replay", service_replay},
    };
    int failures = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  " << name << "  -- " << o.detail << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
