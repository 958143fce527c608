#include "activeteach/experiment_io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "activeteach/errors.hpp"
#include "json_fields.hpp"

namespace activeteach {

namespace {

using nlohmann::json;
using detail::Fields;
using detail::with_path;

Schedule parse_schedule(const Fields& f) {
    if (f.has("sessions") && f.raw("sessions").is_array()) {
        f.reject_unknown({"sessions", "eval_time"});
        std::vector<Session> sessions;
        std::size_t i = 0;
        for (const auto& entry : f.raw("sessions")) {
            Fields s(entry, f.at("sessions") + "[" + std::to_string(i++) + "]");
            s.reject_unknown({"start", "iterations", "iteration_duration"});
            sessions.push_back({s.number("start", 0.0), s.count("iterations", 0),
                                s.number("iteration_duration", 4.0)});
        }
        if (!f.has("eval_time")) throw ConfigError(f.at("eval_time") + ": required with explicit sessions");
        const double eval = f.number("eval_time", 0.0);
        return with_path(f.at("sessions"), [&] { return Schedule(sessions, eval); });
    }
    f.reject_unknown({"sessions", "iterations", "iteration_duration", "first_start"});
    const auto sessions = f.count("sessions", 6);
    const auto iterations = f.count("iterations", 100);
    const double duration = f.number("iteration_duration", 4.0);
    const double start = f.number("first_start", 0.0);
    return with_path(f.at("sessions"),
                     [&] { return Schedule::daily(sessions, iterations, duration, start); });
}

json schedule_to_json(const Schedule& schedule) {
    json sessions = json::array();
    for (const auto& s : schedule.sessions()) {
        sessions.push_back({{"start", s.start},
                            {"iterations", s.iterations},
                            {"iteration_duration", s.iteration_duration}});
    }
    return {{"sessions", sessions}, {"eval_time", schedule.eval_time()}};
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, '\t')) out.push_back(cell);
    if (!line.empty() && line.back() == '\t') out.emplace_back();
    return out;
}

void expect_header(std::istream& in, const std::string& header, const char* table) {
    std::string line;
    if (!std::getline(in, line) || line != header) {
        throw ConfigError(std::string(table) + ": expected header '" + header + "'");
    }
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    Fields f(root, "config");
    f.reject_unknown({"population_size", "item_count", "schedule", "teachers", "model",
                      "omniscient", "rho", "grid", "population", "leitner", "seed", "threads",
                      "keep_trials"});

    ExperimentConfig cfg;
    cfg.population_size = f.count("population_size", cfg.population_size);
    cfg.item_count = f.count("item_count", cfg.item_count);
    if (f.has("schedule")) cfg.schedule = parse_schedule(Fields(f.raw("schedule"), f.at("schedule")));
    if (f.has("teachers")) {
        const auto& list = f.raw("teachers");
        if (!list.is_array()) throw ConfigError(f.at("teachers") + ": expected a list");
        cfg.teachers.clear();
        for (const auto& t : list) {
            if (!t.is_string()) throw ConfigError(f.at("teachers") + ": expected teacher names");
            cfg.teachers.push_back(
                with_path(f.at("teachers"), [&] { return parse_teacher_kind(t.get<std::string>()); }));
        }
    }
    cfg.model = with_path(f.at("model"), [&] { return parse_model_kind(f.text("model", "ef")); });
    cfg.omniscient = f.flag("omniscient", cfg.omniscient);
    cfg.rho = f.number("rho", cfg.rho);
    if (f.has("grid")) {
        Fields g(f.raw("grid"), f.at("grid"));
        g.reject_unknown({"alpha_points", "alpha_bounds", "beta_points", "beta_bounds"});
        cfg.grid.alpha_points = g.count("alpha_points", static_cast<std::uint32_t>(cfg.grid.alpha_points));
        cfg.grid.beta_points = g.count("beta_points", static_cast<std::uint32_t>(cfg.grid.beta_points));
        std::tie(cfg.grid.alpha_low, cfg.grid.alpha_high) =
            g.bounds("alpha_bounds", {cfg.grid.alpha_low, cfg.grid.alpha_high});
        std::tie(cfg.grid.beta_low, cfg.grid.beta_high) =
            g.bounds("beta_bounds", {cfg.grid.beta_low, cfg.grid.beta_high});
        with_path(f.at("grid"), [&] { cfg.grid.validate(); return 0; });
    }
    if (f.has("population")) {
        Fields p(f.raw("population"), f.at("population"));
        p.reject_unknown({"alpha_bounds", "beta_bounds", "grid_points", "require_leitner_learning",
                          "max_attempts"});
        auto& pop = cfg.population;
        std::tie(pop.alpha_low, pop.alpha_high) = p.bounds("alpha_bounds", {pop.alpha_low, pop.alpha_high});
        std::tie(pop.beta_low, pop.beta_high) = p.bounds("beta_bounds", {pop.beta_low, pop.beta_high});
        pop.grid_points = p.count("grid_points", pop.grid_points);
        pop.require_leitner_learning = p.flag("require_leitner_learning", pop.require_leitner_learning);
        pop.max_attempts = p.count("max_attempts", pop.max_attempts);
        with_path(f.at("population"), [&] { pop.validate(); return 0; });
    }
    if (f.has("leitner")) {
        Fields l(f.raw("leitner"), f.at("leitner"));
        l.reject_unknown({"delta_a", "delta_b"});
        cfg.leitner.delta_a = l.number("delta_a", cfg.leitner.delta_a);
        cfg.leitner.delta_b = l.number("delta_b", cfg.leitner.delta_b);
        with_path(f.at("leitner"), [&] { cfg.leitner.validate(); return 0; });
    }
    cfg.seed = f.seed("seed", cfg.seed);
    cfg.threads = f.count("threads", cfg.threads);
    cfg.keep_trials = f.flag("keep_trials", cfg.keep_trials);
    with_path("config", [&] { cfg.validate(); return 0; });
    return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_experiment_config(buffer.str());
}

std::string experiment_config_to_json(const ExperimentConfig& cfg) {
    json teachers = json::array();
    for (auto t : cfg.teachers) teachers.push_back(std::string(to_string(t)));
    json root = {
        {"population_size", cfg.population_size},
        {"item_count", cfg.item_count},
        {"schedule", schedule_to_json(cfg.schedule)},
        {"teachers", teachers},
        {"model", std::string(to_string(cfg.model))},
        {"omniscient", cfg.omniscient},
        {"rho", cfg.rho},
        {"grid",
         {{"alpha_points", cfg.grid.alpha_points},
          {"alpha_bounds", {cfg.grid.alpha_low, cfg.grid.alpha_high}},
          {"beta_points", cfg.grid.beta_points},
          {"beta_bounds", {cfg.grid.beta_low, cfg.grid.beta_high}}}},
        {"population",
         {{"alpha_bounds", {cfg.population.alpha_low, cfg.population.alpha_high}},
          {"beta_bounds", {cfg.population.beta_low, cfg.population.beta_high}},
          {"grid_points", cfg.population.grid_points},
          {"require_leitner_learning", cfg.population.require_leitner_learning},
          {"max_attempts", cfg.population.max_attempts}}},
        {"leitner", {{"delta_a", cfg.leitner.delta_a}, {"delta_b", cfg.leitner.delta_b}}},
        {"seed", cfg.seed},
        {"threads", cfg.threads},
        {"keep_trials", cfg.keep_trials},
    };
    return root.dump(2);
}

void write_metrics_table(std::ostream& out, const ExperimentResult& result) {
    out << "learner\tteacher\tn_learned\tn_seen\tratio\n";
    for (const auto& [kind, runs] : result.runs) {
        for (const auto& m : runs) {
            const auto ratio = m.ratio();
            out << m.learner << '\t' << to_string(kind) << '\t' << m.n_learned << '\t' << m.n_seen
                << '\t' << (ratio ? format_double(*ratio) : "NA") << '\n';
        }
    }
}

std::vector<MetricsRow> read_metrics_table(std::istream& in) {
    expect_header(in, "learner\tteacher\tn_learned\tn_seen\tratio", "metrics.tsv");
    std::vector<MetricsRow> rows;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = split_tabs(line);
        if (cells.size() != 5) {
            throw ConfigError("metrics.tsv line " + std::to_string(line_no) + ": expected 5 columns");
        }
        try {
            MetricsRow row;
            row.learner = static_cast<std::uint32_t>(std::stoul(cells[0]));
            row.teacher = cells[1];
            row.n_learned = static_cast<std::uint32_t>(std::stoul(cells[2]));
            row.n_seen = static_cast<std::uint32_t>(std::stoul(cells[3]));
            if (cells[4] != "NA") row.ratio = std::stod(cells[4]);
            rows.push_back(std::move(row));
        } catch (const std::logic_error&) {
            throw ConfigError("metrics.tsv line " + std::to_string(line_no) + ": malformed number");
        }
    }
    return rows;
}

void write_error_table(std::ostream& out, const ExperimentResult& result) {
    out << "teacher\tlearner\tsession\terror\n";
    for (const auto& [kind, runs] : result.runs) {
        for (const auto& m : runs) {
            for (std::size_t s = 0; s < m.session_error.size(); ++s) {
                out << to_string(kind) << '\t' << m.learner << '\t' << s << '\t'
                    << format_double(m.session_error[s]) << '\n';
            }
        }
    }
}

std::vector<ErrorRow> read_error_table(std::istream& in) {
    expect_header(in, "teacher\tlearner\tsession\terror", "prediction_error.tsv");
    std::vector<ErrorRow> rows;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = split_tabs(line);
        if (cells.size() != 4) {
            throw ConfigError("prediction_error.tsv line " + std::to_string(line_no) +
                              ": expected 4 columns");
        }
        try {
            rows.push_back({cells[0], static_cast<std::uint32_t>(std::stoul(cells[1])),
                            static_cast<std::uint32_t>(std::stoul(cells[2])), std::stod(cells[3])});
        } catch (const std::logic_error&) {
            throw ConfigError("prediction_error.tsv line " + std::to_string(line_no) +
                              ": malformed number");
        }
    }
    return rows;
}

void write_learner_table(std::ostream& out, const std::vector<LearnerSpec>& learners) {
    out << "learner\titem\talpha\tbeta\n";
    for (std::size_t l = 0; l < learners.size(); ++l) {
        const auto& spec = learners[l];
        for (std::size_t i = 0; i < spec.params.size(); ++i) {
            out << l << '\t' << (spec.model == ModelKind::EF ? std::string("*") : std::to_string(i))
                << '\t' << format_double(spec.params[i].alpha) << '\t'
                << format_double(spec.params[i].beta) << '\n';
        }
    }
}

void write_trial_table(std::ostream& out, const ExperimentResult& result) {
    out << "learner\tteacher\tsession\tstep\ttime\titem\tfirst\toutcome\tpredicted\ttrue_recall\n";
    for (const auto& [kind, runs] : result.runs) {
        for (const auto& m : runs) {
            for (const auto& r : m.trials) {
                out << r.learner << '\t' << to_string(r.teacher) << '\t' << r.session << '\t' << r.step
                    << '\t' << format_double(r.time) << '\t' << r.item << '\t'
                    << (r.first_presentation ? 1 : 0) << '\t' << (r.outcome ? 1 : 0) << '\t'
                    << (r.predicted_recall ? format_double(*r.predicted_recall) : "NA") << '\t'
                    << format_double(r.true_recall) << '\n';
            }
        }
    }
}

}  // namespace activeteach
