#include "commands.hpp"

#include <fcntl.h>
#include <pthread.h>
#include <signal.h>
#include <sys/file.h>
#include <unistd.h>

#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "activeteach/analysis.hpp"
#include "activeteach/experiment_io.hpp"
#include "activeteach/simulator.hpp"
#include "activeteach/tutor/http_api.hpp"
#include "activeteach/tutor/service.hpp"

namespace activeteach::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Advisory lock on <dir>/.activeteach.lock, released when the process exits.
class DirLock {
public:
    explicit DirLock(const fs::path& dir) {
        const auto path = dir / ".activeteach.lock";
        fd_ = ::open(path.c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
        if (fd_ < 0) throw IoError("cannot create " + path.string());
        if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
            ::close(fd_);
            fd_ = -1;
        }
    }
    ~DirLock() {
        if (fd_ >= 0) ::close(fd_);
    }
    bool held() const { return fd_ >= 0; }

private:
    int fd_ = -1;
};

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

std::ifstream open_in(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    return in;
}

void finish(std::ofstream& out, const fs::path& path) {
    out.close();
    if (!out) throw IoError("failed writing " + path.string());
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

}  // namespace

int cmd_simulate(const SimulateOptions& opt, std::ostream& log) {
    ExperimentConfig cfg;
    try {
        cfg = load_experiment_config(opt.config);
        if (opt.threads) cfg.threads = *opt.threads;
        if (opt.keep_trials) cfg.keep_trials = true;
    } catch (const ConfigError& e) {
        log << "activeteach simulate: " << e.what() << "\n";
        return fs::exists(opt.config) ? kUsageError : kIoError;
    }
    try {
        ensure_dir(opt.out);
        DirLock lock(opt.out);
        if (!lock.held()) {
            log << "activeteach simulate: " << opt.out.string() << " is in use by another command\n";
            return kLocked;
        }
        log << "simulating " << cfg.population_size << " learners x " << cfg.teachers.size()
            << " teachers, " << cfg.item_count << " items\n";
        const auto result = run_experiment(cfg);

        json outputs{{"metrics", "metrics.tsv"},
                     {"prediction_error", "prediction_error.tsv"},
                     {"learners", "learners.tsv"}};
        {
            const auto p = opt.out / "metrics.tsv";
            auto out = open_out(p);
            write_metrics_table(out, result);
            finish(out, p);
        }
        {
            const auto p = opt.out / "prediction_error.tsv";
            auto out = open_out(p);
            write_error_table(out, result);
            finish(out, p);
        }
        {
            const auto p = opt.out / "learners.tsv";
            auto out = open_out(p);
            write_learner_table(out, result.learners);
            finish(out, p);
        }
        if (cfg.keep_trials) {
            const auto p = opt.out / "trials.tsv";
            auto out = open_out(p);
            write_trial_table(out, result);
            finish(out, p);
            outputs["trials"] = "trials.tsv";
        }
        // Thread count does not affect results, so it stays out of the manifest.
        json effective = json::parse(experiment_config_to_json(cfg));
        effective.erase("threads");
        json manifest{{"artifact", "activeteach"},
                      {"version", ACTIVETEACH_VERSION},
                      {"config", effective},
                      {"seeds",
                       {{"base", cfg.seed},
                        {"population_stream", "0x504F50"},
                        {"response_stream", "0x524553"},
                        {"leitner_stream", "0x4C4549"}}},
                      {"outputs", outputs}};
        const auto p = opt.out / "manifest.json";
        auto out = open_out(p);
        out << manifest.dump(2) << "\n";
        finish(out, p);
        log << "wrote " << opt.out.string() << "\n";
        return kOk;
    } catch (const IoError& e) {
        log << "activeteach simulate: " << e.what() << "\n";
        return kIoError;
    } catch (const ConfigError& e) {
        log << "activeteach simulate: " << e.what() << "\n";
        return kUsageError;
    } catch (const std::exception& e) {
        log << "activeteach simulate: " << e.what() << "\n";
        return kRuntimeError;
    }
}

int cmd_analyze(const AnalyzeOptions& opt, std::ostream& out, std::ostream& log) {
    try {
        const fs::path out_dir = opt.out.value_or(opt.metrics_dir);
        ensure_dir(out_dir);
        DirLock lock(out_dir);
        if (!lock.held()) {
            log << "activeteach analyze: " << out_dir.string() << " is in use by another command\n";
            return kLocked;
        }
        auto metrics_in = open_in(opt.metrics_dir / "metrics.tsv");
        const auto rows = read_metrics_table(metrics_in);

        std::vector<std::string> expected;
        if (const auto mp = opt.metrics_dir / "manifest.json"; fs::exists(mp)) {
            auto in = open_in(mp);
            const auto manifest = json::parse(in);
            if (manifest.contains("config") && manifest["config"].contains("teachers")) {
                expected = manifest["config"]["teachers"].get<std::vector<std::string>>();
            }
        }
        auto report = analyze_metrics(rows, expected, opt.baseline, opt.significance);
        if (const auto ep = opt.metrics_dir / "prediction_error.tsv"; fs::exists(ep)) {
            auto in = open_in(ep);
            add_error_series(report, read_error_table(in));
        }

        std::ostringstream text;
        write_report_text(text, report);
        out << text.str();
        {
            const auto p = out_dir / "report.txt";
            auto f = open_out(p);
            f << text.str();
            finish(f, p);
        }
        {
            const auto p = out_dir / "comparisons.tsv";
            auto f = open_out(p);
            write_report_table(f, report);
            finish(f, p);
        }
        return kOk;
    } catch (const IoError& e) {
        log << "activeteach analyze: " << e.what() << "\n";
        return kIoError;
    } catch (const std::exception& e) {
        log << "activeteach analyze: " << e.what() << "\n";
        return kRuntimeError;
    }
}

int cmd_serve(const ServeOptions& opt, std::ostream& log) {
    using namespace tutor;
    ServiceConfig cfg;
    try {
        if (opt.config) cfg = load_service_config(*opt.config);
        apply_env_overrides(cfg);
        if (opt.port) cfg.port = *opt.port;
        if (opt.data_dir) cfg.data_dir = *opt.data_dir;
        if (opt.vocabulary) cfg.vocabulary = *opt.vocabulary;
        cfg.validate();
    } catch (const ConfigError& e) {
        log << "activeteach serve: " << e.what() << "\n";
        return (opt.config && !fs::exists(*opt.config)) ? kIoError : kUsageError;
    }

    // Handled by a dedicated thread; blocked before any other thread starts.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    std::unique_ptr<TutorService> service;
    try {
        std::ifstream vocab(cfg.vocabulary);
        if (!vocab) throw IoError("cannot read vocabulary " + cfg.vocabulary.string());
        const auto items = parse_vocabulary(vocab);
        service = std::make_unique<TutorService>(cfg, std::make_shared<SystemClock>());
        if (service->vocabulary_size() == 0) {
            std::ostringstream doc;
            for (const auto& item : items) doc << item.id << '\t' << item.prompt << '\t' << item.answer << '\n';
            std::istringstream in(doc.str());
            log << "imported " << service->ingest_vocabulary(in) << " vocabulary items\n";
        }
    } catch (const VocabularyError& e) {
        log << "activeteach serve: " << e.what() << "\n";
        return kUsageError;
    } catch (const IoError& e) {
        log << "activeteach serve: " << e.what() << "\n";
        return kIoError;
    } catch (const StoreError& e) {
        log << "activeteach serve: " << e.what() << "\n";
        return kIoError;
    }

    HttpApi api(*service);
    int port = 0;
    try {
        port = api.bind(cfg.host, cfg.port);
    } catch (const std::exception& e) {
        log << "activeteach serve: " << e.what() << "\n";
        return kIoError;
    }
    log << "listening on http://" << cfg.host << ":" << port << "\n" << std::flush;

    std::thread waiter([&] {
        int sig = 0;
        sigwait(&signals, &sig);
        api.stop();
    });
    api.run();
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
    log << "stopped\n";
    return kOk;
}

}  // namespace activeteach::cli
