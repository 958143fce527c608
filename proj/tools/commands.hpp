#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace activeteach::cli {

enum ExitCode : int {
    kOk = 0,
    kRuntimeError = 1,
    kUsageError = 2,  // bad arguments or invalid configuration
    kIoError = 3,     // unreadable input, unwritable output, port unavailable
    kLocked = 4,      // another command holds the output directory
};

struct SimulateOptions {
    std::filesystem::path config;
    std::filesystem::path out;
    std::optional<unsigned> threads;
    bool keep_trials = false;
};

struct AnalyzeOptions {
    std::filesystem::path metrics_dir;
    std::optional<std::filesystem::path> out;
    std::string baseline = "leitner";
    double significance = 0.05;
};

struct ServeOptions {
    std::optional<std::filesystem::path> config;
    std::optional<int> port;
    std::optional<std::filesystem::path> data_dir;
    std::optional<std::filesystem::path> vocabulary;
};

int cmd_simulate(const SimulateOptions& opt, std::ostream& log);
int cmd_analyze(const AnalyzeOptions& opt, std::ostream& out, std::ostream& log);
int cmd_serve(const ServeOptions& opt, std::ostream& log);

}  // namespace activeteach::cli
