// activeteach: simulate | analyze | serve
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

using namespace activeteach::cli;

int main(int argc, char** argv) {
    CLI::App app{"Adaptive teaching engine: simulations, analysis and the tutor service"};
    app.set_version_flag("--version", ACTIVETEACH_VERSION);
    app.require_subcommand(1);

    SimulateOptions sim;
    unsigned threads = 0;
    auto* simulate = app.add_subcommand("simulate", "Run an artificial-learner experiment");
    simulate->add_option("config", sim.config, "Experiment config (JSON)")->required();
    simulate->add_option("-o,--out", sim.out, "Output directory")->required();
    auto* threads_opt = simulate->add_option("-j,--threads", threads, "Worker threads (0 = all cores)");
    simulate->add_flag("--keep-trials", sim.keep_trials, "Also write trials.tsv");

    AnalyzeOptions ana;
    std::string ana_out;
    auto* analyze = app.add_subcommand("analyze", "Compare teachers in a simulation output");
    analyze->add_option("metrics_dir", ana.metrics_dir, "Directory written by simulate")->required();
    auto* ana_out_opt = analyze->add_option("-o,--out", ana_out, "Where to write the report (default: metrics_dir)");
    analyze->add_option("--baseline", ana.baseline, "Baseline teacher")->capture_default_str();
    analyze->add_option("--alpha", ana.significance, "Significance threshold")->capture_default_str();

    ServeOptions srv;
    std::string srv_config, srv_data, srv_vocab;
    int srv_port = 0;
    auto* serve = app.add_subcommand("serve", "Run the tutor HTTP service");
    auto* cfg_opt = serve->add_option("config", srv_config, "Service config (JSON)");
    auto* port_opt = serve->add_option("-p,--port", srv_port, "Listen port (0 = any free port)");
    auto* data_opt = serve->add_option("--data-dir", srv_data, "Data directory");
    auto* vocab_opt = serve->add_option("--vocabulary", srv_vocab, "Vocabulary TSV");

    app.footer("Exit codes: 0 ok, 1 runtime error, 2 usage or config error, 3 I/O error, 4 output dir locked");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsageError;
    }

    if (simulate->parsed()) {
        if (threads_opt->count() > 0) sim.threads = threads;
        return cmd_simulate(sim, std::cerr);
    }
    if (analyze->parsed()) {
        if (ana_out_opt->count() > 0) ana.out = ana_out;
        return cmd_analyze(ana, std::cout, std::cerr);
    }
    if (cfg_opt->count() > 0) srv.config = srv_config;
    if (port_opt->count() > 0) srv.port = srv_port;
    if (data_opt->count() > 0) srv.data_dir = srv_data;
    if (vocab_opt->count() > 0) srv.vocabulary = srv_vocab;
    return cmd_serve(srv, std::cerr);
}
