// htbb: run HT-cross approximation or HTOpt minimization on a benchmark.
//
//   htbb approx --function alpine --dim 256 --seed 0 --out run.json
//   htbb opt --function schwefel --dim 256 --trace trace.csv
//   htbb batch --config table2.json --out table2.csv

#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "htbb/benchmarks.hpp"
#include "htbb/errors.hpp"
#include "htbb/runner.hpp"

namespace {

constexpr int exit_runtime = 1;
constexpr int exit_usage = 2;

void write_text(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw htbb::Error(htbb::Errc::invalid_argument, "cannot write " + path);
    out << text;
}

void add_run_options(CLI::App& cmd, htbb::RunSpec& spec) {
    std::vector<std::string> names;
    for (const auto& b : htbb::benchmarks()) names.push_back(b.name);
    cmd.add_option("--function", spec.function, "Benchmark name")->required()->check(CLI::IsMember(names));
    cmd.add_option("--dim", spec.dim, "Dimension")->capture_default_str()->check(CLI::PositiveNumber);
    cmd.add_option("--grid", spec.grid, "Chebyshev nodes per mode")->capture_default_str()->check(CLI::Range(2, 1 << 20));
    cmd.add_option("--rank", spec.rank, "Initial rank r0")->capture_default_str()->check(CLI::PositiveNumber);
    cmd.add_option("--budget", spec.budget, "Distinct oracle evaluations")->capture_default_str()->check(CLI::PositiveNumber);
    cmd.add_option("--dr", spec.dr, "Rank growth per update")->capture_default_str()->check(CLI::NonNegativeNumber);
    cmd.add_option("--eps", spec.eps, "Relative rank truncation threshold")->capture_default_str()->check(CLI::NonNegativeNumber);
    cmd.add_option("--alpha", spec.alpha, "Visit-mean tie margin")->capture_default_str()->check(CLI::NonNegativeNumber);
    cmd.add_option("--seed", spec.seed, "Random seed")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hierarchical Tucker black-box approximation and optimization"};
    app.require_subcommand(1);

    htbb::RunSpec spec;
    std::string out_path, trace_path, surrogate_path, config_path;

    auto* approx = app.add_subcommand("approx", "HT-cross approximation with a random-index test error");
    add_run_options(*approx, spec);
    approx->add_option("--test", spec.test, "Test indices")->capture_default_str()->check(CLI::PositiveNumber);
    approx->add_option("--out", out_path, "Report JSON (default: stdout)");
    approx->add_option("--trace", trace_path, "Best-so-far trace CSV");
    approx->add_option("--surrogate", surrogate_path, "Surrogate HT tensor JSON");

    auto* opt = app.add_subcommand("opt", "HTOpt minimization (or maximization with --max)");
    add_run_options(*opt, spec);
    opt->add_flag("--max", spec.maximize, "Maximize instead of minimize");
    opt->add_option("--out", out_path, "Report JSON (default: stdout)");
    opt->add_option("--trace", trace_path, "Best-so-far trace CSV");

    auto* batch = app.add_subcommand("batch", "Run a function x dim x repeats table from a JSON config");
    batch->add_option("--config", config_path, "Batch config JSON")->required();
    batch->add_option("--out", out_path, "Result CSV (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_usage;
    }

    htbb::BatchSpec batch_spec;
    try {
        if (batch->parsed()) {
            batch_spec = htbb::load_batch(config_path);
        } else {
            spec.mode = approx->parsed() ? "approx" : "opt";
            htbb::validate(spec);
        }
    } catch (const htbb::Error& e) {
        std::cerr << "htbb: " << e.what() << '\n';
        return exit_usage;
    }

    try {
        if (batch->parsed()) {
            write_text(out_path, htbb::batch_csv(htbb::run_batch(batch_spec)));
            return 0;
        }
        const htbb::RunOutcome outcome = htbb::run_experiment(spec);
        write_text(out_path, htbb::report_json(spec, outcome));
        if (!trace_path.empty()) htbb::write_trace_csv(outcome.report.trace, trace_path);
        if (!surrogate_path.empty() && outcome.report.surrogate) outcome.report.surrogate->save(surrogate_path);
    } catch (const std::exception& e) {
        std::cerr << "htbb: " << e.what() << '\n';
        return exit_runtime;
    }
    return 0;
}
