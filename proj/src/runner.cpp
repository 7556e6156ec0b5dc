#include "htbb/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "htbb/benchmarks.hpp"
#include "htbb/errors.hpp"
#include "htbb/sweep.hpp"
#include "json.hpp"

namespace htbb {

namespace {

std::string real(double value) {
    if (!std::isfinite(value)) return "null";
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

std::string quoted(const std::string& text) { return nlohmann::json(text).dump(); }

}  // namespace

void validate(const RunSpec& spec) {
    if (spec.mode != "approx" && spec.mode != "opt")
        throw Error(Errc::invalid_argument, "mode must be approx or opt, got '" + spec.mode + "'");
    find_benchmark(spec.function);
    if (spec.dim < 2) throw Error(Errc::invalid_dimension, "dim must be >= 2");
    if (spec.grid < 2) throw Error(Errc::invalid_argument, "grid must be >= 2");
    if (spec.rank < 1) throw Error(Errc::invalid_argument, "rank must be >= 1");
    if (spec.budget < 1) throw Error(Errc::invalid_argument, "budget must be >= 1");
    if (spec.dr < 0) throw Error(Errc::invalid_argument, "dr must be >= 0");
    if (!(spec.eps >= 0.0)) throw Error(Errc::invalid_argument, "eps must be >= 0");
    if (!(spec.alpha >= 0.0)) throw Error(Errc::invalid_argument, "alpha must be >= 0");
    if (spec.test < 1) throw Error(Errc::invalid_argument, "test must be >= 1");
}

RunOutcome run_experiment(const RunSpec& spec) {
    validate(spec);
    const auto start = std::chrono::steady_clock::now();
    Oracle oracle = make_oracle(spec.function, spec.dim, spec.grid, spec.budget);
    const auto topology = TreeTopology::balanced(std::vector<int>(static_cast<std::size_t>(spec.dim), spec.grid));

    SweepConfig config;
    config.rank = spec.rank;
    config.dr = spec.dr;
    config.eps = spec.eps;
    config.alpha = spec.alpha;
    config.seed = spec.seed;

    RunOutcome out;
    if (spec.mode == "approx") {
        out.report = ht_cross(oracle, topology, config).report;
        out.report.rel_error = relative_l2_error(*out.report.surrogate, oracle, spec.test, spec.seed + 1).value;
    } else {
        out.report = ht_opt(oracle, topology, config, spec.maximize ? Goal::max : Goal::min);
    }
    out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

std::string report_json(const RunSpec& spec, const RunOutcome& outcome) {
    const RunReport& r = outcome.report;
    std::ostringstream out;
    out << "{\n";
    out << "  \"mode\": " << quoted(spec.mode) << ",\n";
    out << "  \"function\": " << quoted(spec.function) << ",\n";
    out << "  \"dim\": " << spec.dim << ",\n";
    out << "  \"grid\": " << spec.grid << ",\n";
    out << "  \"rank\": " << spec.rank << ",\n";
    out << "  \"budget\": " << spec.budget << ",\n";
    out << "  \"seed\": " << spec.seed << ",\n";
    out << "  \"evaluations\": " << r.evaluations << ",\n";
    out << "  \"best_value\": " << real(r.best_value) << ",\n";
    out << "  \"best_index\": [";
    for (std::size_t k = 0; k < r.best_index.size(); ++k) out << (k ? ", " : "") << r.best_index[k];
    out << "],\n";
    out << "  \"rel_error\": " << (r.rel_error ? real(*r.rel_error) : "null") << ",\n";
    out << "  \"wall_seconds\": " << real(outcome.wall_seconds) << "\n";
    out << "}\n";
    return out.str();
}

BatchSpec load_batch(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::parse_error, "cannot read " + path.string());
    BatchSpec batch;
    try {
        const auto j = nlohmann::json::parse(in);
        if (!j.is_object()) throw Error(Errc::parse_error, "batch config must be a JSON object");
        static const char* known[] = {"mode", "functions", "dims",  "repeats", "grid", "rank",    "budget",
                                      "dr",   "eps",       "alpha", "seed",    "test", "maximize"};
        for (const auto& item : j.items()) {
            bool ok = false;
            for (const char* key : known) ok = ok || item.key() == key;
            if (!ok) throw Error(Errc::parse_error, "unknown batch key '" + item.key() + "'");
        }
        RunSpec& b = batch.base;
        b.mode = j.value("mode", b.mode);
        b.grid = j.value("grid", b.grid);
        b.rank = j.value("rank", b.rank);
        b.budget = j.value("budget", b.budget);
        b.dr = j.value("dr", b.dr);
        b.eps = j.value("eps", b.eps);
        b.alpha = j.value("alpha", b.alpha);
        b.seed = j.value("seed", b.seed);
        b.test = j.value("test", b.test);
        b.maximize = j.value("maximize", b.maximize);
        batch.functions = j.value("functions", std::vector<std::string>{});
        batch.dims = j.value("dims", std::vector<int>{256});
        batch.repeats = j.value("repeats", 1);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::parse_error, std::string("bad batch config: ") + e.what());
    }
    if (batch.repeats < 1) throw Error(Errc::parse_error, "repeats must be >= 1");
    for (int dim : batch.dims)
        if (dim < 2) throw Error(Errc::parse_error, "dims must be >= 2");
    for (const auto& name : batch.functions) {
        RunSpec probe = batch.base;
        probe.function = name;
        for (int dim : batch.dims) {
            probe.dim = dim;
            try {
                validate(probe);
            } catch (const Error& e) {
                throw Error(Errc::parse_error, e.what());
            }
        }
    }
    return batch;
}

std::vector<BatchRow> run_batch(const BatchSpec& batch) {
    std::vector<BatchRow> rows;
    for (const auto& name : batch.functions) {
        for (int dim : batch.dims) {
            std::vector<double> values;
            for (int k = 0; k < batch.repeats; ++k) {
                RunSpec spec = batch.base;
                spec.function = name;
                spec.dim = dim;
                spec.seed = batch.base.seed + static_cast<std::uint64_t>(k);
                const RunOutcome outcome = run_experiment(spec);
                values.push_back(spec.mode == "approx" ? *outcome.report.rel_error : outcome.report.best_value);
            }
            BatchRow row{name, dim, 0.0, 0.0, static_cast<int>(values.size())};
            for (double v : values) row.mean += v;
            row.mean /= static_cast<double>(values.size());
            for (double v : values) row.std += (v - row.mean) * (v - row.mean);
            row.std = std::sqrt(row.std / static_cast<double>(values.size()));
            rows.push_back(row);
        }
    }
    return rows;
}

std::string batch_csv(const std::vector<BatchRow>& rows) {
    std::ostringstream out;
    out << "function,dim,mean,std,runs\n";
    for (const auto& row : rows)
        out << row.function << ',' << row.dim << ',' << real(row.mean) << ',' << real(row.std) << ',' << row.runs
            << '\n';
    return out.str();
}

}  // namespace htbb
