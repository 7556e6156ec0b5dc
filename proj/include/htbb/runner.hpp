#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "htbb/report.hpp"

namespace htbb {

/// One experiment on a benchmark over its Chebyshev grid.
struct RunSpec {
    std::string mode = "approx";  // "approx" or "opt"
    std::string function;
    int dim = 256;
    int grid = 8;
    int rank = 2;
    std::size_t budget = 10000;
    int dr = 1;
    double eps = 1e-8;
    double alpha = 0.5;
    std::uint64_t seed = 0;
    int test = 10000;       // test indices for the approximation error
    bool maximize = false;  // opt only
};

struct RunOutcome {
    RunReport report;
    double wall_seconds = 0.0;
};

/// Throws Error(invalid_argument) for out-of-range fields or an unknown mode,
/// Error(invalid_dimension) for dim < 2 and Error(unknown_benchmark) for an
/// unknown function.
void validate(const RunSpec& spec);

/// Runs HT-cross (approx, with the test error filled in) or HTOpt (opt).
RunOutcome run_experiment(const RunSpec& spec);

/// Flat JSON object with the keys mode, function, dim, grid, rank, budget,
/// seed, evaluations, best_value, best_index, rel_error, wall_seconds.
/// Reals are printed with 17 significant digits; rel_error is null in opt mode.
std::string report_json(const RunSpec& spec, const RunOutcome& outcome);

/// Batch: every function x dim cell run `repeats` times with seeds
/// seed, seed + 1, ...; the cell statistic is the relative error (approx)
/// or the best value (opt).
struct BatchSpec {
    RunSpec base;
    std::vector<std::string> functions;
    std::vector<int> dims;
    int repeats = 1;
};

struct BatchRow {
    std::string function;
    int dim = 0;
    double mean = 0.0;
    double std = 0.0;  // population standard deviation
    int runs = 0;
};

/// Reads a JSON batch file. Keys: mode, functions, dims, repeats and any
/// RunSpec field (grid, rank, budget, dr, eps, alpha, seed, test, maximize).
/// Throws Error(parse_error) on malformed input.
BatchSpec load_batch(const std::filesystem::path& path);

std::vector<BatchRow> run_batch(const BatchSpec& batch);

/// Columns function,dim,mean,std,runs.
std::string batch_csv(const std::vector<BatchRow>& rows);

}  // namespace htbb
