#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "htbb/ht_tree.hpp"
#include "htbb/oracle.hpp"
#include "htbb/report.hpp"

namespace htbb {

struct Benchmark {
    std::string name;
    double lower = 0.0;
    double upper = 0.0;
    double (*evaluate)(std::span<const double> x) = nullptr;
};

/// The 14 test functions, sorted by name.
const std::vector<Benchmark>& benchmarks();
const Benchmark& find_benchmark(std::string_view name);
double eval_benchmark(std::string_view name, std::span<const double> x);

/// Chebyshev extrema on [a, b] in descending order, endpoints included and
/// mirrored exactly about the midpoint.
std::vector<double> chebyshev_grid(int n, double a, double b);

/// Oracle over the Chebyshev grid of a benchmark, with N nodes in each mode.
Oracle make_oracle(std::string_view name, int dim, int nodes, std::size_t budget);

struct ErrorEstimate {
    double value = 0.0;
    bool absolute = false;  // set when the reference norm is zero
};

/// Relative L2 error of a surrogate on uniform random grid indices; the
/// reference values bypass the oracle's cache and budget.
ErrorEstimate relative_l2_error(const HTTensor& surrogate, const Oracle& oracle, int n_test, std::uint64_t seed);

/// Uniform random distinct indices until the budget is spent.
RunReport random_search(Oracle& oracle, std::size_t budget, std::uint64_t seed, Goal goal = Goal::min);

}  // namespace htbb
