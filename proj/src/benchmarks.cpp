#include "htbb/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "htbb/errors.hpp"

namespace htbb {

namespace {

using std::numbers::pi;

double alpine(std::span<const double> x) {
    double s = 0.0;
    for (double t : x) s += std::abs(t * std::sin(t) + 0.1 * t);
    return s;
}

double chung(std::span<const double> x) {
    double s = 0.0;
    for (double t : x) s += t * t;
    return s * s;
}

double dixon(std::span<const double> x) {
    double s = (x[0] - 1.0) * (x[0] - 1.0);
    for (std::size_t i = 1; i < x.size(); ++i) {
        const double u = 2.0 * x[i] * x[i] - x[i - 1];
        s += static_cast<double>(i + 1) * u * u;
    }
    return s;
}

double griewank(std::span<const double> x) {
    double s = 0.0, p = 1.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        s += x[i] * x[i] / 4000.0;
        p *= std::cos(x[i] / std::sqrt(static_cast<double>(i + 1)));
    }
    return s - p + 1.0;
}

double pathological(std::span<const double> x) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        const double a = x[i], b = x[i + 1];
        const double sn = std::sin(std::sqrt(100.0 * a * a + b * b));
        const double q = a * a - 2.0 * a * b + b * b;
        s += 0.5 + (sn * sn - 0.5) / (1.0 + 0.001 * q * q);
    }
    return s;
}

double pinter(std::span<const double> x) {
    const std::size_t d = x.size();
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        const double prev = x[(i + d - 1) % d], cur = x[i], next = x[(i + 1) % d];
        const double w = static_cast<double>(i + 1);
        const double a = prev * std::sin(cur) + std::sin(next);
        const double b = prev * prev - 2.0 * cur + 3.0 * next - std::cos(cur) + 1.0;
        const double sa = std::sin(a);
        s += w * cur * cur + 20.0 * w * sa * sa + w * std::log10(1.0 + w * b * b);
    }
    return s;
}

double qing(std::span<const double> x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double u = x[i] * x[i] - static_cast<double>(i + 1);
        s += u * u;
    }
    return s;
}

double rastrigin(std::span<const double> x) {
    constexpr double a = 10.0;
    double s = a * static_cast<double>(x.size());
    for (double t : x) s += t * t - a * std::cos(2.0 * pi * t);
    return s;
}

double schaffer(std::span<const double> x) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        const double q = x[i] * x[i] + x[i + 1] * x[i + 1];
        const double sn = std::sin(std::sqrt(q));
        const double den = 1.0 + 0.001 * q;
        s += 0.5 + (sn * sn - 0.5) / (den * den);
    }
    return s;
}

double schwefel(std::span<const double> x) {
    double s = 0.0;
    for (double t : x) s += t * std::sin(std::sqrt(std::abs(t)));
    return -s / static_cast<double>(x.size());
}

double sphere(std::span<const double> x) {
    double s = 0.0;
    for (double t : x) s += t * t;
    return s;
}

double squares(std::span<const double> x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += static_cast<double>(i + 1) * x[i] * x[i];
    return s;
}

double trigonometric(std::span<const double> x) {
    const double d = static_cast<double>(x.size());
    double cos_sum = 0.0;
    for (double t : x) cos_sum += std::cos(t);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double u = d - cos_sum + static_cast<double>(i + 1) * (1.0 - std::cos(x[i]) - std::sin(x[i]));
        s += u * u;
    }
    return s;
}

double wavy(std::span<const double> x) {
    constexpr double k = 10.0;
    double s = 0.0;
    for (double t : x) s += std::cos(k * t) * std::exp(-t * t / 2.0);
    return 1.0 - s / static_cast<double>(x.size());
}

}  // namespace

const std::vector<Benchmark>& benchmarks() {
    static const std::vector<Benchmark> registry = {
        {"alpine", -10.0, 10.0, alpine},
        {"chung", -10.0, 10.0, chung},
        {"dixon", -10.0, 10.0, dixon},
        {"griewank", -100.0, 100.0, griewank},
        {"pathological", -100.0, 100.0, pathological},
        {"pinter", -10.0, 10.0, pinter},
        {"qing", 0.0, 500.0, qing},
        {"rastrigin", -5.12, 5.12, rastrigin},
        {"schaffer", -100.0, 100.0, schaffer},
        {"schwefel", 0.0, 500.0, schwefel},
        {"sphere", -5.12, 5.12, sphere},
        {"squares", -10.0, 10.0, squares},
        {"trigonometric", 0.0, pi, trigonometric},
        {"wavy", -pi, pi, wavy},
    };
    return registry;
}

const Benchmark& find_benchmark(std::string_view name) {
    for (const auto& b : benchmarks())
        if (b.name == name) return b;
    throw Error(Errc::unknown_benchmark, "no benchmark named '" + std::string(name) + "'");
}

double eval_benchmark(std::string_view name, std::span<const double> x) {
    if (x.empty()) throw Error(Errc::invalid_dimension, "benchmark input must be non-empty");
    return find_benchmark(name).evaluate(x);
}

std::vector<double> chebyshev_grid(int n, double a, double b) {
    if (n < 2) throw Error(Errc::invalid_argument, "grid needs at least 2 nodes");
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    std::vector<double> t(static_cast<std::size_t>(n));
    for (int k = 0; k < (n + 1) / 2; ++k) {
        t[k] = std::cos(pi * k / (n - 1));
        t[n - 1 - k] = -t[k];
    }
    if (n % 2 == 1) t[n / 2] = 0.0;
    std::vector<double> x(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) x[k] = mid + half * t[k];
    x.front() = b;
    x.back() = a;
    return x;
}

Oracle make_oracle(std::string_view name, int dim, int nodes, std::size_t budget) {
    const Benchmark& bench = find_benchmark(name);
    if (dim < 1) throw Error(Errc::invalid_dimension, "dimension must be >= 1");
    auto grid = std::make_shared<const std::vector<double>>(chebyshev_grid(nodes, bench.lower, bench.upper));
    auto f = [grid, fn = bench.evaluate](std::span<const int> index) {
        thread_local std::vector<double> x;
        x.resize(index.size());
        for (std::size_t k = 0; k < index.size(); ++k) x[k] = (*grid)[static_cast<std::size_t>(index[k])];
        return fn(x);
    };
    return Oracle(std::move(f), std::vector<int>(static_cast<std::size_t>(dim), nodes), budget);
}

ErrorEstimate relative_l2_error(const HTTensor& surrogate, const Oracle& oracle, int n_test, std::uint64_t seed) {
    if (n_test < 1) throw Error(Errc::invalid_argument, "n_test must be >= 1");
    const auto sizes = oracle.mode_sizes();
    std::mt19937_64 rng(seed);
    double diff = 0.0, norm = 0.0;
    MultiIndex index(sizes.size());
    for (int t = 0; t < n_test; ++t) {
        for (std::size_t k = 0; k < sizes.size(); ++k)
            index[k] = std::uniform_int_distribution<int>(0, sizes[k] - 1)(rng);
        const double truth = oracle.evaluate_uncounted(index);
        const double pred = surrogate.evaluate(index);
        diff += (pred - truth) * (pred - truth);
        norm += truth * truth;
    }
    if (norm == 0.0) return {std::sqrt(diff), true};
    return {std::sqrt(diff / norm), false};
}

RunReport random_search(Oracle& oracle, std::size_t budget, std::uint64_t seed, Goal goal) {
    const auto sizes = oracle.mode_sizes();
    std::mt19937_64 rng(seed);
    RunReport report;
    report.mode = "random";
    const std::size_t start = oracle.evaluations();
    const std::size_t total = capped_volume(sizes, budget);
    const std::size_t target = std::min({budget, oracle.remaining(), total});
    MultiIndex index(sizes.size());
    std::size_t misses = 0;
    while (oracle.evaluations() - start < target && misses < 1000 * (target + 1)) {
        for (std::size_t k = 0; k < sizes.size(); ++k)
            index[k] = std::uniform_int_distribution<int>(0, sizes[k] - 1)(rng);
        if (oracle.cached(index)) {
            ++misses;
            continue;
        }
        oracle(index);
    }
    report.evaluations = oracle.evaluations();
    const Extremum& best = goal == Goal::min ? oracle.best_min() : oracle.best_max();
    report.best_index = best.index;
    report.best_value = best.value;
    report.trace = best_so_far_trace(oracle.history(), goal);
    report.stop_reason = "budget";
    return report;
}

}  // namespace htbb
