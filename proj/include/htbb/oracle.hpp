#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <shared_mutex>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "htbb/ht_tree.hpp"

namespace htbb {

std::uint64_t hash_index(std::span<const int> index) noexcept;

struct IndexHash {
    std::size_t operator()(const MultiIndex& index) const noexcept { return hash_index(index); }
};

/// Thread-safe map from multi-index to value: shared reads, exclusive writes.
class EvalCache {
public:
    [[nodiscard]] std::optional<double> find(std::span<const int> index) const;
    /// Returns false if the index was already present (the stored value wins).
    bool insert(const MultiIndex& index, double value);
    [[nodiscard]] bool contains(std::span<const int> index) const;
    [[nodiscard]] std::size_t size() const;

    /// One row per entry: index entries then the value, comma separated.
    void export_csv(const std::filesystem::path& path) const;
    /// Adds entries from a CSV written by export_csv; returns how many were new.
    std::size_t import_csv(const std::filesystem::path& path);

    [[nodiscard]] std::vector<std::pair<MultiIndex, double>> entries() const;

private:
    mutable std::shared_mutex mutex_;
    std::unordered_map<MultiIndex, double, IndexHash> map_;
};

/// Best value seen and where.
struct Extremum {
    MultiIndex index;
    double value = std::numeric_limits<double>::quiet_NaN();
    [[nodiscard]] bool valid() const noexcept { return !index.empty(); }
};

/// Budget-limited, caching wrapper around a black-box function on a grid.
///
/// Every distinct index costs one unit of budget; cached indices are free.
/// Entries imported into the cache before the run are also free.
class Oracle {
public:
    using Function = std::function<double(std::span<const int>)>;

    Oracle(Function function, std::vector<int> mode_sizes, std::size_t budget);

    [[nodiscard]] int dim() const noexcept { return static_cast<int>(mode_sizes_.size()); }
    [[nodiscard]] std::span<const int> mode_sizes() const noexcept { return mode_sizes_; }
    [[nodiscard]] std::size_t budget() const noexcept { return budget_; }
    [[nodiscard]] std::size_t evaluations() const noexcept { return evaluations_; }
    [[nodiscard]] std::size_t remaining() const noexcept { return budget_ - evaluations_; }

    /// Cached value or a new evaluation; throws BudgetExhausted when a new
    /// evaluation is needed and the budget is spent.
    double operator()(std::span<const int> index);

    /// Evaluates in order; on exhaustion keeps every value that fit, then throws.
    std::vector<double> evaluate_batch(std::span<const MultiIndex> indices);

    /// Direct call that bypasses cache and budget, for test-set errors.
    [[nodiscard]] double evaluate_uncounted(std::span<const int> index) const;

    [[nodiscard]] bool cached(std::span<const int> index) const { return cache_.contains(index); }
    /// True if an index with this hash has been evaluated or imported.
    [[nodiscard]] bool seen(std::uint64_t hash) const { return seen_.contains(hash); }

    [[nodiscard]] const EvalCache& cache() const noexcept { return cache_; }
    EvalCache& cache() noexcept { return cache_; }
    std::size_t import_cache(const std::filesystem::path& path);

    [[nodiscard]] const Extremum& best_min() const noexcept { return best_min_; }
    [[nodiscard]] const Extremum& best_max() const noexcept { return best_max_; }

    /// Raw values of the counted evaluations, in evaluation order.
    [[nodiscard]] std::span<const double> history() const noexcept { return history_; }

private:
    void check_index(std::span<const int> index) const;
    void record(const MultiIndex& index, double value);

    Function function_;
    std::vector<int> mode_sizes_;
    std::size_t budget_;
    std::size_t evaluations_ = 0;
    EvalCache cache_;
    std::unordered_set<std::uint64_t> seen_;
    Extremum best_min_, best_max_;
    std::vector<double> history_;
};

}  // namespace htbb
