#include "htbb/oracle.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <string>

#include "htbb/errors.hpp"

namespace htbb {

std::uint64_t hash_index(std::span<const int> index) noexcept {
    // FNV-1a over the entries followed by a splitmix64 finalizer.
    std::uint64_t h = 1469598103934665603ULL;
    for (int value : index) {
        h ^= static_cast<std::uint32_t>(value);
        h *= 1099511628211ULL;
    }
    h ^= h >> 30;
    h *= 0xbf58476d1ce4e5b9ULL;
    h ^= h >> 27;
    h *= 0x94d049bb133111ebULL;
    h ^= h >> 31;
    return h;
}

// ---------------------------------------------------------------------------
// EvalCache

std::optional<double> EvalCache::find(std::span<const int> index) const {
    std::shared_lock lock(mutex_);
    const auto it = map_.find(MultiIndex(index.begin(), index.end()));
    if (it == map_.end()) return std::nullopt;
    return it->second;
}

bool EvalCache::insert(const MultiIndex& index, double value) {
    std::unique_lock lock(mutex_);
    return map_.emplace(index, value).second;
}

bool EvalCache::contains(std::span<const int> index) const {
    std::shared_lock lock(mutex_);
    return map_.contains(MultiIndex(index.begin(), index.end()));
}

std::size_t EvalCache::size() const {
    std::shared_lock lock(mutex_);
    return map_.size();
}

std::vector<std::pair<MultiIndex, double>> EvalCache::entries() const {
    std::shared_lock lock(mutex_);
    std::vector<std::pair<MultiIndex, double>> out(map_.begin(), map_.end());
    std::sort(out.begin(), out.end());
    return out;
}

void EvalCache::export_csv(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw Error(Errc::invalid_argument, "cannot write " + path.string());
    char buffer[32];
    for (const auto& [index, value] : entries()) {
        for (int entry : index) out << entry << ',';
        std::snprintf(buffer, sizeof buffer, "%.17g", value);
        out << buffer << '\n';
    }
}

std::size_t EvalCache::import_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::invalid_argument, "cannot read " + path.string());
    std::size_t added = 0;
    std::string line;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream row(line);
        for (std::string field; std::getline(row, field, ',');) fields.push_back(field);
        if (fields.size() < 2) throw Error(Errc::parse_error, "cache row needs an index and a value");
        if (width == 0) width = fields.size();
        if (fields.size() != width) throw Error(Errc::parse_error, "cache rows differ in width");
        MultiIndex index;
        try {
            for (std::size_t k = 0; k + 1 < fields.size(); ++k) index.push_back(std::stoi(fields[k]));
            if (insert(index, std::stod(fields.back()))) ++added;
        } catch (const std::logic_error&) {
            throw Error(Errc::parse_error, "bad cache row: " + line);
        }
    }
    return added;
}

// ---------------------------------------------------------------------------
// Oracle

Oracle::Oracle(Function function, std::vector<int> mode_sizes, std::size_t budget)
    : function_(std::move(function)), mode_sizes_(std::move(mode_sizes)), budget_(budget) {
    if (budget_ == 0) throw Error(Errc::invalid_argument, "budget must be positive");
    if (!function_) throw Error(Errc::invalid_argument, "oracle needs a function");
}

void Oracle::check_index(std::span<const int> index) const {
    if (index.size() != mode_sizes_.size())
        throw Error(Errc::invalid_argument, "index length does not match the oracle dimension");
    for (std::size_t k = 0; k < index.size(); ++k)
        if (index[k] < 0 || index[k] >= mode_sizes_[k])
            throw Error(Errc::invalid_argument, "index entry " + std::to_string(k) + " out of range");
}

void Oracle::record(const MultiIndex& index, double value) {
    if (!best_min_.valid() || value < best_min_.value) best_min_ = {index, value};
    if (!best_max_.valid() || value > best_max_.value) best_max_ = {index, value};
}

double Oracle::operator()(std::span<const int> index) {
    if (auto hit = cache_.find(index)) return *hit;
    check_index(index);
    if (evaluations_ >= budget_) throw BudgetExhausted(budget_);
    MultiIndex key(index.begin(), index.end());
    const double value = function_(key);
    ++evaluations_;
    cache_.insert(key, value);
    seen_.insert(hash_index(key));
    history_.push_back(value);
    record(key, value);
    return value;
}

std::vector<double> Oracle::evaluate_batch(std::span<const MultiIndex> indices) {
    std::vector<double> values;
    values.reserve(indices.size());
    for (const auto& index : indices) values.push_back((*this)(index));
    return values;
}

double Oracle::evaluate_uncounted(std::span<const int> index) const {
    check_index(index);
    return function_(index);
}

std::size_t Oracle::import_cache(const std::filesystem::path& path) {
    const std::size_t added = cache_.import_csv(path);
    for (const auto& [index, value] : cache_.entries()) {
        seen_.insert(hash_index(index));
        record(index, value);
    }
    return added;
}

}  // namespace htbb
