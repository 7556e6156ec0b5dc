#pragma once

#include <cstddef>
#include <filesystem>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "htbb/ht_tree.hpp"

namespace htbb {

enum class Goal { min, max };

struct TracePoint {
    std::size_t evaluations = 0;
    double value = 0.0;
};

struct RunReport {
    std::string mode;
    std::size_t evaluations = 0;
    MultiIndex best_index;
    double best_value = std::numeric_limits<double>::quiet_NaN();
    std::vector<TracePoint> trace;
    std::optional<double> rel_error;
    std::size_t updates = 0;
    std::string stop_reason;
    std::shared_ptr<const HTTensor> surrogate;
};

/// Best-so-far after every `step` evaluations, plus the final count.
std::vector<TracePoint> best_so_far_trace(std::span<const double> history, Goal goal, std::size_t step = 100);

/// Columns evals,value; values printed with 17 significant digits.
void write_trace_csv(const std::vector<TracePoint>& trace, const std::filesystem::path& path);

}  // namespace htbb
