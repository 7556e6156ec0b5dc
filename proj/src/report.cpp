#include "htbb/report.hpp"

#include <cstdio>
#include <fstream>

#include "htbb/errors.hpp"

namespace htbb {

std::vector<TracePoint> best_so_far_trace(std::span<const double> history, Goal goal, std::size_t step) {
    std::vector<TracePoint> trace;
    if (step == 0) step = 1;
    double best = 0.0;
    for (std::size_t k = 0; k < history.size(); ++k) {
        const double value = history[k];
        if (k == 0 || (goal == Goal::min ? value < best : value > best)) best = value;
        const std::size_t count = k + 1;
        if (count % step == 0 || count == history.size()) trace.push_back({count, best});
    }
    return trace;
}

void write_trace_csv(const std::vector<TracePoint>& trace, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(Errc::invalid_argument, "cannot write " + path.string());
    out << "evals,value\n";
    char buffer[32];
    for (const auto& point : trace) {
        std::snprintf(buffer, sizeof buffer, "%.17g", point.value);
        out << point.evaluations << ',' << buffer << '\n';
    }
}

}  // namespace htbb
