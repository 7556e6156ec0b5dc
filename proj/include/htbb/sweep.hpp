#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "htbb/index_state.hpp"
#include "htbb/oracle.hpp"
#include "htbb/report.hpp"

namespace htbb {

struct SweepConfig {
    int rank = 2;           // initial rank r0
    int dr = 1;             // rank growth per update
    double eps = 1e-8;      // relative truncation threshold on diag(R)
    double alpha = 0.5;     // visit-mean tie margin
    std::uint64_t seed = 0;
    int max_rank = 0;       // 0 disables the cap
    bool freeze = true;     // a truncation disables growth at that link for good
    TransformKind transform = TransformKind::identity;
    /// Keep enough budget to build all cores from the current state.
    bool reserve_build = false;
    /// Largest interpolation coefficient accepted for kept upper values in
    /// the warm-up pass.
    double dominance = 2.0;
    /// Coefficient bounds tried when building the cores; the surrogate with
    /// the smallest error over the cached values is kept.
    std::vector<double> coefficient_bounds{std::numeric_limits<double>::infinity(), 1e3, 1e1};
};

/// Next node of the walk. A leaf returns to its parent; elsewhere the two
/// candidate neighbours (all active neighbours except `previous`) are
/// compared by the mean visit count of the component behind each of them.
int next_step(const TreeTopology& topology, int current, int previous, std::span<const long> counters,
              double alpha, Rng& rng);

/// Distinct not-yet-evaluated indices needed to build every core.
class BuildPlanner {
public:
    explicit BuildPlanner(const IndexState& state);
    void refresh(const IndexState& state, std::span<const int> nodes);
    [[nodiscard]] std::size_t cost(const Oracle& oracle) const;
    /// Cost of the build together with `extra` indices read beforehand.
    [[nodiscard]] std::size_t cost_with(const Oracle& oracle, const std::vector<MultiIndex>& extra) const;

private:
    std::vector<std::vector<std::uint64_t>> keys_;
};

struct SweepResult {
    IndexState state;
    std::vector<long> visits;
    std::vector<int> path;  // nodes in visit order
    std::size_t updates = 0;
    std::string stop_reason;
};

/// Walks the tree updating one link per edge crossing until the budget is
/// spent or the walk stops producing new evaluations.
SweepResult sweep(const TreeTopology& topology, Oracle& oracle, const SweepConfig& config);

struct CrossResult {
    SweepResult sweep;
    RunReport report;
};

/// Approximation: sweep with the build reserve, then build all cores.
CrossResult ht_cross(Oracle& oracle, const TreeTopology& topology, SweepConfig config);

/// Optimization: sweep with the exponential transform for `goal`; the best
/// value is taken over every evaluation made.
RunReport ht_opt(Oracle& oracle, const TreeTopology& topology, SweepConfig config, Goal goal = Goal::min);

}  // namespace htbb
