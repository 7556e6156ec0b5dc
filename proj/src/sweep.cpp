#include "htbb/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <unordered_set>

#include "htbb/core_builder.hpp"
#include "htbb/errors.hpp"

namespace htbb {

namespace {

struct ComponentStats {
    double sum = 0.0;
    long count = 0;
};

ComponentStats subtree_stats(const TreeTopology& topo, int id, std::span<const long> counters) {
    ComponentStats out;
    std::vector<int> stack{id};
    while (!stack.empty()) {
        const int current = stack.back();
        stack.pop_back();
        const auto& n = topo.node(current);
        if (!n.active) continue;
        out.sum += static_cast<double>(counters[current]);
        ++out.count;
        if (!n.is_leaf()) {
            stack.push_back(n.children[0]);
            stack.push_back(n.children[1]);
        }
    }
    return out;
}

double component_mean(const TreeTopology& topo, int current, int candidate, std::span<const long> counters) {
    if (topo.node(current).parent == candidate) {
        const ComponentStats all = subtree_stats(topo, topo.root(), counters);
        const ComponentStats below = subtree_stats(topo, current, counters);
        return (all.sum - below.sum) / static_cast<double>(all.count - below.count);
    }
    const ComponentStats s = subtree_stats(topo, candidate, counters);
    return s.sum / static_cast<double>(s.count);
}

std::vector<int> dirty_nodes(const TreeTopology& topo, int node) {
    std::vector<int> out{node};
    const int parent = topo.node(node).parent;
    out.push_back(parent);
    if (parent == topo.root()) out.push_back(topo.sibling(node));
    return out;
}

// Lowers the rank of one link to 1, keeping the first stored value.
void collapse_link(IndexState& state, int id) {
    auto& link = state.link(id);
    link.upper.resize(1);
    if (!state.mirrored(id)) link.down.resize(1);
    link.frozen = true;
}

// Shrinks initial ranks, leaves first, until the cores fit the budget.
void fit_initial_build(IndexState& state, BuildPlanner& planner, const Oracle& oracle) {
    const auto& topo = state.topology();
    if (planner.cost(oracle) <= oracle.remaining()) return;
    std::vector<int> order;
    for (int pass = 0; pass < 2; ++pass)
        for (int id : topo.bottom_up())
            if (id != topo.root() && topo.node(id).active && topo.node(id).is_leaf() == (pass == 0))
                order.push_back(id);
    for (int id : order) {
        if (state.rank(id) <= 1 && (state.mirrored(id) || state.link(id).down.size() <= 1)) continue;
        collapse_link(state, id);
        const auto dirty = dirty_nodes(topo, id);
        planner.refresh(state, dirty);
        if (planner.cost(oracle) <= oracle.remaining()) return;
    }
    throw Error(Errc::infeasible_rank, "budget of " + std::to_string(oracle.budget()) +
                                           " cannot cover building the cores even at rank 1");
}

// Relative L2 error of a surrogate over every cached oracle value.
double cache_error(const HTTensor& surrogate, const Oracle& oracle) {
    double diff = 0.0, norm = 0.0;
    for (const auto& [index, value] : oracle.cache().entries()) {
        const double delta = surrogate.evaluate(index) - value;
        diff += delta * delta;
        norm += value * value;
    }
    if (!std::isfinite(diff)) return std::numeric_limits<double>::infinity();
    return norm > 0.0 ? std::sqrt(diff / norm) : std::sqrt(diff);
}

}  // namespace

int next_step(const TreeTopology& topo, int current, int previous, std::span<const long> counters, double alpha,
              Rng& rng) {
    const auto& n = topo.node(current);
    std::vector<int> candidates;
    if (!n.is_leaf())
        for (int child : n.children)
            if (topo.node(child).active && child != previous) candidates.push_back(child);
    if (n.parent >= 0 && n.parent != previous) candidates.push_back(n.parent);
    if (candidates.empty()) return previous;
    if (candidates.size() == 1) return candidates.front();

    const double m0 = component_mean(topo, current, candidates[0], counters);
    const double m1 = component_mean(topo, current, candidates[1], counters);
    if (std::abs(m0 - m1) <= alpha) return candidates[std::uniform_int_distribution<int>(0, 1)(rng)];
    return m0 < m1 ? candidates[0] : candidates[1];
}

// ---------------------------------------------------------------------------
// BuildPlanner

BuildPlanner::BuildPlanner(const IndexState& state) : keys_(static_cast<std::size_t>(state.topology().size())) {
    std::vector<int> all(keys_.size());
    for (std::size_t k = 0; k < all.size(); ++k) all[k] = static_cast<int>(k);
    refresh(state, all);
}

void BuildPlanner::refresh(const IndexState& state, std::span<const int> nodes) {
    for (int id : nodes) {
        auto& keys = keys_[static_cast<std::size_t>(id)];
        keys.clear();
        for (const auto& index : core_indices(state, id)) keys.push_back(hash_index(index));
    }
}

std::size_t BuildPlanner::cost(const Oracle& oracle) const { return cost_with(oracle, {}); }

std::size_t BuildPlanner::cost_with(const Oracle& oracle, const std::vector<MultiIndex>& extra) const {
    std::unordered_set<std::uint64_t> needed;
    for (const auto& keys : keys_)
        for (auto key : keys)
            if (!oracle.seen(key)) needed.insert(key);
    for (const auto& index : extra) {
        const auto key = hash_index(index);
        if (!oracle.seen(key)) needed.insert(key);
    }
    return needed.size();
}

// ---------------------------------------------------------------------------
// Sweep

SweepResult sweep(const TreeTopology& topology, Oracle& oracle, const SweepConfig& config) {
    if (config.dr < 0) throw Error(Errc::invalid_argument, "dr must be >= 0");
    if (!(config.eps >= 0.0)) throw Error(Errc::invalid_argument, "eps must be >= 0");
    if (topology.dim() != oracle.dim()) throw Error(Errc::invalid_dimension, "tree and oracle dimensions differ");

    Rng rng(config.seed);
    SweepResult result{IndexState::nested(topology, config.rank, rng), {}, {}, 0, "budget"};
    IndexState& state = result.state;
    const auto& topo = state.topology();

    std::optional<BuildPlanner> planner;
    if (config.reserve_build) {
        planner.emplace(state);
        fit_initial_build(state, *planner, oracle);
    }

    auto& visits = result.visits;
    visits.assign(static_cast<std::size_t>(topo.size()), 0);

    // Applies one update unless the build reserve forbids it. Returns false
    // once the budget runs out.
    const auto try_update = [&](int link, Direction direction, int dr, double bound) {
        const UpdateInputs inputs = gather_inputs(state, link, direction);
        if (config.freeze && state.link(link).frozen) dr = 0;
        if (config.max_rank > 0 && static_cast<int>(inputs.v.size()) >= config.max_rank) dr = 0;
        if (planner) {
            if (planner->cost_with(oracle, update_indices(inputs, oracle.dim())) > oracle.remaining()) return true;
        }
        const int sibling = topo.sibling(link);
        const LinkState saved_link = state.link(link);
        const LinkState saved_sibling = state.link(sibling);
        try {
            const UpdateResult update =
                bound > 0.0 ? check_index_values(oracle, inputs, state.upper_values(link), config.eps,
                                                 config.transform, bound)
                            : update_index_values(oracle, inputs, dr, config.eps, config.transform);
            apply_update(state, link, direction, update, rng);
            ++result.updates;
        } catch (const BudgetExhausted&) {
            return false;
        } catch (const Error& e) {
            if (e.code() != Errc::degenerate_block) throw;
        }
        if (planner) {
            const auto dirty = dirty_nodes(topo, link);
            planner->refresh(state, dirty);
            if (planner->cost(oracle) > oracle.remaining()) {
                state.link(link) = saved_link;
                state.link(sibling) = saved_sibling;
                planner->refresh(state, dirty);
            }
        }
        return true;
    };

    // Warm-up: one bottom-up pass over the upper values. Values that already
    // span the block are kept; the rest are replaced by a maxvol selection, so
    // later down-updates never see linearly dependent columns.
    for (int id : topo.bottom_up()) {
        if (id == topo.root() || !topo.node(id).active) continue;
        if (!try_update(id, Direction::up, 0, config.dominance)) return result;
    }

    int previous = topo.root();
    int current = topo.node(topo.root()).children[0];
    ++visits[current];
    result.path.push_back(current);

    const long idle_limit = 2L * std::max(1, topo.active_link_count());
    long idle = 0;
    while (oracle.remaining() > 0) {
        const int next = next_step(topo, current, previous, visits, config.alpha, rng);
        const bool downward = topo.node(next).parent == current;
        const std::size_t before = oracle.evaluations();
        if (!try_update(downward ? next : current, downward ? Direction::down : Direction::up, config.dr, 0.0)) break;

        previous = current;
        current = next;
        ++visits[current];
        result.path.push_back(current);

        if (oracle.evaluations() != before) {
            idle = 0;
        } else if (++idle > idle_limit) {
            result.stop_reason = oracle.remaining() == 0 ? "budget" : "stalled";
            break;
        }
    }

    return result;
}

CrossResult ht_cross(Oracle& oracle, const TreeTopology& topology, SweepConfig config) {
    config.transform = TransformKind::identity;
    config.reserve_build = true;
    CrossResult out{sweep(topology, oracle, config), {}};
    std::shared_ptr<const HTTensor> surrogate;
    double best_error = std::numeric_limits<double>::infinity();
    for (double bound : config.coefficient_bounds) {
        auto candidate = std::make_shared<const HTTensor>(build_cores(oracle, out.sweep.state, bound));
        const double error = cache_error(*candidate, oracle);
        if (!surrogate || error < best_error) {
            surrogate = std::move(candidate);
            best_error = error;
        }
    }

    RunReport& report = out.report;
    report.mode = "approx";
    report.evaluations = oracle.evaluations();
    report.best_index = oracle.best_min().index;
    report.best_value = oracle.best_min().value;
    report.trace = best_so_far_trace(oracle.history(), Goal::min);
    report.updates = out.sweep.updates;
    report.stop_reason = out.sweep.stop_reason;
    report.surrogate = std::move(surrogate);
    return out;
}

RunReport ht_opt(Oracle& oracle, const TreeTopology& topology, SweepConfig config, Goal goal) {
    config.transform = goal == Goal::min ? TransformKind::exp_min : TransformKind::exp_max;
    config.reserve_build = false;
    const SweepResult result = sweep(topology, oracle, config);

    RunReport report;
    report.mode = "opt";
    report.evaluations = oracle.evaluations();
    const Extremum& best = goal == Goal::min ? oracle.best_min() : oracle.best_max();
    report.best_index = best.index;
    report.best_value = best.value;
    report.trace = best_so_far_trace(oracle.history(), goal);
    report.updates = result.updates;
    report.stop_reason = result.stop_reason;
    return report;
}

}  // namespace htbb
