#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "htbb/ht_tree.hpp"
#include "htbb/maxvol.hpp"
#include "htbb/oracle.hpp"

namespace htbb {

using Rng = std::mt19937_64;

enum class Direction { up, down };

/// Index sets and selected values for the link between a node and its parent.
/// Value vectors list their entries in ascending mode order of the set.
struct LinkState {
    std::vector<int> upper_set;
    std::vector<int> down_set;
    std::vector<MultiIndex> upper;
    std::vector<MultiIndex> down;
    bool frozen = false;  // rank growth disabled after a truncation
};

/// Per-link index state of a tree.
///
/// The two children of the root share one link: the down values of one are
/// the upper values of the other, so only upper values are stored there.
/// Inactive nodes carry an empty upper set with a single empty value.
class IndexState {
public:
    /// Index sets only; all value lists empty.
    explicit IndexState(TreeTopology topology);

    /// Nested start: r0 random grid points p_1..p_r0 with distinct entries in
    /// every mode; each link stores the restrictions of the p_k to its sets.
    static IndexState nested(TreeTopology topology, int r0, Rng& rng);

    [[nodiscard]] const TreeTopology& topology() const noexcept { return topology_; }
    [[nodiscard]] const LinkState& link(int id) const;
    LinkState& link(int id);

    /// True for the two children of the root.
    [[nodiscard]] bool mirrored(int id) const;

    [[nodiscard]] const std::vector<MultiIndex>& upper_values(int id) const;
    [[nodiscard]] const std::vector<MultiIndex>& down_values(int id) const;
    [[nodiscard]] const std::vector<int>& down_set(int id) const { return link(id).down_set; }
    [[nodiscard]] const std::vector<int>& upper_set(int id) const { return link(id).upper_set; }

    /// Number of stored upper values of a link.
    [[nodiscard]] int rank(int id) const { return static_cast<int>(upper_values(id).size()); }

    /// Throws inconsistent_cores on any violated set or value invariant.
    void validate() const;

private:
    TreeTopology topology_;
    std::vector<LinkState> links_;
    std::vector<MultiIndex> empty_values_{MultiIndex{}};
};

/// Per-link upper and down mode sets.
std::vector<LinkState> init_index_sets(const TreeTopology& topology);

/// Inputs of one update: columns come from (i, v), rows from (i1, v1) x (i2, v2).
struct UpdateInputs {
    std::vector<int> i, i1, i2;
    std::vector<MultiIndex> v, v1, v2;
};

UpdateInputs gather_inputs(const IndexState& state, int node, Direction direction);

enum class TransformKind { identity, exp_min, exp_max };

/// Adaptive pointwise transform; mean and population std are re-estimated
/// on every call, and sigma falls back to 1 for a constant batch.
void apply_transform(TransformKind kind, Matrix& values);

struct UpdateResult {
    std::vector<int> set;             // sorted union i1 + i2
    std::vector<MultiIndex> values;   // selected vectors over `set`
    std::vector<int> column_order;    // pivot order of the columns (entries of v)
    int r_eps = 0;
    bool truncated = false;
};

/// Fills the (r1 r2) x r value matrix, transforms it and selects rows by
/// pivoted QR, rank truncation at eps and rectangular maxvol.
UpdateResult update_index_values(Oracle& oracle, const UpdateInputs& inputs, int dr, double eps,
                                 TransformKind transform);

/// Like update_index_values without growth, but returns `current` unchanged
/// when the block is not truncated, the rows of `current` have full
/// numerical rank and every row of Q is expressed through them with
/// coefficients of magnitude at most `bound`.
UpdateResult check_index_values(Oracle& oracle, const UpdateInputs& inputs, const std::vector<MultiIndex>& current,
                                double eps, TransformKind transform, double bound);

/// The multi-indices that form the value matrix of an update, row-major.
std::vector<MultiIndex> update_indices(const UpdateInputs& inputs, int dim);

/// Writes an update into the state. The counterpart list of the same link
/// follows the new size: truncated in pivot order or extended at random.
void apply_update(IndexState& state, int node, Direction direction, const UpdateResult& result, Rng& rng);

}  // namespace htbb
