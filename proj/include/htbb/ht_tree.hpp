#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace htbb {

/// Zero-based tensor multi-index; entry k lies in [0, N_k).
using MultiIndex = std::vector<int>;

struct TreeNode {
    int parent = -1;
    std::array<int, 2> children{-1, -1};
    int level = 1;  // root is level 1
    int mode = -1;  // tensor mode of an active leaf, -1 otherwise
    bool active = true;

    [[nodiscard]] bool is_leaf() const noexcept { return children[0] < 0; }
};

/// Binary dimension tree of a hierarchical Tucker tensor.
///
/// Every node has 0 or 2 children. Active leaves map one-to-one onto the
/// tensor modes; inactive leaves pad the tree to a balanced shape and behave
/// as modes of size 1 joined through rank-1 links. An inner node is active
/// when at least one of its children is.
class TreeTopology {
public:
    /// Builds a topology from explicit nodes. Levels and activity flags are
    /// recomputed from the structure; the remaining fields are validated.
    TreeTopology(std::vector<TreeNode> nodes, int root, std::vector<int> mode_sizes);

    /// Balanced tree over 2^ceil(log2 d) leaves; leaves beyond d are inactive.
    static TreeTopology balanced(std::vector<int> mode_sizes);

    [[nodiscard]] int dim() const noexcept { return static_cast<int>(mode_sizes_.size()); }
    [[nodiscard]] int root() const noexcept { return root_; }
    [[nodiscard]] int size() const noexcept { return static_cast<int>(nodes_.size()); }
    [[nodiscard]] const TreeNode& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }
    [[nodiscard]] std::span<const TreeNode> nodes() const noexcept { return nodes_; }
    [[nodiscard]] std::span<const int> mode_sizes() const noexcept { return mode_sizes_; }
    [[nodiscard]] int mode_size(int mode) const { return mode_sizes_.at(static_cast<std::size_t>(mode)); }

    /// Size of the physical index carried by a leaf (1 for inactive leaves).
    [[nodiscard]] int extent(int id) const;

    /// Depth L of the tree (the root alone has depth 1).
    [[nodiscard]] int depth() const noexcept { return depth_; }

    /// Number of nodes per level, lambda_1 .. lambda_L.
    [[nodiscard]] std::vector<int> level_widths() const;

    /// Leaf node id of each mode.
    [[nodiscard]] std::span<const int> leaf_order() const noexcept { return leaf_of_mode_; }

    /// Node ids ordered so that children precede parents.
    [[nodiscard]] std::span<const int> bottom_up() const noexcept { return bottom_up_; }

    /// Sorted modes below a node.
    [[nodiscard]] std::vector<int> upper_modes(int id) const;

    [[nodiscard]] int sibling(int id) const;
    [[nodiscard]] bool in_subtree(int ancestor, int id) const;

    /// Active non-root nodes, i.e. the links the sweep can traverse.
    [[nodiscard]] int active_link_count() const noexcept { return active_links_; }

private:
    void finalize();

    std::vector<TreeNode> nodes_;
    int root_ = 0;
    std::vector<int> mode_sizes_;
    std::vector<int> leaf_of_mode_;
    std::vector<int> bottom_up_;
    int depth_ = 1;
    int active_links_ = 0;
};

/// Dense per-node array, row-major. Leaves hold (r x N); inner nodes hold
/// (r_left x r x r_right); the root holds (r_left x 1 x r_right).
struct Core {
    std::vector<std::size_t> shape;
    std::vector<double> values;

    Core() = default;
    explicit Core(std::vector<std::size_t> dims);

    [[nodiscard]] std::size_t size() const noexcept { return values.size(); }

    double& operator()(std::size_t i, std::size_t j) { return values[i * shape[1] + j]; }
    double operator()(std::size_t i, std::size_t j) const { return values[i * shape[1] + j]; }
    double& operator()(std::size_t i, std::size_t j, std::size_t k) {
        return values[(i * shape[1] + j) * shape[2] + k];
    }
    double operator()(std::size_t i, std::size_t j, std::size_t k) const {
        return values[(i * shape[1] + j) * shape[2] + k];
    }
};

/// A hierarchical Tucker tensor: topology plus one core per node.
/// Immutable after construction, so evaluation is safe from several threads.
class HTTensor {
public:
    static constexpr std::size_t default_materialize_cap = 1'000'000;

    HTTensor(TreeTopology topology, std::vector<Core> cores);

    [[nodiscard]] const TreeTopology& topology() const noexcept { return topology_; }
    [[nodiscard]] const Core& core(int id) const { return cores_.at(static_cast<std::size_t>(id)); }
    [[nodiscard]] std::span<const Core> cores() const noexcept { return cores_; }

    /// Rank of the link between a node and its parent (1 for the root).
    [[nodiscard]] int rank(int id) const;

    [[nodiscard]] double evaluate(std::span<const int> index) const;
    [[nodiscard]] std::vector<double> evaluate_batch(std::span<const MultiIndex> indices) const;

    /// Full tensor in row-major order (last mode fastest).
    [[nodiscard]] std::vector<double> materialize(std::size_t cap = default_materialize_cap) const;

    [[nodiscard]] std::string to_json() const;
    static HTTensor from_json(std::string_view text);
    void save(const std::filesystem::path& path) const;
    static HTTensor load(const std::filesystem::path& path);

private:
    void check_shapes() const;
    double contract(std::span<const int> index, std::vector<double>& work, std::vector<double>& tmp) const;

    TreeTopology topology_;
    std::vector<Core> cores_;
    std::vector<std::size_t> offsets_;  // per-node slot in the contraction workspace
    std::size_t work_size_ = 0;
    std::size_t tmp_size_ = 0;
};

/// Product of mode sizes, or `cap + 1` once it exceeds `cap`.
std::size_t capped_volume(std::span<const int> mode_sizes, std::size_t cap);

}  // namespace htbb
