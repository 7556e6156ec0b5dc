#include "htbb/ht_tree.hpp"

#include <algorithm>
#include <fstream>
#include <queue>
#include <sstream>

#include "json.hpp"

#include "htbb/errors.hpp"

namespace htbb {

namespace {

using json = nlohmann::json;

void require(bool condition, Errc code, const std::string& message) {
    if (!condition) throw Error(code, message);
}

}  // namespace

// ---------------------------------------------------------------------------
// TreeTopology

TreeTopology::TreeTopology(std::vector<TreeNode> nodes, int root, std::vector<int> mode_sizes)
    : nodes_(std::move(nodes)), root_(root), mode_sizes_(std::move(mode_sizes)) {
    finalize();
}

TreeTopology TreeTopology::balanced(std::vector<int> mode_sizes) {
    const int d = static_cast<int>(mode_sizes.size());
    require(d >= 2, Errc::invalid_dimension, "tree needs at least 2 modes, got " + std::to_string(d));
    int leaves = 1;
    while (leaves < d) leaves *= 2;

    // Heap layout: node k has children 2k+1 and 2k+2, leaves occupy the tail.
    std::vector<TreeNode> nodes(static_cast<std::size_t>(2 * leaves - 1));
    for (int k = 0; k < leaves - 1; ++k) {
        nodes[k].children = {2 * k + 1, 2 * k + 2};
        nodes[2 * k + 1].parent = k;
        nodes[2 * k + 2].parent = k;
    }
    for (int i = 0; i < leaves; ++i) nodes[leaves - 1 + i].mode = i < d ? i : -1;
    return TreeTopology(std::move(nodes), 0, std::move(mode_sizes));
}

void TreeTopology::finalize() {
    const int n = size();
    const int d = dim();
    require(d >= 2, Errc::invalid_dimension, "tree needs at least 2 modes, got " + std::to_string(d));
    for (int size : mode_sizes_) require(size >= 1, Errc::invalid_argument, "mode sizes must be >= 1");
    require(root_ >= 0 && root_ < n, Errc::invalid_argument, "root id out of range");
    require(nodes_[root_].parent == -1, Errc::invalid_argument, "root must not have a parent");

    // Breadth-first walk from the root: checks the 0-or-2 children rule,
    // parent back-links, reachability and acyclicity in one pass.
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<int> order;
    order.reserve(static_cast<std::size_t>(n));
    std::queue<int> queue;
    queue.push(root_);
    seen[root_] = 1;
    nodes_[root_].level = 1;
    depth_ = 1;
    while (!queue.empty()) {
        const int id = queue.front();
        queue.pop();
        order.push_back(id);
        auto& node = nodes_[id];
        const auto [left, right] = node.children;
        require((left < 0) == (right < 0), Errc::invalid_argument,
                "node " + std::to_string(id) + " must have 0 or 2 children");
        if (left < 0) continue;
        for (int child : node.children) {
            require(child >= 0 && child < n, Errc::invalid_argument, "child id out of range");
            require(!seen[child], Errc::invalid_argument, "tree contains a cycle or shared child");
            require(nodes_[child].parent == id, Errc::invalid_argument,
                    "node " + std::to_string(child) + " has an inconsistent parent link");
            seen[child] = 1;
            nodes_[child].level = node.level + 1;
            depth_ = std::max(depth_, node.level + 1);
            queue.push(child);
        }
    }
    require(static_cast<int>(order.size()) == n, Errc::invalid_argument, "tree has unreachable nodes");

    leaf_of_mode_.assign(static_cast<std::size_t>(d), -1);
    bottom_up_.assign(order.rbegin(), order.rend());
    for (int id : bottom_up_) {
        auto& node = nodes_[id];
        if (node.is_leaf()) {
            if (node.mode >= 0) {
                require(node.mode < d, Errc::invalid_argument, "leaf mode out of range");
                require(leaf_of_mode_[node.mode] < 0, Errc::invalid_argument,
                        "mode " + std::to_string(node.mode) + " mapped to two leaves");
                leaf_of_mode_[node.mode] = id;
            }
            node.active = node.mode >= 0;
        } else {
            node.mode = -1;
            node.active = nodes_[node.children[0]].active || nodes_[node.children[1]].active;
        }
    }
    for (int mode = 0; mode < d; ++mode)
        require(leaf_of_mode_[mode] >= 0, Errc::invalid_argument,
                "mode " + std::to_string(mode) + " has no leaf");
    // Both root children must carry modes, otherwise the root link is empty.
    if (!nodes_[root_].is_leaf()) {
        for (int child : nodes_[root_].children)
            require(nodes_[child].active, Errc::invalid_argument, "root children must both be active");
    }
    active_links_ = 0;
    for (int id = 0; id < n; ++id)
        if (id != root_ && nodes_[id].active) ++active_links_;
}

int TreeTopology::extent(int id) const {
    const auto& n = node(id);
    if (!n.is_leaf()) throw Error(Errc::invalid_argument, "extent() is defined for leaves only");
    return n.mode >= 0 ? mode_sizes_[n.mode] : 1;
}

std::vector<int> TreeTopology::level_widths() const {
    std::vector<int> widths(static_cast<std::size_t>(depth_), 0);
    for (const auto& n : nodes_) ++widths[n.level - 1];
    return widths;
}

std::vector<int> TreeTopology::upper_modes(int id) const {
    std::vector<int> modes;
    std::vector<int> stack{id};
    while (!stack.empty()) {
        const int current = stack.back();
        stack.pop_back();
        const auto& n = node(current);
        if (n.is_leaf()) {
            if (n.mode >= 0) modes.push_back(n.mode);
        } else {
            stack.push_back(n.children[0]);
            stack.push_back(n.children[1]);
        }
    }
    std::sort(modes.begin(), modes.end());
    return modes;
}

int TreeTopology::sibling(int id) const {
    const int parent = node(id).parent;
    if (parent < 0) throw Error(Errc::no_root_link, "the root has no sibling");
    const auto& children = nodes_[parent].children;
    return children[0] == id ? children[1] : children[0];
}

bool TreeTopology::in_subtree(int ancestor, int id) const {
    for (int current = id; current >= 0; current = nodes_[current].parent)
        if (current == ancestor) return true;
    return false;
}

// ---------------------------------------------------------------------------
// Core / HTTensor

Core::Core(std::vector<std::size_t> dims) : shape(std::move(dims)) {
    std::size_t total = 1;
    for (auto extent : shape) total *= extent;
    values.assign(total, 0.0);
}

std::size_t capped_volume(std::span<const int> mode_sizes, std::size_t cap) {
    std::size_t total = 1;
    for (int size : mode_sizes) {
        if (size <= 0) return 0;
        if (total > cap / static_cast<std::size_t>(size)) return cap + 1;
        total *= static_cast<std::size_t>(size);
    }
    return total;
}

HTTensor::HTTensor(TreeTopology topology, std::vector<Core> cores)
    : topology_(std::move(topology)), cores_(std::move(cores)) {
    check_shapes();
    offsets_.assign(cores_.size(), 0);
    for (int id : topology_.bottom_up()) {
        offsets_[id] = work_size_;
        work_size_ += static_cast<std::size_t>(rank(id));
        const auto& shape = cores_[id].shape;
        if (shape.size() == 3) tmp_size_ = std::max(tmp_size_, shape[1] * shape[2]);
    }
}

int HTTensor::rank(int id) const {
    const auto& shape = core(id).shape;
    if (id == topology_.root()) return 1;
    return static_cast<int>(shape.size() == 2 ? shape[0] : shape[1]);
}

void HTTensor::check_shapes() const {
    const auto fail = [](int id, const std::string& why) {
        throw Error(Errc::inconsistent_cores, "core " + std::to_string(id) + ": " + why);
    };
    if (static_cast<int>(cores_.size()) != topology_.size()) {
        throw Error(Errc::inconsistent_cores, "expected " + std::to_string(topology_.size()) +
                                                  " cores, got " + std::to_string(cores_.size()));
    }
    for (int id = 0; id < topology_.size(); ++id) {
        const auto& core = cores_[id];
        const auto& node = topology_.node(id);
        std::size_t total = 1;
        for (auto extent : core.shape) total *= extent;
        if (total != core.values.size()) fail(id, "value count does not match shape");
        if (node.is_leaf()) {
            if (core.shape.size() != 2) fail(id, "leaf cores must be 2-way");
            if (core.shape[1] != static_cast<std::size_t>(topology_.extent(id))) fail(id, "leaf width != mode size");
            if (core.shape[0] == 0) fail(id, "zero rank");
            continue;
        }
        if (core.shape.size() != 3) fail(id, "inner cores must be 3-way");
        if (id == topology_.root() && core.shape[1] != 1) fail(id, "root middle dimension must be 1");
        for (int side = 0; side < 2; ++side) {
            const int child = node.children[side];
            const auto& cshape = cores_[child].shape;
            const std::size_t child_rank = cshape.size() == 2 ? cshape[0] : (cshape.size() == 3 ? cshape[1] : 0);
            if (core.shape[side == 0 ? 0 : 2] != child_rank) fail(id, "rank mismatch with child " + std::to_string(child));
        }
    }
}

double HTTensor::contract(std::span<const int> index, std::vector<double>& work, std::vector<double>& tmp) const {
    for (int id : topology_.bottom_up()) {
        const auto& node = topology_.node(id);
        const auto& core = cores_[id];
        double* out = work.data() + offsets_[id];
        if (node.is_leaf()) {
            const std::size_t column = node.mode >= 0 ? static_cast<std::size_t>(index[node.mode]) : 0;
            for (std::size_t a = 0; a < core.shape[0]; ++a) out[a] = core(a, column);
            continue;
        }
        const std::size_t r1 = core.shape[0], r = core.shape[1], r2 = core.shape[2];
        const double* b1 = work.data() + offsets_[node.children[0]];
        const double* b2 = work.data() + offsets_[node.children[1]];
        // Child-1 index first, then child-2: fixed order keeps results reproducible.
        std::fill(tmp.begin(), tmp.begin() + static_cast<std::ptrdiff_t>(r * r2), 0.0);
        for (std::size_t i = 0; i < r1; ++i) {
            const double weight = b1[i];
            const double* slab = core.values.data() + i * r * r2;
            for (std::size_t mk = 0; mk < r * r2; ++mk) tmp[mk] += slab[mk] * weight;
        }
        for (std::size_t m = 0; m < r; ++m) {
            double acc = 0.0;
            for (std::size_t k = 0; k < r2; ++k) acc += tmp[m * r2 + k] * b2[k];
            out[m] = acc;
        }
    }
    return work[offsets_[topology_.root()]];
}

double HTTensor::evaluate(std::span<const int> index) const {
    const auto sizes = topology_.mode_sizes();
    if (index.size() != sizes.size()) {
        throw Error(Errc::invalid_argument, "index has length " + std::to_string(index.size()) +
                                                ", tensor dimension is " + std::to_string(sizes.size()));
    }
    for (std::size_t k = 0; k < index.size(); ++k) {
        if (index[k] < 0 || index[k] >= sizes[k])
            throw Error(Errc::invalid_argument, "index entry " + std::to_string(k) + " out of range");
    }
    std::vector<double> work(work_size_), tmp(tmp_size_);
    return contract(index, work, tmp);
}

std::vector<double> HTTensor::evaluate_batch(std::span<const MultiIndex> indices) const {
    std::vector<double> values;
    values.reserve(indices.size());
    for (const auto& index : indices) values.push_back(evaluate(index));
    return values;
}

std::vector<double> HTTensor::materialize(std::size_t cap) const {
    const auto sizes = topology_.mode_sizes();
    const std::size_t total = capped_volume(sizes, cap);
    if (total > cap) throw Error(Errc::too_large, "tensor has more than " + std::to_string(cap) + " entries");

    std::vector<double> dense(total);
    std::vector<double> work(work_size_), tmp(tmp_size_);
    MultiIndex index(sizes.size(), 0);
    for (std::size_t flat = 0; flat < total; ++flat) {
        dense[flat] = contract(index, work, tmp);
        for (int k = static_cast<int>(index.size()) - 1; k >= 0; --k) {
            if (++index[k] < sizes[k]) break;
            index[k] = 0;
        }
    }
    return dense;
}

// ---------------------------------------------------------------------------
// Serialization

std::string HTTensor::to_json() const {
    json doc;
    doc["format"] = "htbb.ht";
    doc["version"] = 1;
    doc["d"] = topology_.dim();
    doc["mode_sizes"] = std::vector<int>(topology_.mode_sizes().begin(), topology_.mode_sizes().end());
    doc["root"] = topology_.root();
    doc["leaf_order"] = std::vector<int>(topology_.leaf_order().begin(), topology_.leaf_order().end());
    json nodes = json::array();
    for (const auto& node : topology_.nodes()) {
        nodes.push_back({{"parent", node.parent},
                         {"children", std::vector<int>{node.children[0], node.children[1]}},
                         {"mode", node.mode}});
    }
    doc["nodes"] = std::move(nodes);
    json cores = json::array();
    for (const auto& core : cores_) cores.push_back({{"shape", core.shape}, {"values", core.values}});
    doc["cores"] = std::move(cores);
    return doc.dump();
}

HTTensor HTTensor::from_json(std::string_view text) {
    try {
        const json doc = json::parse(text);
        if (doc.at("format").get<std::string>() != "htbb.ht")
            throw Error(Errc::parse_error, "not an htbb.ht document");
        auto mode_sizes = doc.at("mode_sizes").get<std::vector<int>>();
        if (doc.at("d").get<int>() != static_cast<int>(mode_sizes.size()))
            throw Error(Errc::parse_error, "header d does not match mode_sizes");
        std::vector<TreeNode> nodes;
        for (const auto& entry : doc.at("nodes")) {
            TreeNode node;
            node.parent = entry.at("parent").get<int>();
            const auto children = entry.at("children").get<std::vector<int>>();
            if (children.size() != 2) throw Error(Errc::parse_error, "children must have 2 entries");
            node.children = {children[0], children[1]};
            node.mode = entry.at("mode").get<int>();
            nodes.push_back(node);
        }
        TreeTopology topology(std::move(nodes), doc.at("root").get<int>(), std::move(mode_sizes));
        const auto leaf_order = doc.at("leaf_order").get<std::vector<int>>();
        if (!std::equal(leaf_order.begin(), leaf_order.end(), topology.leaf_order().begin(),
                        topology.leaf_order().end()))
            throw Error(Errc::parse_error, "leaf_order does not match the tree");
        std::vector<Core> cores;
        for (const auto& entry : doc.at("cores")) {
            Core core;
            core.shape = entry.at("shape").get<std::vector<std::size_t>>();
            core.values = entry.at("values").get<std::vector<double>>();
            cores.push_back(std::move(core));
        }
        return HTTensor(std::move(topology), std::move(cores));
    } catch (const json::exception& e) {
        throw Error(Errc::parse_error, e.what());
    }
}

void HTTensor::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw Error(Errc::invalid_argument, "cannot write " + path.string());
    out << to_json() << '\n';
}

HTTensor HTTensor::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::invalid_argument, "cannot read " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return from_json(buffer.str());
}

}  // namespace htbb
