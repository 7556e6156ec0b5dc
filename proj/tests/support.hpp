#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <vector>

#include "htbb/ht_tree.hpp"

namespace htbb::testing {

using Rng = std::mt19937_64;

/// Random binary tree over `d` modes: the shuffled mode list is split
/// recursively at a random point, so shapes range from caterpillars to
/// balanced trees.
inline TreeTopology random_topology(std::vector<int> sizes, Rng& rng) {
    const int d = static_cast<int>(sizes.size());
    std::vector<int> modes(static_cast<std::size_t>(d));
    std::iota(modes.begin(), modes.end(), 0);
    std::shuffle(modes.begin(), modes.end(), rng);

    std::vector<TreeNode> nodes;
    std::function<int(int, int, int)> grow = [&](int lo, int hi, int parent) {
        const int id = static_cast<int>(nodes.size());
        nodes.emplace_back();
        nodes[id].parent = parent;
        if (hi - lo == 1) {
            nodes[id].mode = modes[lo];
            return id;
        }
        const int cut = std::uniform_int_distribution<int>(lo + 1, hi - 1)(rng);
        const int left = grow(lo, cut, id);
        const int right = grow(cut, hi, id);
        nodes[id].children = {left, right};
        return id;
    };
    grow(0, d, -1);
    return TreeTopology(std::move(nodes), 0, std::move(sizes));
}

/// Random cores with each active link rank drawn from [1, max_rank].
inline std::vector<Core> random_cores(const TreeTopology& topo, int max_rank, Rng& rng) {
    std::vector<int> rank(static_cast<std::size_t>(topo.size()), 1);
    std::uniform_int_distribution<int> pick(1, max_rank);
    for (int id = 0; id < topo.size(); ++id)
        if (id != topo.root() && topo.node(id).active) rank[id] = pick(rng);

    std::normal_distribution<double> normal;
    std::vector<Core> cores(static_cast<std::size_t>(topo.size()));
    for (int id = 0; id < topo.size(); ++id) {
        const auto& n = topo.node(id);
        const auto r = static_cast<std::size_t>(rank[id]);
        if (n.is_leaf()) {
            cores[id] = Core({r, static_cast<std::size_t>(topo.extent(id))});
        } else {
            cores[id] = Core({static_cast<std::size_t>(rank[n.children[0]]), r,
                              static_cast<std::size_t>(rank[n.children[1]])});
        }
        for (double& v : cores[id].values) v = n.active ? normal(rng) : 1.0;
    }
    return cores;
}

/// Dense tensor by explicit summation, last mode fastest. Each node is
/// expanded into a table over (assignment of its subtree modes, rank index);
/// the root table is the tensor.
inline std::vector<double> brute_force(const TreeTopology& topo, const std::vector<Core>& cores) {
    const int d = topo.dim();
    struct Table {
        std::vector<int> modes;
        std::map<std::vector<int>, std::vector<double>> rows;  // assignment -> rank vector
    };
    std::vector<Table> tables(static_cast<std::size_t>(topo.size()));
    for (int id : topo.bottom_up()) {
        const auto& n = topo.node(id);
        const Core& g = cores[id];
        Table& t = tables[id];
        if (n.is_leaf()) {
            const std::size_t r = g.shape[0];
            if (n.mode >= 0) t.modes = {n.mode};
            for (int i = 0; i < topo.extent(id); ++i) {
                std::vector<double> b(r);
                for (std::size_t a = 0; a < r; ++a) b[a] = g.values[a * g.shape[1] + i];
                t.rows[n.mode >= 0 ? std::vector<int>{i} : std::vector<int>{}] = b;
            }
            continue;
        }
        const Table& t1 = tables[n.children[0]];
        const Table& t2 = tables[n.children[1]];
        t.modes = t1.modes;
        t.modes.insert(t.modes.end(), t2.modes.begin(), t2.modes.end());
        const std::size_t r1 = g.shape[0], r = g.shape[1], r2 = g.shape[2];
        for (const auto& [key1, b1] : t1.rows)
            for (const auto& [key2, b2] : t2.rows) {
                std::vector<double> b(r, 0.0);
                for (std::size_t m = 0; m < r; ++m)
                    for (std::size_t i = 0; i < r1; ++i)
                        for (std::size_t k = 0; k < r2; ++k)
                            b[m] += g.values[(i * r + m) * r2 + k] * b1[i] * b2[k];
                std::vector<int> key = key1;
                key.insert(key.end(), key2.begin(), key2.end());
                t.rows[key] = b;
            }
    }

    const Table& root = tables[topo.root()];
    std::size_t total = 1;
    for (int size : topo.mode_sizes()) total *= static_cast<std::size_t>(size);
    std::vector<double> dense(total, 0.0);
    for (const auto& [key, b] : root.rows) {
        std::vector<int> index(static_cast<std::size_t>(d));
        for (std::size_t k = 0; k < key.size(); ++k) index[root.modes[k]] = key[k];
        std::size_t flat = 0;
        for (int mode = 0; mode < d; ++mode) flat = flat * topo.mode_size(mode) + index[mode];
        dense[flat] = b[0];
    }
    return dense;
}

/// Every multi-index of the grid, last mode fastest.
inline std::vector<MultiIndex> all_indices(std::span<const int> sizes) {
    std::vector<MultiIndex> out;
    MultiIndex index(sizes.size(), 0);
    while (true) {
        out.push_back(index);
        int mode = static_cast<int>(sizes.size()) - 1;
        while (mode >= 0 && ++index[mode] == sizes[mode]) index[mode--] = 0;
        if (mode < 0) return out;
    }
}

}  // namespace htbb::testing
