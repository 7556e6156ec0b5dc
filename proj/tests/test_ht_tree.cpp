#include <gtest/gtest.h>

#include <cmath>

#include "htbb/errors.hpp"
#include "htbb/ht_tree.hpp"
#include "support.hpp"

using namespace htbb;
using htbb::testing::all_indices;
using htbb::testing::brute_force;
using htbb::testing::random_cores;
using htbb::testing::random_topology;

namespace {

HTTensor constant_tensor(const TreeTopology& topo, double root, double leaf) {
    std::vector<Core> cores(static_cast<std::size_t>(topo.size()));
    for (int id = 0; id < topo.size(); ++id) {
        const auto& n = topo.node(id);
        cores[id] = n.is_leaf() ? Core({1, static_cast<std::size_t>(topo.extent(id))}) : Core({1, 1, 1});
        const double fill = id == topo.root() ? root : (n.is_leaf() && n.active ? leaf : 1.0);
        cores[id].values.assign(cores[id].size(), fill);
    }
    return HTTensor(topo, std::move(cores));
}

int count_inactive_leaves(const TreeTopology& topo) {
    int count = 0;
    for (const auto& n : topo.nodes()) count += n.is_leaf() && !n.active;
    return count;
}

}  // namespace

TEST(Topology, BalancedFourModes) {
    const auto topo = TreeTopology::balanced({2, 2, 2, 2});
    EXPECT_EQ(topo.depth(), 3);
    EXPECT_EQ(topo.level_widths(), (std::vector<int>{1, 2, 4}));
    EXPECT_EQ(count_inactive_leaves(topo), 0);
    EXPECT_EQ(topo.active_link_count(), 6);
}

TEST(Topology, FiveModesPadToEightLeaves) {
    const auto topo = TreeTopology::balanced({3, 3, 3, 3, 3});
    EXPECT_EQ(topo.level_widths(), (std::vector<int>{1, 2, 4, 8}));
    EXPECT_EQ(count_inactive_leaves(topo), 3);
    for (int mode = 0; mode < 5; ++mode) EXPECT_TRUE(topo.node(topo.leaf_order()[mode]).active);
    for (const auto& n : topo.nodes())
        if (n.is_leaf() && !n.active) EXPECT_EQ(n.mode, -1);
}

TEST(Topology, TwoModes) {
    const auto topo = TreeTopology::balanced({4, 5});
    EXPECT_EQ(topo.depth(), 2);
    EXPECT_EQ(topo.size(), 3);
    EXPECT_EQ(topo.extent(topo.leaf_order()[1]), 5);
}

TEST(Topology, RejectsSingleMode) {
    try {
        TreeTopology::balanced({4});
        FAIL() << "expected invalid_dimension";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::invalid_dimension);
    }
}

TEST(Topology, RejectsNodeWithOneChild) {
    std::vector<TreeNode> nodes(3);
    nodes[0].children = {1, -1};
    nodes[1].parent = 0;
    nodes[1].mode = 0;
    nodes[2].mode = 1;
    EXPECT_THROW(TreeTopology(nodes, 0, {2, 2}), Error);
}

TEST(Topology, LeafOrderIsBijection) {
    htbb::testing::Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const auto topo = random_topology(std::vector<int>(6, 2), rng);
        std::vector<int> seen(6, 0);
        for (int mode = 0; mode < 6; ++mode) {
            const auto& leaf = topo.node(topo.leaf_order()[mode]);
            ASSERT_TRUE(leaf.is_leaf());
            ++seen[leaf.mode];
        }
        EXPECT_EQ(seen, std::vector<int>(6, 1));
    }
}

TEST(Evaluate, AllOnes) {
    const auto t = constant_tensor(TreeTopology::balanced({3, 4}), 1.0, 1.0);
    for (const auto& index : all_indices(t.topology().mode_sizes())) EXPECT_EQ(t.evaluate(index), 1.0);
}

TEST(Evaluate, ScalarProduct) {
    const auto topo = TreeTopology::balanced({2, 3});
    std::vector<Core> cores(3);
    cores[0] = Core({1, 1, 1});
    cores[0].values = {2.0};
    cores[1] = Core({1, 2});
    cores[1].values = {3.0, 3.0};
    cores[2] = Core({1, 3});
    cores[2].values = {5.0, 5.0, 5.0};
    const HTTensor t(topo, cores);
    for (const auto& index : all_indices(topo.mode_sizes())) EXPECT_DOUBLE_EQ(t.evaluate(index), 30.0);
}

TEST(Evaluate, MatchesBruteForceOnFourModes) {
    htbb::testing::Rng rng(11);
    const auto topo = TreeTopology::balanced({3, 3, 3, 3});
    const auto cores = random_cores(topo, 3, rng);
    const HTTensor t(topo, cores);
    const auto truth = brute_force(topo, cores);
    const auto indices = all_indices(topo.mode_sizes());
    ASSERT_EQ(indices.size(), 81u);
    for (std::size_t k = 0; k < indices.size(); ++k) EXPECT_NEAR(t.evaluate(indices[k]), truth[k], 1e-12);
}

TEST(Evaluate, MatchesBruteForceOnPaddedTree) {
    htbb::testing::Rng rng(3);
    const auto topo = TreeTopology::balanced({2, 3, 2, 4, 2});
    const auto cores = random_cores(topo, 4, rng);
    const HTTensor t(topo, cores);
    const auto truth = brute_force(topo, cores);
    const auto indices = all_indices(topo.mode_sizes());
    for (std::size_t k = 0; k < indices.size(); ++k) EXPECT_NEAR(t.evaluate(indices[k]), truth[k], 1e-12);
}

TEST(Evaluate, MultilinearInEachCore) {
    htbb::testing::Rng rng(5);
    const auto topo = random_topology({3, 2, 4, 3}, rng);
    const auto cores = random_cores(topo, 3, rng);
    const HTTensor base(topo, cores);
    for (int id = 0; id < topo.size(); ++id) {
        auto scaled = cores;
        for (double& v : scaled[id].values) v *= 2.0;
        const HTTensor t(topo, scaled);
        for (const auto& index : all_indices(topo.mode_sizes()))
            EXPECT_NEAR(t.evaluate(index), 2.0 * base.evaluate(index), 1e-12);
    }
}

TEST(Evaluate, RejectsInconsistentShapes) {
    const auto topo = TreeTopology::balanced({2, 2});
    std::vector<Core> cores{Core({2, 1, 1}), Core({1, 2}), Core({1, 2})};
    try {
        HTTensor t(topo, cores);
        FAIL() << "expected inconsistent_cores";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::inconsistent_cores);
    }
}

TEST(EvaluateBatch, EmptyAndSingleton) {
    htbb::testing::Rng rng(2);
    const auto topo = TreeTopology::balanced({3, 3, 3});
    const HTTensor t(topo, random_cores(topo, 2, rng));
    EXPECT_TRUE(t.evaluate_batch({}).empty());
    const std::vector<MultiIndex> one{{2, 0, 1}};
    const auto out = t.evaluate_batch(one);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0], t.evaluate(one[0]));
}

TEST(EvaluateBatch, FullEnumerationMatchesMaterialize) {
    htbb::testing::Rng rng(13);
    const auto topo = TreeTopology::balanced({3, 3, 3, 3});
    const auto cores = random_cores(topo, 3, rng);
    const HTTensor t(topo, cores);
    const auto batch = t.evaluate_batch(all_indices(topo.mode_sizes()));
    const auto dense = t.materialize();
    const auto truth = brute_force(topo, cores);
    ASSERT_EQ(batch.size(), dense.size());
    for (std::size_t k = 0; k < batch.size(); ++k) {
        EXPECT_EQ(batch[k], dense[k]);
        EXPECT_NEAR(batch[k], truth[k], 1e-12);
    }
}

TEST(Materialize, RankOneOnes) {
    const auto t = constant_tensor(TreeTopology::balanced({2, 2, 2}), 1.0, 1.0);
    const auto dense = t.materialize();
    EXPECT_EQ(dense, std::vector<double>(8, 1.0));
}

TEST(Materialize, TwoModesIsMatrixProduct) {
    htbb::testing::Rng rng(17);
    const auto topo = TreeTopology::balanced({3, 4});
    const auto cores = random_cores(topo, 3, rng);
    const HTTensor t(topo, cores);
    const auto dense = t.materialize();
    const Core &g = cores[0], &g1 = cores[1], &g2 = cores[2];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 4; ++j) {
            double expected = 0.0;
            for (std::size_t a = 0; a < g.shape[0]; ++a)
                for (std::size_t b = 0; b < g.shape[2]; ++b) expected += g1(a, i) * g(a, 0, b) * g2(b, j);
            EXPECT_NEAR(dense[i * 4 + j], expected, 1e-12);
        }
}

TEST(Materialize, CapExceeded) {
    const auto t = constant_tensor(TreeTopology::balanced(std::vector<int>(30, 2)), 1.0, 1.0);
    try {
        (void)t.materialize();
        FAIL() << "expected too_large";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::too_large);
    }
}

TEST(Serialization, JsonRoundTripIsExact) {
    htbb::testing::Rng rng(19);
    const auto topo = random_topology({3, 2, 4, 2, 3}, rng);
    const HTTensor t(topo, random_cores(topo, 4, rng));
    const HTTensor back = HTTensor::from_json(t.to_json());
    ASSERT_EQ(back.topology().size(), topo.size());
    for (int id = 0; id < topo.size(); ++id) {
        EXPECT_EQ(back.core(id).shape, t.core(id).shape);
        EXPECT_EQ(back.core(id).values, t.core(id).values);
    }
    for (const auto& index : all_indices(topo.mode_sizes())) EXPECT_EQ(back.evaluate(index), t.evaluate(index));
}

TEST(Serialization, MalformedJson) {
    try {
        (void)HTTensor::from_json("{\"dim\": 2");
        FAIL() << "expected parse_error";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::parse_error);
    }
}

TEST(Topology, CappedVolume) {
    const std::vector<int> sizes{10, 10, 10};
    EXPECT_EQ(capped_volume(sizes, 5000), 1000u);
    EXPECT_EQ(capped_volume(sizes, 500), 501u);
}
