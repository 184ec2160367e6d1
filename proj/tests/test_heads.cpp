#include "support.hpp"

#include <gtest/gtest.h>

using namespace admg;
using namespace admg::testing;

namespace {

VertexSet S(std::initializer_list<int> one_based)
{
    VertexSet s;
    for (auto v : one_based) s.insert(v - 1);
    return s;
}

} // namespace

TEST(Heads, G1Table)
{
    const std::vector<HeadTail> expected{
        {S({1}), S({})}, {S({2}), S({1})}, {S({3}), S({})},
        {S({2, 3}), S({1})}, {S({4}), S({2})}, {S({3, 4}), S({1, 2})},
    };
    EXPECT_EQ(heads(g1()), expected);
}

TEST(Heads, DagHeadsAreSingletonsWithParentTails)
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const auto g = random_dag(rng, 6);
        const auto hs = heads(g);
        ASSERT_EQ(hs.size(), 6u);
        for (const auto& ht : hs) {
            ASSERT_EQ(ht.head.size(), 1);
            EXPECT_EQ(ht.tail, g.parents(ht.head));
        }
    }
}

TEST(Heads, BidirectedHeadsAreConnectedSets)
{
    // path 1 <-> 2 <-> 3 <-> 4
    const auto g = Admg::with_numbered_vertices(4, {}, {{0, 1}, {1, 2}, {2, 3}});
    const auto hs = heads(g);
    EXPECT_EQ(hs.size(), 10u);
    for (const auto& ht : hs) {
        EXPECT_TRUE(ht.tail.empty());
        EXPECT_EQ(brute_district(g, ht.head.first(), ht.head), ht.head);
    }
}

TEST(Heads, HeadMayBeDisconnectedInsideItself)
{
    // 1 <-> 2 <-> 3 with 2 -> 1: {1,3} is barren and joined through 2 in G_{an({1,3})}
    const auto g = Admg::with_numbered_vertices(3, {{1, 0}}, {{0, 1}, {1, 2}});
    EXPECT_TRUE(is_head(g, S({1, 3})));
    EXPECT_EQ(tail(g, S({1, 3})), S({2}));
    EXPECT_EQ(partition(g, S({1, 2, 3})), (std::vector<VertexSet>{S({2}), S({1, 3})}));
}

TEST(Heads, Tail)
{
    EXPECT_EQ(tail(g1(), S({3, 4})), S({1, 2}));
    EXPECT_EQ(tail(g1(), S({3})), S({}));
    EXPECT_EQ(tail(g2(), S({2, 3})), S({1}));
    EXPECT_THROW(tail(g1(), S({2, 4})), GraphError);
    EXPECT_THROW(tail(g1(), S({})), GraphError);
    EXPECT_THROW(tail(g1(), S({1, 2})), GraphError);
}

TEST(Heads, HeadsAreDisjointFromTails)
{
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 40; ++trial) {
        const auto g = random_admg(rng, 6);
        for (const auto& ht : heads(g)) {
            EXPECT_FALSE(ht.head.intersects(ht.tail));
            EXPECT_TRUE(g.district(ht.head.first()).contains(ht.head));
            EXPECT_TRUE(g.is_barren(ht.head));
        }
    }
}

TEST(Phi, Examples)
{
    EXPECT_EQ(phi(g1(), S({1, 2, 3, 4})), (std::vector<VertexSet>{S({1}), S({3, 4})}));
    EXPECT_TRUE(phi(g1(), S({})).empty());
    EXPECT_EQ(phi(g1(), S({2})), (std::vector<VertexSet>{S({2})}));
}

TEST(Partition, Examples)
{
    EXPECT_EQ(partition(g1(), S({1, 2, 3, 4})), (std::vector<VertexSet>{S({1}), S({2}), S({3, 4})}));
    EXPECT_EQ(partition(g2(), S({1, 2, 3})), (std::vector<VertexSet>{S({1}), S({2, 3})}));
    for (int v = 1; v <= 4; ++v) EXPECT_EQ(partition(g1(), S({v})), (std::vector<VertexSet>{S({v})}));
    EXPECT_TRUE(partition(g1(), S({})).empty());
}

TEST(Partition, JoinsThroughAncestorsOutsideW)
{
    // 1 <-> 2 <-> 3, 2 -> 3: {1,3} is one head even though 2 is not in W
    const auto g = Admg::with_numbered_vertices(3, {{1, 2}}, {{0, 1}, {1, 2}});
    EXPECT_EQ(partition(g, S({1, 3})), (std::vector<VertexSet>{S({1, 3})}));
    EXPECT_EQ(literal_phi(g, S({1, 3})), (std::vector<VertexSet>{S({1}), S({3})}));

    // 1 <-> 2 <-> 3 with 2 -> 4: 2 is an ancestor of 4 only, so {1,3} is no head
    const auto h = Admg::with_numbered_vertices(4, {{1, 3}}, {{0, 1}, {1, 2}});
    EXPECT_EQ(partition(h, S({1, 3, 4})), (std::vector<VertexSet>{S({1}), S({3}), S({4})}));
    EXPECT_EQ(partition(h, S({1, 2, 3, 4})), (std::vector<VertexSet>{S({1, 2, 3}), S({4})}));
}

TEST(Partition, AgreesWithExhaustiveEnumeration)
{
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 40; ++trial) {
        const auto g = random_admg(rng, 2 + trial % 5);
        const HeadIndex index(g);
        for_each_subset(g.vertices(), [&](VertexSet w) {
            ASSERT_EQ(phi(g, w), brute_phi(g, w));
            const auto blocks = partition(g, w);
            ASSERT_EQ(blocks, brute_partition(g, w));
            VertexSet covered;
            for (auto h : blocks) {
                EXPECT_FALSE(covered.intersects(h));
                covered |= h;
                EXPECT_TRUE(index.contains(h));
                EXPECT_TRUE(brute_is_head(g, h));
            }
            EXPECT_EQ(covered, w);
        });
    }
}

TEST(Partition, DagGivesSingletons)
{
    std::mt19937_64 rng(41);
    const auto g = random_dag(rng, 6);
    for_each_subset(g.vertices(), [&](VertexSet w) {
        EXPECT_EQ(static_cast<int>(partition(g, w).size()), w.size());
    });
}
