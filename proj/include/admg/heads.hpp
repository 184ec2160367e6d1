#pragma once

#include <admg/graph.hpp>

#include <algorithm>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace admg {

struct HeadTail
{
    VertexSet head;
    VertexSet tail;

    bool operator==(const HeadTail&) const = default;
};

// A head is nonempty, barren, and lies inside one district of G_{an(H)}.
inline bool is_head(const Admg& g, VertexSet h)
{
    g.require(h);
    if (h.empty() || !g.is_barren(h)) return false;
    const auto an = g.ancestors(h);
    return g.district_in(VertexSet::single(h.first()), an).contains(h);
}

// tail(H) = (dis_{an(H)}(H) \ H) ∪ pa(dis_{an(H)}(H))
inline VertexSet tail(const Admg& g, VertexSet h)
{
    if (!is_head(g, h)) throw GraphError(g.format(h) + " is not a head");
    const auto d = g.district_in(h, g.ancestors(h));
    return (d - h) | g.parents(d);
}

// All heads with their tails, ordered by head mask (binary counting over the
// declaration order).
inline std::vector<HeadTail> heads(const Admg& g)
{
    std::vector<HeadTail> out;
    for (auto d : g.districts()) {
        for_each_subset(d, [&](VertexSet h) {
            if (is_head(g, h)) out.push_back({h, tail(g, h)});
        });
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.head < b.head; });
    return out;
}

// District of G_{an(H)} containing the head H.
inline VertexSet head_closure(const Admg& g, VertexSet h)
{
    return g.district_in(h, g.ancestors(h));
}

/*
 * Heads of a fixed graph with tails and closures precomputed, plus a lookup
 * from head set to position. Built once; read-only afterwards.
 */
class HeadIndex
{
public:
    HeadIndex() = default;
    explicit HeadIndex(const Admg& g) : heads_(heads(g))
    {
        for (std::size_t i = 0; i < heads_.size(); ++i) {
            pos_.emplace(heads_[i].head, i);
            closures_.push_back(head_closure(g, heads_[i].head));
        }
    }

    const std::vector<HeadTail>& all() const { return heads_; }
    std::size_t size() const { return heads_.size(); }
    const HeadTail& operator[](std::size_t i) const { return heads_[i]; }
    VertexSet closure(std::size_t i) const { return closures_[i]; }

    std::size_t position(VertexSet head) const
    {
        auto it = pos_.find(head);
        if (it == pos_.end()) throw GraphError("set is not a head");
        return it->second;
    }
    bool contains(VertexSet head) const { return pos_.count(head) != 0; }

private:
    std::vector<HeadTail> heads_;
    std::vector<VertexSet> closures_;
    std::unordered_map<VertexSet, std::size_t> pos_;
};

/*
 * Phi(W): the heads H inside W whose closure dis_{an(H)}(H) is not strictly
 * contained in the closure of another head inside W. These are disjoint.
 */
inline std::vector<VertexSet> phi(const HeadIndex& index, VertexSet w)
{
    std::vector<std::size_t> inside;
    for (std::size_t i = 0; i < index.size(); ++i) {
        if (w.contains(index[i].head)) inside.push_back(i);
    }
    std::vector<VertexSet> out;
    VertexSet used;
    for (auto i : inside) {
        const auto ci = index.closure(i);
        const bool dominated = std::any_of(inside.begin(), inside.end(), [&](std::size_t j) {
            return index.closure(j) != ci && index.closure(j).contains(ci);
        });
        if (dominated) continue;
        if (used.intersects(index[i].head)) throw std::logic_error("overlapping maximal heads");
        used |= index[i].head;
        out.push_back(index[i].head);
    }
    std::sort(out.begin(), out.end());
    return out;
}

// [W]_G: peel off Phi(W) and recurse on what is left.
inline std::vector<VertexSet> partition(const HeadIndex& index, VertexSet w)
{
    std::vector<VertexSet> blocks;
    while (!w.empty()) {
        for (auto h : phi(index, w)) {
            blocks.push_back(h);
            w -= h;
        }
    }
    std::sort(blocks.begin(), blocks.end());
    return blocks;
}

inline std::vector<VertexSet> phi(const Admg& g, VertexSet w)
{
    g.require(w);
    return phi(HeadIndex(g), w);
}

inline std::vector<VertexSet> partition(const Admg& g, VertexSet w)
{
    g.require(w);
    return partition(HeadIndex(g), w);
}

} // namespace admg
