#pragma once

#include <bit>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <vector>

namespace admg {

using Vertex = int;

// Subset of a graph's vertices stored as a bitmask; bit k is the k-th declared
// vertex. Iteration and comparisons therefore follow declaration order.
class VertexSet
{
public:
    static constexpr int capacity = 64;

    constexpr VertexSet() = default;
    constexpr explicit VertexSet(std::uint64_t bits) : bits_(bits) {}
    VertexSet(std::initializer_list<Vertex> vs)
    {
        for (auto v : vs) insert(v);
    }

    static constexpr VertexSet all(int n)
    {
        return VertexSet(n >= capacity ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1));
    }
    static constexpr VertexSet single(Vertex v) { return VertexSet(std::uint64_t{1} << v); }

    constexpr std::uint64_t bits() const { return bits_; }
    constexpr bool empty() const { return bits_ == 0; }
    constexpr int size() const { return std::popcount(bits_); }
    constexpr bool contains(Vertex v) const { return (bits_ >> v) & 1u; }
    constexpr bool contains(VertexSet o) const { return (o.bits_ & ~bits_) == 0; }
    constexpr bool intersects(VertexSet o) const { return (bits_ & o.bits_) != 0; }
    constexpr Vertex first() const { return std::countr_zero(bits_); }
    constexpr Vertex last() const { return capacity - 1 - std::countl_zero(bits_); }

    constexpr void insert(Vertex v) { bits_ |= std::uint64_t{1} << v; }
    constexpr void erase(Vertex v) { bits_ &= ~(std::uint64_t{1} << v); }

    constexpr VertexSet operator|(VertexSet o) const { return VertexSet(bits_ | o.bits_); }
    constexpr VertexSet operator&(VertexSet o) const { return VertexSet(bits_ & o.bits_); }
    constexpr VertexSet operator-(VertexSet o) const { return VertexSet(bits_ & ~o.bits_); }
    constexpr VertexSet& operator|=(VertexSet o) { bits_ |= o.bits_; return *this; }
    constexpr VertexSet& operator&=(VertexSet o) { bits_ &= o.bits_; return *this; }
    constexpr VertexSet& operator-=(VertexSet o) { bits_ &= ~o.bits_; return *this; }

    constexpr bool operator==(const VertexSet&) const = default;
    // Binary-counting order of the masks.
    constexpr auto operator<=>(const VertexSet& o) const { return bits_ <=> o.bits_; }

    class iterator
    {
    public:
        using value_type = Vertex;
        using difference_type = std::ptrdiff_t;
        constexpr iterator() = default;
        constexpr explicit iterator(std::uint64_t rest) : rest_(rest) {}
        constexpr Vertex operator*() const { return std::countr_zero(rest_); }
        constexpr iterator& operator++() { rest_ &= rest_ - 1; return *this; }
        constexpr iterator operator++(int) { auto t = *this; ++*this; return t; }
        constexpr bool operator==(const iterator&) const = default;
    private:
        std::uint64_t rest_ = 0;
    };

    constexpr iterator begin() const { return iterator(bits_); }
    constexpr iterator end() const { return iterator(0); }

    std::vector<Vertex> to_vector() const { return {begin(), end()}; }

private:
    std::uint64_t bits_ = 0;
};

// Calls fn(sub) for every subset of `of` in increasing mask order, the empty
// set included.
template <class F>
inline void for_each_subset(VertexSet of, F&& fn)
{
    const auto m = of.bits();
    std::uint64_t s = 0;
    while (true) {
        fn(VertexSet(s));
        if (s == m) break;
        s = (s - m) & m;
    }
}

// Packs the bits of `x` selected by `mask` into the low bits, preserving order
// (software pext).
inline std::uint64_t compress_bits(std::uint64_t x, std::uint64_t mask)
{
    std::uint64_t out = 0;
    int k = 0;
    for (; mask; mask &= mask - 1, ++k) {
        if (x & mask & (~mask + 1)) out |= std::uint64_t{1} << k;
    }
    return out;
}

// Inverse of compress_bits.
inline std::uint64_t expand_bits(std::uint64_t x, std::uint64_t mask)
{
    std::uint64_t out = 0;
    for (int k = 0; mask; mask &= mask - 1, ++k) {
        if ((x >> k) & 1u) out |= mask & (~mask + 1);
    }
    return out;
}

} // namespace admg

template <>
struct std::hash<admg::VertexSet>
{
    std::size_t operator()(const admg::VertexSet& s) const noexcept
    {
        return std::hash<std::uint64_t>{}(s.bits());
    }
};
