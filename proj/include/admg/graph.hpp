#pragma once

#include <admg/error.hpp>
#include <admg/vertex_set.hpp>

#include <algorithm>
#include <deque>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace admg {

enum class EdgeKind { directed, bidirected };

struct Edge
{
    Vertex from;
    Vertex to;    // for bidirected edges from < to
    EdgeKind kind;

    bool operator==(const Edge&) const = default;
    auto operator<=>(const Edge& o) const
    {
        if (auto c = std::min(from, to) <=> std::min(o.from, o.to); c != 0) return c;
        if (auto c = std::max(from, to) <=> std::max(o.from, o.to); c != 0) return c;
        if (auto c = kind <=> o.kind; c != 0) return c;
        return from <=> o.from;
    }
};

/*
 * Acyclic directed mixed graph. Vertices are identified by their declaration
 * index; labels are kept for I/O. Immutable once constructed; every query is
 * const and thread-safe.
 */
class Admg
{
public:
    Admg() = default;

    Admg(std::vector<std::string> labels,
         const std::vector<std::pair<Vertex, Vertex>>& directed,
         const std::vector<std::pair<Vertex, Vertex>>& bidirected)
        : labels_(std::move(labels))
    {
        const int n = static_cast<int>(labels_.size());
        if (n > VertexSet::capacity) {
            throw GraphError("at most " + std::to_string(VertexSet::capacity) + " vertices are supported");
        }
        for (int v = 0; v < n; ++v) {
            if (!index_.emplace(labels_[v], v).second) {
                throw GraphError("duplicate vertex label '" + labels_[v] + "'");
            }
        }
        pa_.assign(n, {});
        ch_.assign(n, {});
        sp_.assign(n, {});
        auto check = [&](Vertex a, Vertex b) {
            if (a < 0 || a >= n || b < 0 || b >= n) throw GraphError("edge endpoint is not a vertex");
            if (a == b) throw GraphError("self-loop on '" + labels_[a] + "'");
        };
        for (auto [a, b] : directed) {
            check(a, b);
            if (pa_[b].contains(a)) {
                throw GraphError("duplicate directed edge " + labels_[a] + " -> " + labels_[b]);
            }
            pa_[b].insert(a);
            ch_[a].insert(b);
            edges_.push_back({a, b, EdgeKind::directed});
        }
        for (auto [a, b] : bidirected) {
            check(a, b);
            if (sp_[a].contains(b)) {
                throw GraphError("duplicate bidirected edge " + labels_[a] + " <-> " + labels_[b]);
            }
            sp_[a].insert(b);
            sp_[b].insert(a);
            edges_.push_back({std::min(a, b), std::max(a, b), EdgeKind::bidirected});
        }
        std::sort(edges_.begin(), edges_.end());
        topo_sort();
    }

    // Labels "1".."n".
    static Admg with_numbered_vertices(int n,
                                       const std::vector<std::pair<Vertex, Vertex>>& directed,
                                       const std::vector<std::pair<Vertex, Vertex>>& bidirected)
    {
        std::vector<std::string> labels;
        for (int v = 1; v <= n; ++v) labels.push_back(std::to_string(v));
        return Admg(std::move(labels), directed, bidirected);
    }

    int size() const { return static_cast<int>(labels_.size()); }
    VertexSet vertices() const { return VertexSet::all(size()); }
    const std::vector<std::string>& labels() const { return labels_; }
    const std::string& label(Vertex v) const { return labels_.at(v); }

    Vertex index(const std::string& label) const
    {
        auto it = index_.find(label);
        if (it == index_.end()) throw GraphError("unknown vertex '" + label + "'");
        return it->second;
    }

    bool has_label(const std::string& label) const { return index_.count(label) != 0; }

    VertexSet set(const std::vector<std::string>& labels) const
    {
        VertexSet s;
        for (const auto& l : labels) s.insert(index(l));
        return s;
    }

    // Sorted canonically; bidirected edges have from < to.
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<Vertex>& topological_order() const { return topo_; }

    std::vector<std::pair<Vertex, Vertex>> directed_edges() const { return edges_of(EdgeKind::directed); }
    std::vector<std::pair<Vertex, Vertex>> bidirected_edges() const { return edges_of(EdgeKind::bidirected); }

    bool has_directed(Vertex a, Vertex b) const { return pa_.at(b).contains(a); }
    bool has_bidirected(Vertex a, Vertex b) const { return sp_.at(a).contains(b); }

    VertexSet parents(VertexSet a) const { return gather(a, pa_); }
    VertexSet children(VertexSet a) const { return gather(a, ch_); }
    VertexSet spouses(VertexSet a) const { return gather(a, sp_); }

    VertexSet ancestors(VertexSet a) const { return closure(a, pa_, vertices()); }
    VertexSet descendants(VertexSet a) const { return closure(a, ch_, vertices()); }

    // Ancestors within the induced subgraph G_within.
    VertexSet ancestors_in(VertexSet a, VertexSet within) const { return closure(a, pa_, within); }

    VertexSet district(Vertex x) const
    {
        require(VertexSet::single(x));
        return closure(VertexSet::single(x), sp_, vertices());
    }

    // Union of the districts of G_within that contain a vertex of `seeds`.
    VertexSet district_in(VertexSet seeds, VertexSet within) const
    {
        require(seeds | within);
        return closure(seeds & within, sp_, within);
    }

    // Connected components of the bidirected skeleton, ordered by first vertex.
    std::vector<VertexSet> districts() const { return districts_in(vertices()); }

    std::vector<VertexSet> districts_in(VertexSet within) const
    {
        std::vector<VertexSet> out;
        VertexSet left = within;
        while (!left.empty()) {
            auto d = closure(VertexSet::single(left.first()), sp_, within);
            out.push_back(d);
            left -= d;
        }
        return out;
    }

    // {x in a : de(x) ∩ a = {x}}
    VertexSet barren(VertexSet a) const
    {
        require(a);
        VertexSet out;
        for (auto x : a) {
            if ((descendants_of(x) & a) == VertexSet::single(x)) out.insert(x);
        }
        return out;
    }

    bool is_barren(VertexSet a) const { return barren(a) == a; }
    bool is_ancestral(VertexSet a) const { return ancestors(a) == a; }

    // Proper descendants of x, plus x.
    VertexSet descendants_of(Vertex x) const { return closure(VertexSet::single(x), ch_, vertices()); }

    void require(VertexSet a) const
    {
        if (!vertices().contains(a)) throw GraphError("vertex set refers to unknown vertices");
    }

    std::vector<Vertex> to_indices(VertexSet s) const { return s.to_vector(); }

    // Renders "{a,b}" using labels in canonical order.
    std::string format(VertexSet s) const
    {
        std::string out = "{";
        bool first = true;
        for (auto v : s) {
            if (!first) out += ',';
            out += labels_[v];
            first = false;
        }
        return out + "}";
    }

    bool operator==(const Admg& o) const { return labels_ == o.labels_ && edges_ == o.edges_; }

private:
    std::vector<std::pair<Vertex, Vertex>> edges_of(EdgeKind k) const
    {
        std::vector<std::pair<Vertex, Vertex>> out;
        for (const auto& e : edges_) {
            if (e.kind == k) out.emplace_back(e.from, e.to);
        }
        return out;
    }

    VertexSet gather(VertexSet a, const std::vector<VertexSet>& rel) const
    {
        require(a);
        VertexSet out;
        for (auto x : a) out |= rel[x];
        return out;
    }

    VertexSet closure(VertexSet seeds, const std::vector<VertexSet>& rel, VertexSet within) const
    {
        require(seeds);
        VertexSet seen = seeds;
        VertexSet frontier = seeds;
        while (!frontier.empty()) {
            VertexSet next;
            for (auto x : frontier) next |= rel[x];
            next &= within;
            next -= seen;
            seen |= next;
            frontier = next;
        }
        return seen;
    }

    void topo_sort()
    {
        const int n = size();
        std::vector<int> indeg(n);
        for (int v = 0; v < n; ++v) indeg[v] = pa_[v].size();
        std::deque<Vertex> ready;
        for (int v = 0; v < n; ++v) {
            if (indeg[v] == 0) ready.push_back(v);
        }
        while (!ready.empty()) {
            auto v = ready.front();
            ready.pop_front();
            topo_.push_back(v);
            for (auto c : ch_[v]) {
                if (--indeg[c] == 0) ready.push_back(c);
            }
        }
        if (static_cast<int>(topo_.size()) != n) throw GraphError("directed edges form a cycle");
    }

    std::vector<std::string> labels_;
    std::unordered_map<std::string, Vertex> index_;
    std::vector<VertexSet> pa_, ch_, sp_;
    std::vector<Edge> edges_;
    std::vector<Vertex> topo_;
};

// Returns a copy of g with the edge added; throws GraphError if invalid.
inline Admg with_edge(const Admg& g, Edge e)
{
    auto d = g.directed_edges();
    auto b = g.bidirected_edges();
    (e.kind == EdgeKind::directed ? d : b).emplace_back(e.from, e.to);
    return Admg(g.labels(), d, b);
}

inline Admg without_edge(const Admg& g, Edge e)
{
    auto d = g.directed_edges();
    auto b = g.bidirected_edges();
    auto& list = e.kind == EdgeKind::directed ? d : b;
    std::pair<Vertex, Vertex> key{e.from, e.to};
    if (e.kind == EdgeKind::bidirected && key.first > key.second) std::swap(key.first, key.second);
    auto it = std::find(list.begin(), list.end(), key);
    if (it == list.end()) throw GraphError("edge not present");
    list.erase(it);
    return Admg(g.labels(), d, b);
}

// ---------------------------------------------------------------------------
// m-separation
// ---------------------------------------------------------------------------

// One edge of a path, oriented along the direction of travel. For directed
// edges `forward` means from -> to.
struct PathStep
{
    Vertex from;
    Vertex to;
    EdgeKind kind;
    bool forward = true;
};

namespace detail {

struct Incidence
{
    Vertex other;
    bool arrow_here;
    bool arrow_there;
    EdgeKind kind;
    bool forward;   // directed edge oriented here -> other
};

inline std::vector<Incidence> incident(const Admg& g, Vertex u)
{
    std::vector<Incidence> out;
    const auto s = VertexSet::single(u);
    for (auto p : g.parents(s)) out.push_back({p, true, false, EdgeKind::directed, false});
    for (auto c : g.children(s)) out.push_back({c, false, true, EdgeKind::directed, true});
    for (auto w : g.spouses(s)) out.push_back({w, true, true, EdgeKind::bidirected, false});
    return out;
}

} // namespace detail

/*
 * Searches for an m-connecting path from x to y given z with an alternating
 * reachability pass over (vertex, arrowhead-on-arrival) states. Returns the
 * witnessing edge sequence (which may revisit vertices) or nullopt when x and
 * y are m-separated.
 */
inline std::optional<std::vector<PathStep>>
m_connecting_path(const Admg& g, VertexSet x, VertexSet y, VertexSet z)
{
    g.require(x | y | z);
    if (x.empty() || y.empty()) throw GraphError("m-separation needs nonempty X and Y");
    if (x.intersects(y) || x.intersects(z) || y.intersects(z)) {
        throw GraphError("X, Y and Z must be pairwise disjoint");
    }
    const auto an_z = g.ancestors(z);
    const int n = g.size();

    // state id = 2*v + arrow_in; start states are separate (2n + v)
    struct Pred { int state; PathStep step; };
    std::vector<std::optional<Pred>> pred(3 * n);
    std::vector<char> seen(3 * n, 0);
    std::deque<int> queue;
    for (auto v : x) {
        seen[2 * n + v] = 1;
        queue.push_back(2 * n + v);
    }

    auto rebuild = [&](int state) {
        std::vector<PathStep> path;
        while (pred[state]) {
            path.push_back(pred[state]->step);
            state = pred[state]->state;
        }
        std::reverse(path.begin(), path.end());
        return path;
    };

    while (!queue.empty()) {
        const int s = queue.front();
        queue.pop_front();
        const bool start = s >= 2 * n;
        const Vertex u = start ? s - 2 * n : s / 2;
        const bool arrow_in = !start && (s % 2 == 1);
        for (const auto& inc : detail::incident(g, u)) {
            if (!start) {
                const bool collider = arrow_in && inc.arrow_here;
                const bool pass = collider ? an_z.contains(u) : !z.contains(u);
                if (!pass) continue;
            }
            const int next = 2 * inc.other + (inc.arrow_there ? 1 : 0);
            if (seen[next]) continue;
            seen[next] = 1;
            pred[next] = Pred{s, PathStep{u, inc.other, inc.kind, inc.forward}};
            if (y.contains(inc.other)) return rebuild(next);
            queue.push_back(next);
        }
    }
    return std::nullopt;
}

inline bool m_separated(const Admg& g, VertexSet x, VertexSet y, VertexSet z)
{
    return !m_connecting_path(g, x, y, z).has_value();
}

inline std::string format_path(const Admg& g, const std::vector<PathStep>& path)
{
    if (path.empty()) return {};
    std::string out = g.label(path.front().from);
    for (const auto& s : path) {
        if (s.kind == EdgeKind::bidirected) out += " <-> ";
        else out += s.forward ? " -> " : " <- ";
        out += g.label(s.to);
    }
    return out;
}

} // namespace admg
