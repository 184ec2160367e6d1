#pragma once

// Fixtures and independent oracles shared by the test binaries. Nothing here
// calls the reachability search, Phi shortcut or M/P machinery it checks.

#include <admg/graph.hpp>
#include <admg/heads.hpp>
#include <admg/moebius.hpp>
#include <admg/synthetic.hpp>

#include <algorithm>
#include <functional>
#include <random>
#include <vector>

namespace admg::testing {

// 1 -> 2, 2 -> 4, 2 <-> 3, 3 <-> 4
inline Admg g1()
{
    return Admg::with_numbered_vertices(4, {{0, 1}, {1, 3}}, {{1, 2}, {2, 3}});
}

// 1 -> 2, 1 <-> 3, 2 <-> 3
inline Admg g2()
{
    return Admg::with_numbered_vertices(3, {{0, 1}}, {{0, 2}, {1, 2}});
}

// Districts {1,4} and {2,3}; f_1234 = f_{23|1} f_{14|2}.
inline Admg fig2()
{
    return Admg::with_numbered_vertices(4, {{0, 2}, {1, 3}}, {{1, 2}, {0, 3}});
}

inline Admg random_admg(std::mt19937_64& rng, int n, double p_dir = 0.35, double p_bi = 0.35)
{
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    std::bernoulli_distribution dir(p_dir), bi(p_bi);
    std::vector<std::pair<Vertex, Vertex>> d, b;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (dir(rng)) d.emplace_back(order[i], order[j]);
            if (bi(rng)) b.emplace_back(order[i], order[j]);
        }
    }
    return Admg::with_numbered_vertices(n, d, b);
}

inline Admg random_dag(std::mt19937_64& rng, int n, double p_dir = 0.4)
{
    return random_admg(rng, n, p_dir, 0.0);
}

// Interior point of Q_G: Möbius parameters of a random latent-projection law.
inline ParamVector random_q(const Model& model, std::mt19937_64& rng)
{
    LatentProjection lp(model.graph(), rng);
    return q_from_p(model, lp.joint());
}

// Multinomial draw of n observations over the cells of p, by sequential binomials.
inline Eigen::VectorXd multinomial(std::mt19937_64& rng, const Eigen::VectorXd& p, long long n)
{
    Eigen::VectorXd out = Eigen::VectorXd::Zero(p.size());
    double rest = 1.0;
    for (Eigen::Index i = 0; i < p.size() && n > 0; ++i) {
        const double share = (i + 1 == p.size() || rest <= 0) ? 1.0 : std::clamp(p[i] / rest, 0.0, 1.0);
        const long long k = std::binomial_distribution<long long>(n, share)(rng);
        out[i] = static_cast<double>(k);
        n -= k;
        rest -= p[i];
    }
    return out;
}

// Counts from a random latent-projection law of the graph, plus one per cell.
inline Eigen::VectorXd latent_counts(const Model& model, std::mt19937_64& rng, long long n)
{
    const auto p = LatentProjection(model.graph(), rng).joint();
    return multinomial(rng, p, n).array() + 1.0;
}

inline Admg complete_bidirected(int n)
{
    std::vector<std::pair<Vertex, Vertex>> b;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) b.emplace_back(i, j);
    }
    return Admg::with_numbered_vertices(n, {}, b);
}

// Maximized DAG log-likelihood Σ_v Σ n(x_v, x_pa) log(n(x_v, x_pa) / n(x_pa)).
inline double dag_mle_loglik(const Admg& dag, const Model& model, const Eigen::VectorXd& counts)
{
    double l = 0.0;
    for (auto v : dag.vertices()) {
        const auto pa = dag.parents(VertexSet::single(v));
        const auto fam = pa | VertexSet::single(v);
        std::vector<double> joint(std::size_t{1} << fam.size(), 0.0), marg(std::size_t{1} << pa.size(), 0.0);
        for (std::size_t r = 0; r < model.num_states(); ++r) {
            const auto ones = model.state_set(r);
            joint[read_state(ones, fam)] += counts[r];
            marg[read_state(ones, pa)] += counts[r];
        }
        for (std::size_t s = 0; s < joint.size(); ++s) {
            if (joint[s] > 0) l += joint[s] * std::log(joint[s] / marg[read_state(write_state(s, fam), pa)]);
        }
    }
    return l;
}

// -- m-separation by exhaustive enumeration of edge-simple paths -------------

struct RawEdge
{
    Vertex a, b;
    bool arrow_a, arrow_b;
};

inline std::vector<RawEdge> raw_edges(const Admg& g)
{
    std::vector<RawEdge> out;
    for (const auto& e : g.edges()) {
        if (e.kind == EdgeKind::directed) out.push_back({e.from, e.to, false, true});
        else out.push_back({e.from, e.to, true, true});
    }
    return out;
}

// True when some path (edges not repeated) from x to y m-connects given z.
inline bool brute_m_connected(const Admg& g, Vertex x, Vertex y, VertexSet z)
{
    const auto edges = raw_edges(g);
    VertexSet an_z;
    // ancestors of z by fixed point over the raw edge list
    an_z = z;
    for (bool grew = true; grew;) {
        grew = false;
        for (const auto& e : edges) {
            if (!e.arrow_a && e.arrow_b && an_z.contains(e.b) && !an_z.contains(e.a)) {
                an_z.insert(e.a);
                grew = true;
            }
        }
    }
    std::vector<char> used(edges.size(), 0);
    std::function<bool(Vertex, bool, bool)> walk = [&](Vertex at, bool arrow_in, bool at_start) -> bool {
        for (std::size_t k = 0; k < edges.size(); ++k) {
            if (used[k]) continue;
            const auto& e = edges[k];
            if (e.a != at && e.b != at) continue;
            const bool here_is_a = e.a == at;
            const Vertex next = here_is_a ? e.b : e.a;
            const bool arrow_here = here_is_a ? e.arrow_a : e.arrow_b;
            const bool arrow_next = here_is_a ? e.arrow_b : e.arrow_a;
            if (!at_start) {
                const bool collider = arrow_in && arrow_here;
                if (collider && !an_z.contains(at)) continue;
                if (!collider && z.contains(at)) continue;
            }
            if (next == y) return true;
            used[k] = 1;
            const bool found = walk(next, arrow_next, false);
            used[k] = 0;
            if (found) return true;
        }
        return false;
    };
    return walk(x, false, true);
}

inline bool brute_m_separated(const Admg& g, VertexSet x, VertexSet y, VertexSet z)
{
    for (auto a : x) {
        for (auto b : y) {
            if (brute_m_connected(g, a, b, z)) return false;
        }
    }
    return true;
}

// d-separation on a DAG via the moral graph of an(X ∪ Y ∪ Z).
inline bool moral_d_separated(const Admg& dag, VertexSet x, VertexSet y, VertexSet z)
{
    const int n = dag.size();
    VertexSet keep = x | y | z;
    for (bool grew = true; grew;) {
        grew = false;
        for (const auto& e : dag.edges()) {
            if (keep.contains(e.to) && !keep.contains(e.from)) {
                keep.insert(e.from);
                grew = true;
            }
        }
    }
    std::vector<VertexSet> adj(n);
    auto link = [&](Vertex a, Vertex b) {
        adj[a].insert(b);
        adj[b].insert(a);
    };
    for (auto v : keep) {
        std::vector<Vertex> pa;
        for (const auto& e : dag.edges()) {
            if (e.to == v && keep.contains(e.from)) pa.push_back(e.from);
        }
        for (auto p : pa) link(p, v);
        for (std::size_t i = 0; i < pa.size(); ++i) {
            for (std::size_t j = i + 1; j < pa.size(); ++j) link(pa[i], pa[j]);
        }
    }
    VertexSet seen = x;
    std::vector<Vertex> stack(x.begin(), x.end());
    while (!stack.empty()) {
        auto v = stack.back();
        stack.pop_back();
        for (auto w : adj[v]) {
            if (!keep.contains(w) || z.contains(w) || seen.contains(w)) continue;
            if (y.contains(w)) return false;
            seen.insert(w);
            stack.push_back(w);
        }
    }
    return true;
}

// -- Phi by exhaustive subset search --------------------------------------

inline VertexSet brute_barren(const Admg& g, VertexSet a)
{
    VertexSet out;
    for (auto x : a) {
        if ((g.descendants(VertexSet::single(x)) & a) == VertexSet::single(x)) out.insert(x);
    }
    return out;
}

// dis_W(x) by flood fill over bidirected edges inside W.
inline VertexSet brute_district(const Admg& g, Vertex x, VertexSet w)
{
    VertexSet seen = VertexSet::single(x);
    for (bool grew = true; grew;) {
        grew = false;
        for (const auto& e : g.edges()) {
            if (e.kind != EdgeKind::bidirected || !w.contains(e.from) || !w.contains(e.to)) continue;
            if (seen.contains(e.from) != seen.contains(e.to)) {
                seen.insert(e.from);
                seen.insert(e.to);
                grew = true;
            }
        }
    }
    return seen;
}

inline bool brute_is_head(const Admg& g, VertexSet h)
{
    if (h.empty() || brute_barren(g, h) != h) return false;
    return brute_district(g, h.first(), g.ancestors(h)).contains(h);
}

// Heads inside W with closure dis_{an(H)}(H) maximal under inclusion, found by
// trying every nonempty subset of W.
inline std::vector<VertexSet> brute_phi(const Admg& g, VertexSet w)
{
    std::vector<VertexSet> hs, closures;
    for_each_subset(w, [&](VertexSet h) {
        if (!brute_is_head(g, h)) return;
        hs.push_back(h);
        closures.push_back(brute_district(g, h.first(), g.ancestors(h)));
    });
    std::vector<VertexSet> out;
    for (std::size_t i = 0; i < hs.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < hs.size(); ++j) {
            if (closures[j] != closures[i] && closures[j].contains(closures[i])) dominated = true;
        }
        if (!dominated) out.push_back(hs[i]);
    }
    std::sort(out.begin(), out.end());
    return out;
}

// The fixed-point equation H = ∩_{x in H} barren(an(dis_W(x))) taken
// literally, with dis_W the district in G_W.
inline std::vector<VertexSet> literal_phi(const Admg& g, VertexSet w)
{
    std::vector<VertexSet> out;
    if (w.empty()) return out;
    std::vector<VertexSet> b(g.size());
    for (auto x : w) b[x] = brute_barren(g, g.ancestors(brute_district(g, x, w)));
    for_each_subset(w, [&](VertexSet h) {
        if (h.empty()) return;
        VertexSet meet = w;
        for (auto x : h) meet &= b[x];
        if (meet == h) out.push_back(h);
    });
    std::sort(out.begin(), out.end());
    return out;
}

inline std::vector<VertexSet> brute_partition(const Admg& g, VertexSet w,
                                             std::vector<VertexSet> (*step)(const Admg&, VertexSet) = brute_phi)
{
    std::vector<VertexSet> out;
    while (!w.empty()) {
        auto blocks = step(g, w);
        for (auto h : blocks) {
            out.push_back(h);
            w -= h;
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace admg::testing
