#pragma once

#include <admg/graph_io.hpp>
#include <admg/inference.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace admg {

enum class Criterion { bic, aic };

inline double criterion_value(Criterion c, const Goodness& g) { return c == Criterion::bic ? g.bic : g.aic; }

struct Move
{
    enum Kind { add, remove } kind = add;
    Edge edge{};

    bool operator==(const Move&) const = default;
};

inline std::string format_move(const Admg& g, const Move& m)
{
    const char* arrow = m.edge.kind == EdgeKind::directed ? " -> " : " <-> ";
    return std::string(m.kind == Move::add ? "add " : "remove ") + g.label(m.edge.from) + arrow + g.label(m.edge.to);
}

inline Admg apply_move(const Admg& g, const Move& m)
{
    return m.kind == Move::add ? with_edge(g, m.edge) : without_edge(g, m.edge);
}

/*
 * One-edge moves: remove any edge; add x -> y, y -> x or x <-> y where no edge
 * of that type joins the pair, skipping directed additions that close a cycle.
 * Sorted by edge; this order is the last tie-break in stepwise.
 */
inline std::vector<Move> neighbor_moves(const Admg& g)
{
    std::vector<Move> out;
    for (const auto& e : g.edges()) out.push_back({Move::remove, e});
    for (Vertex x = 0; x < g.size(); ++x) {
        for (Vertex y = x + 1; y < g.size(); ++y) {
            const auto sx = VertexSet::single(x), sy = VertexSet::single(y);
            if (!g.parents(sy).contains(x) && !g.parents(sx).contains(y)) {
                if (!g.ancestors(sx).contains(y)) out.push_back({Move::add, {x, y, EdgeKind::directed}});
                if (!g.ancestors(sy).contains(x)) out.push_back({Move::add, {y, x, EdgeKind::directed}});
            }
            if (!g.spouses(sx).contains(y)) out.push_back({Move::add, {x, y, EdgeKind::bidirected}});
        }
    }
    std::sort(out.begin(), out.end(), [](const Move& a, const Move& b) { return a.edge < b.edge; });
    return out;
}

inline std::vector<Admg> neighbors(const Admg& g)
{
    std::vector<Admg> out;
    for (const auto& m : neighbor_moves(g)) out.push_back(apply_move(g, m));
    return out;
}

inline int max_district_size(const Admg& g)
{
    int m = 0;
    for (auto d : g.districts()) m = std::max(m, d.size());
    return m;
}

// Same m-separations x ⊥ y | Z for every pair and every Z (graphs over the same vertices).
inline bool markov_equivalent(const Admg& g, const Admg& h)
{
    if (g.size() != h.size()) return false;
    for (Vertex x = 0; x < g.size(); ++x) {
        for (Vertex y = x + 1; y < g.size(); ++y) {
            const auto sx = VertexSet::single(x), sy = VertexSet::single(y);
            bool same = true;
            for_each_subset(g.vertices() - sx - sy, [&](VertexSet z) {
                if (same && m_separated(g, sx, sy, z) != m_separated(h, sx, sy, z)) same = false;
            });
            if (!same) return false;
        }
    }
    return true;
}

struct SelectOptions
{
    Criterion criterion = Criterion::bic;
    FitOptions fit;
    double tie_tolerance = 1e-6;
    int max_steps = 1000;
    unsigned jobs = 1;      // concurrent candidate fits
};

struct Scored
{
    Admg graph;
    FitResult fit;
    Goodness gof;
    double score = 0;
    bool warm = false;
};

struct Step
{
    std::string move;       // "start" for the initial graph
    Admg graph;
    double score = 0;
    double deviance = 0;
    long df = 0;
};

struct SearchState
{
    Admg graph;
    FitResult fit;
    Goodness gof;
    double score = 0;
    std::vector<Step> history;
    std::vector<std::string> warnings;
    int candidates_fitted = 0;
};

inline Scored score_graph(const Admg& g, const CountVector& n, const SelectOptions& opts,
                          const ProbVector* warm_from = nullptr)
{
    const Model model(g);
    auto fo = opts.fit;
    fo.jobs = 1;
    std::optional<FitResult> res;
    bool warm = false;
    if (warm_from) {
        try {
            const auto start = q_from_p(model, *warm_from);
            if ((start.array() > 0).all() && prob_vector(model, start).minCoeff() > fo.slack) {
                res = fit_from(model, n, start, fo);
                warm = true;
            }
        } catch (const NumericalError&) {
            res.reset();
        }
    }
    if (!res) res = fit(model, n, fo);
    Scored s{g, std::move(*res), {}, 0, warm};
    s.gof = goodness(model, s.fit, n);
    s.score = criterion_value(opts.criterion, s.gof);
    return s;
}

/*
 * Greedy one-edge search. A step moves to the best neighbour when it lowers
 * the criterion by more than the tie tolerance. Near-ties go to the smaller
 * largest district, then fewer bidirected edges, then the earlier move.
 */
inline SearchState stepwise(const CountVector& n, const Admg& start, const SelectOptions& opts = {})
{
    opts.fit.validate();
    SearchState st;
    auto inc = score_graph(start, n, opts);
    if (!inc.fit.converged) throw NumericalError("starting graph did not converge");
    st.graph = inc.graph;
    st.fit = inc.fit;
    st.gof = inc.gof;
    st.score = inc.score;
    st.history.push_back({"start", st.graph, st.score, st.gof.deviance, st.gof.df});

    for (int step = 0; step < opts.max_steps; ++step) {
        const auto moves = neighbor_moves(st.graph);
        std::vector<std::optional<Scored>> scored(moves.size());
        std::vector<std::string> errors(moves.size());
        detail::run_indexed(moves.size(), opts.jobs, [&](std::size_t i) {
            try {
                scored[i] = score_graph(apply_move(st.graph, moves[i]), n, opts, &st.fit.p_hat);
                if (!scored[i]->fit.converged) {
                    errors[i] = "did not converge";
                    scored[i].reset();
                }
            } catch (const Error& e) {
                errors[i] = e.what();
            }
        });
        st.candidates_fitted += static_cast<int>(moves.size());

        std::optional<std::size_t> best;
        auto better = [&](std::size_t i, std::size_t j) {
            const auto& a = *scored[i];
            const auto& b = *scored[j];
            if (std::abs(a.score - b.score) > opts.tie_tolerance) return a.score < b.score;
            const int da = max_district_size(a.graph), db = max_district_size(b.graph);
            if (da != db) return da < db;
            const auto ba = a.graph.bidirected_edges().size(), bb = b.graph.bidirected_edges().size();
            if (ba != bb) return ba < bb;
            return i < j;
        };
        for (std::size_t i = 0; i < moves.size(); ++i) {
            if (!scored[i]) {
                st.warnings.push_back("skipped " + format_move(st.graph, moves[i]) + ": " + errors[i]);
                continue;
            }
            if (!best || better(i, *best)) best = i;
        }
        if (!best || !(scored[*best]->score < st.score - opts.tie_tolerance)) break;

        const auto label = format_move(st.graph, moves[*best]);
        auto& chosen = *scored[*best];
        st.graph = chosen.graph;
        st.fit = std::move(chosen.fit);
        st.gof = chosen.gof;
        st.score = chosen.score;
        st.history.push_back({label, st.graph, st.score, st.gof.deviance, st.gof.df});
    }
    return st;
}

} // namespace admg
