#pragma once

#include <admg/graph.hpp>

#include <Eigen/Core>

#include <cmath>
#include <random>
#include <vector>

namespace admg {

/*
 * Random binary law Markov to an ADMG, built from its canonical latent DAG:
 * every bidirected edge a <-> b gets a hidden parent U_ab of a and b, and
 * every observed vertex gets a random conditional table given its observed
 * parents and its hidden parents. The observed margin obeys the global Markov
 * property of the graph.
 */
class LatentProjection
{
public:
    LatentProjection(const Admg& g, std::mt19937_64& rng, double lo = 0.15, double hi = 0.85)
        : graph_(g), latent_edges_(g.bidirected_edges())
    {
        std::uniform_real_distribution<double> unif(lo, hi);
        const int n = g.size();
        latent_p_.resize(latent_edges_.size());
        for (auto& p : latent_p_) p = unif(rng);
        hidden_.assign(n, {});
        for (std::size_t e = 0; e < latent_edges_.size(); ++e) {
            hidden_[latent_edges_[e].first].push_back(static_cast<int>(e));
            hidden_[latent_edges_[e].second].push_back(static_cast<int>(e));
        }
        parents_.resize(n);
        cpt_.resize(n);
        for (int v = 0; v < n; ++v) {
            parents_[v] = g.parents(VertexSet::single(v)).to_vector();
            const std::size_t rows = std::size_t{1} << (parents_[v].size() + hidden_[v].size());
            cpt_[v].resize(rows);
            for (auto& c : cpt_[v]) c = unif(rng);
        }
    }

    /*
     * Same latent structure with logistic tables: every parent, observed or
     * hidden, shifts the log-odds of X_v by a weight of magnitude in [lo, hi]
     * and random sign. Gives laws far from the submodels of the graph.
     */
    static LatentProjection logistic(const Admg& g, std::mt19937_64& rng, double lo = 1.5, double hi = 3.0)
    {
        LatentProjection lp(g, rng);
        std::uniform_real_distribution<double> size(lo, hi), shift(-0.5, 0.5);
        std::bernoulli_distribution sign(0.5);
        for (std::size_t v = 0; v < lp.cpt_.size(); ++v) {
            const std::size_t k = lp.parents_[v].size() + lp.hidden_[v].size();
            std::vector<double> w(k);
            double centre = shift(rng);
            for (auto& x : w) {
                x = sign(rng) ? size(rng) : -size(rng);
                centre -= 0.5 * x;
            }
            for (std::size_t row = 0; row < lp.cpt_[v].size(); ++row) {
                double eta = centre;
                for (std::size_t b = 0; b < k; ++b) {
                    if ((row >> (k - 1 - b)) & 1u) eta += w[b];
                }
                lp.cpt_[v][row] = 1.0 / (1.0 + std::exp(-eta));
            }
        }
        return lp;
    }

    // P(X_v = 1 | observed parents in `x`, hidden bits in `u`).
    double prob_one(int v, VertexSet x, std::uint64_t u) const
    {
        std::size_t row = 0;
        for (auto p : parents_[v]) row = (row << 1) | (x.contains(p) ? 1u : 0u);
        for (auto e : hidden_[v]) row = (row << 1) | ((u >> e) & 1u);
        return cpt_[v][row];
    }

    // Exact joint over observed states (index: first vertex most significant).
    // Cost 2^(|V| + #bidirected edges).
    Eigen::VectorXd joint() const
    {
        const int n = graph_.size();
        const std::size_t states = std::size_t{1} << n;
        const std::size_t latents = std::size_t{1} << latent_edges_.size();
        Eigen::VectorXd p = Eigen::VectorXd::Zero(states);
        for (std::uint64_t u = 0; u < latents; ++u) {
            double wu = 1.0;
            for (std::size_t e = 0; e < latent_edges_.size(); ++e) wu *= ((u >> e) & 1u) ? latent_p_[e] : 1.0 - latent_p_[e];
            for (std::size_t r = 0; r < states; ++r) {
                VertexSet x;
                for (int k = 0; k < n; ++k) {
                    if ((r >> (n - 1 - k)) & 1u) x.insert(k);
                }
                double w = wu;
                for (int v = 0; v < n; ++v) {
                    const double p1 = prob_one(v, x, u);
                    w *= x.contains(v) ? p1 : 1.0 - p1;
                }
                p[r] += w;
            }
        }
        return p;
    }

    // Ancestral sampling of one observation; returns the set of vertices at 1.
    VertexSet sample(std::mt19937_64& rng) const
    {
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        std::uint64_t u = 0;
        for (std::size_t e = 0; e < latent_edges_.size(); ++e) {
            if (unif(rng) < latent_p_[e]) u |= std::uint64_t{1} << e;
        }
        VertexSet x;
        for (auto v : graph_.topological_order()) {
            if (unif(rng) < prob_one(v, x, u)) x.insert(v);
        }
        return x;
    }

private:
    Admg graph_;
    std::vector<std::pair<Vertex, Vertex>> latent_edges_;
    std::vector<double> latent_p_;
    std::vector<std::vector<int>> hidden_;
    std::vector<std::vector<Vertex>> parents_;
    std::vector<std::vector<double>> cpt_;
};

} // namespace admg
