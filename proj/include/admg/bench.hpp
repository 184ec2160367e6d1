#pragma once

#include <admg/fitting.hpp>
#include <admg/synthetic.hpp>

#include <chrono>
#include <ostream>
#include <random>
#include <string>
#include <vector>

namespace admg {

enum class BenchFamily { fixed, large };

/*
 * Expandable graphs on vertices u1 w1 u2 w2 ... uk wk. These shapes are
 * reconstructions; the original drawings were not available.
 *
 *   fixed: u_b <-> w_b, u_b -> u_{b+1}, w_b -> w_{b+1}   (k districts of size 2)
 *   large: u1 <-> w1 <-> u2 <-> w2 <-> ... <-> wk         (one district of size 2k)
 */
inline Admg bench_graph(BenchFamily family, int k)
{
    if (k < 1) throw InputError("k must be at least 1");
    if (2 * k > Model::max_vertices) throw InputError("k is too large");
    std::vector<std::string> labels;
    for (int b = 1; b <= k; ++b) {
        labels.push_back("u" + std::to_string(b));
        labels.push_back("w" + std::to_string(b));
    }
    std::vector<std::pair<Vertex, Vertex>> d, bi;
    if (family == BenchFamily::fixed) {
        for (int b = 0; b < k; ++b) {
            bi.emplace_back(2 * b, 2 * b + 1);
            if (b + 1 < k) {
                d.emplace_back(2 * b, 2 * b + 2);
                d.emplace_back(2 * b + 1, 2 * b + 3);
            }
        }
    } else {
        for (int v = 0; v + 1 < 2 * k; ++v) bi.emplace_back(v, v + 1);
    }
    return Admg(labels, d, bi);
}

// n draws from a random latent law of g plus one pseudo-count per cell.
inline CountVector bench_counts(const Admg& g, long long n, std::uint64_t seed)
{
    const Model model(g);
    std::mt19937_64 rng(seed);
    const LatentProjection law(g, rng);
    CountVector counts = CountVector::Ones(model.num_states());
    for (long long i = 0; i < n; ++i) counts[model.state_index(law.sample(rng))] += 1;
    return counts;
}

struct BenchRow
{
    std::string family;
    int k = 0;
    int vertices = 0;
    std::size_t params = 0;
    double seconds = 0;
    int cycles = 0;
    bool converged = false;
};

inline BenchRow bench_one(BenchFamily family, int k, long long n, std::uint64_t seed, int repeats,
                          const FitOptions& opts = {})
{
    const auto g = bench_graph(family, k);
    const Model model(g);
    const auto counts = bench_counts(g, n, seed + static_cast<std::uint64_t>(k));
    BenchRow row{family == BenchFamily::fixed ? "fixed" : "large", k, g.size(), model.num_params()};
    double total = 0;
    for (int r = 0; r < repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto res = fit_districts_parallel(model, counts, opts);
        total += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        row.cycles = res.cycles;
        row.converged = res.converged;
    }
    row.seconds = total / repeats;
    return row;
}

inline void write_bench_header(std::ostream& out) { out << "family,k,vertices,params,seconds,cycles,converged\n"; }

inline void write_bench_row(std::ostream& out, const BenchRow& r)
{
    out << r.family << ',' << r.k << ',' << r.vertices << ',' << r.params << ',' << r.seconds << ',' << r.cycles << ','
        << (r.converged ? "true" : "false") << '\n';
}

} // namespace admg
