// Simulates data from a latent-variable model of 1 -> 2 -> 4, 2 <-> 3 <-> 4,
// fits the graph, and runs a stepwise search from the empty graph.

#include <admg/data.hpp>
#include <admg/graph_io.hpp>
#include <admg/report.hpp>
#include <admg/select.hpp>
#include <admg/synthetic.hpp>

#include <iostream>
#include <random>

int main()
{
    using namespace admg;

    const auto g = parse_graph("vertices: 1 2 3 4\n1 -> 2\n2 -> 4\n2 <-> 3\n3 <-> 4\n");
    const Model model(g);
    std::cout << head_tail_table(model) << "\n";

    std::mt19937_64 rng(2024);
    const auto law = LatentProjection::logistic(g, rng);
    const auto data = simulate(model, q_from_p(model, law.joint()), 5000, 7);
    const auto counts = counts_for(g, data);

    const auto summary = summarize(model, fit(model, counts), counts);
    std::cout << report_text(model, summary) << "\n";

    const auto st = stepwise(counts, edgeless_graph(data.names));
    for (const auto& s : st.history) std::cout << s.move << "  bic " << fixed(s.score, 2) << '\n';
    std::cout << "selected:\n" << format_graph(st.graph);
    std::cout << "Markov equivalent to the generating graph: " << (markov_equivalent(st.graph, g) ? "yes" : "no") << '\n';
}
