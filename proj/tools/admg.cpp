// admg: fit, select and inspect binary ADMG models from the command line.
//
// Exit status: 0 success, 2 bad input, 3 no convergence or numerical failure.

#include <admg/bench.hpp>
#include <admg/data.hpp>
#include <admg/graph_io.hpp>
#include <admg/report.hpp>
#include <admg/select.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <thread>

namespace {

using namespace admg;

constexpr int exit_ok = 0;
constexpr int exit_input = 2;
constexpr int exit_numerical = 3;

struct FitArgs
{
    std::string graph, data, out = "json";
    double tol = 1e-8;
    int max_cycles = 5000;
    bool allow_zero = false;
    int starts = 1;
    std::uint64_t seed = 1;
    unsigned jobs = 1;
};

FitOptions fit_options(const FitArgs& a)
{
    FitOptions o;
    o.tol = a.tol;
    o.max_cycles = a.max_cycles;
    o.allow_zero_counts = a.allow_zero;
    o.starts = a.starts;
    o.seed = a.seed;
    o.jobs = a.jobs;
    o.validate();
    return o;
}

int run_fit(const FitArgs& a)
{
    const auto g = load_graph(a.graph);
    const Model model(g);
    const auto counts = counts_for(g, load_data(a.data));
    const auto summary = summarize(model, fit_districts_parallel(model, counts, fit_options(a)), counts);
    if (a.out == "json") std::cout << report_json(model, summary).dump(2) << '\n';
    else std::cout << report_text(model, summary);
    return summary.fit.converged ? exit_ok : exit_numerical;
}

struct SelectArgs
{
    FitArgs fit;
    std::string criterion = "bic", start;
};

int run_select(const SelectArgs& a)
{
    const auto data = load_data(a.fit.data);
    const auto g0 = a.start.empty() ? edgeless_graph(data.names) : load_graph(a.start);
    const auto counts = counts_for(g0, data);
    SelectOptions o;
    o.criterion = a.criterion == "aic" ? Criterion::aic : Criterion::bic;
    o.fit = fit_options(a.fit);
    o.fit.jobs = 1;
    o.jobs = a.fit.jobs;
    const auto st = stepwise(counts, g0, o);
    std::cout << "step\tmove\t" << a.criterion << "\tdeviance\tdf\n";
    for (std::size_t i = 0; i < st.history.size(); ++i) {
        const auto& s = st.history[i];
        std::cout << i << '\t' << s.move << '\t' << fixed(s.score, 4) << '\t' << fixed(s.deviance, 4) << '\t' << s.df << '\n';
    }
    std::cout << '\n' << format_graph(st.graph);
    for (const auto& w : st.warnings) std::cerr << "warning: " << w << '\n';
    return exit_ok;
}

int run_msep(const std::string& graph, const std::vector<std::string>& x, const std::vector<std::string>& y,
             const std::vector<std::string>& z)
{
    const auto g = load_graph(graph);
    auto set = [&](const std::vector<std::string>& names) {
        try {
            return g.set(names);
        } catch (const GraphError& e) {
            throw InputError(e.what());
        }
    };
    const auto path = m_connecting_path(g, set(x), set(y), set(z));
    if (!path) {
        std::cout << "true\n";
    } else {
        std::cout << "false\n" << "path: " << format_path(g, *path) << '\n';
    }
    return exit_ok;
}

int run_info(const std::string& graph, bool matrices)
{
    const Model model(load_graph(graph));
    const auto& g = model.graph();
    std::cout << format_graph(g) << '\n';
    std::cout << "districts:";
    for (const auto& dm : model.districts()) std::cout << ' ' << g.format(dm.district);
    std::cout << "\n\n" << head_tail_table(model) << '\n';
    std::cout << "parameters: " << model.num_params() << '\n' << param_list(model);
    if (matrices) std::cout << '\n' << matrices_dump(model);
    return exit_ok;
}

int run_simulate(const std::string& graph, const std::string& params, long long n, std::uint64_t seed,
                 const std::string& out, bool raw)
{
    const Model model(load_graph(graph));
    const auto q = params_from_json(model, load_json(params));
    const auto data = simulate(model, q, n, seed);
    std::ofstream file;
    if (!out.empty()) {
        file.open(out);
        if (!file) throw InputError("cannot write '" + out + "'");
    }
    std::ostream& os = out.empty() ? std::cout : file;
    if (raw) write_rows(os, data);
    else write_counts(os, data);
    return exit_ok;
}

int run_bench(const std::string& family, int k_max, long long n, int repeats, std::uint64_t seed, unsigned jobs)
{
    FitOptions o;
    o.jobs = jobs;
    const auto fam = family == "fixed" ? BenchFamily::fixed : BenchFamily::large;
    write_bench_header(std::cout);
    for (int k = 1; k <= k_max; ++k) {
        write_bench_row(std::cout, bench_one(fam, k, n, seed, repeats, o));
        std::cout.flush();
    }
    return exit_ok;
}

void add_fit_options(CLI::App* cmd, FitArgs& a)
{
    cmd->add_option("--data", a.data, "CSV data file (header row; optional count column)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--tol", a.tol, "stop when a cycle gains less log-likelihood than this")->capture_default_str();
    cmd->add_option("--max-cycles", a.max_cycles, "cycle limit")->capture_default_str();
    cmd->add_flag("--allow-zero-counts", a.allow_zero, "accept zero cells (the optimum may be on the boundary)");
    cmd->add_option("--starts", a.starts, "number of starts (jittered after the first)")->capture_default_str();
    cmd->add_option("--seed", a.seed, "seed for jittered starts")->capture_default_str();
    cmd->add_option("--jobs", a.jobs, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Maximum likelihood fitting of binary ADMG models"};
    app.require_subcommand(1);

    FitArgs fit_args;
    auto* fit = app.add_subcommand("fit", "fit a graph to data");
    fit->add_option("--graph", fit_args.graph, "graph file")->required()->check(CLI::ExistingFile);
    add_fit_options(fit, fit_args);
    fit->add_option("--out", fit_args.out, "report format")->check(CLI::IsMember({"json", "text"}))->capture_default_str();

    SelectArgs sel_args;
    auto* sel = app.add_subcommand("select", "stepwise search over one-edge moves");
    add_fit_options(sel, sel_args.fit);
    sel->add_option("--criterion", sel_args.criterion, "bic or aic")->check(CLI::IsMember({"bic", "aic"}))->capture_default_str();
    sel->add_option("--start", sel_args.start, "starting graph (default: no edges)")->check(CLI::ExistingFile);

    std::string ms_graph;
    std::vector<std::string> ms_x, ms_y, ms_z;
    auto* ms = app.add_subcommand("msep", "test X _||_ Y | Z by m-separation");
    ms->add_option("--graph", ms_graph, "graph file")->required()->check(CLI::ExistingFile);
    ms->add_option("--x", ms_x, "comma-separated vertices")->required()->delimiter(',');
    ms->add_option("--y", ms_y, "comma-separated vertices")->required()->delimiter(',');
    ms->add_option("--given", ms_z, "comma-separated vertices")->delimiter(',');

    std::string info_graph;
    bool info_matrices = false;
    auto* info = app.add_subcommand("info", "heads, tails and parameters of a graph");
    info->add_option("--graph", info_graph, "graph file")->required()->check(CLI::ExistingFile);
    info->add_flag("--matrices", info_matrices, "also dump M and P");

    std::string sim_graph, sim_params, sim_out;
    long long sim_n = 0;
    std::uint64_t sim_seed = 1;
    bool sim_raw = false;
    auto* sim = app.add_subcommand("simulate", "draw data from a parametrized graph");
    sim->add_option("--graph", sim_graph, "graph file")->required()->check(CLI::ExistingFile);
    sim->add_option("--params", sim_params, "JSON with a parameters array (a fit report works)")->required()->check(CLI::ExistingFile);
    sim->add_option("--n", sim_n, "sample size")->required()->check(CLI::PositiveNumber);
    sim->add_option("--seed", sim_seed, "random seed")->capture_default_str();
    sim->add_option("--output", sim_out, "write here instead of stdout");
    sim->add_flag("--raw", sim_raw, "one row per observation instead of counts");

    std::string bench_family = "fixed";
    int bench_k = 5, bench_repeats = 1;
    long long bench_n = 5000;
    std::uint64_t bench_seed = 1;
    unsigned bench_jobs = 1;
    auto* bench = app.add_subcommand("bench", "time fits on expandable graph families (CSV)");
    bench->add_option("--family", bench_family, "fixed or large")->check(CLI::IsMember({"fixed", "large"}))->capture_default_str();
    bench->add_option("--k-max", bench_k, "largest k")->check(CLI::Range(1, 13))->capture_default_str();
    bench->add_option("--n", bench_n, "observations per data set")->check(CLI::PositiveNumber)->capture_default_str();
    bench->add_option("--repeats", bench_repeats, "fits averaged per k")->check(CLI::PositiveNumber)->capture_default_str();
    bench->add_option("--seed", bench_seed, "data seed")->capture_default_str();
    bench->add_option("--jobs", bench_jobs, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_input;
    }

    try {
        if (*fit) return run_fit(fit_args);
        if (*sel) return run_select(sel_args);
        if (*ms) return run_msep(ms_graph, ms_x, ms_y, ms_z);
        if (*info) return run_info(info_graph, info_matrices);
        if (*sim) return run_simulate(sim_graph, sim_params, sim_n, sim_seed, sim_out, sim_raw);
        if (*bench) return run_bench(bench_family, bench_k, bench_n, bench_repeats, bench_seed, bench_jobs);
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_input;
    } catch (const GraphError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_input;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return exit_numerical;
    }
    return exit_ok;
}
