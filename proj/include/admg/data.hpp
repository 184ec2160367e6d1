#pragma once

#include <admg/fitting.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace admg {

/*
 * Binary data as cell counts. counts[r] belongs to the state whose bits,
 * read with names[0] as the most significant, spell r.
 */
struct Dataset
{
    std::vector<std::string> names;
    CountVector counts;

    double total() const { return counts.sum(); }
};

namespace detail {

inline std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

inline std::vector<std::string_view> split_csv(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

// Counts stay exact while the total is below 2^53.
constexpr double max_exact_count = 9007199254740992.0;

} // namespace detail

/*
 * CSV with a header row naming the variables. Each further row is one
 * observation of 0/1 values, or, when a column is named `count`, a state and
 * the number of times it was seen. Blank lines and lines starting with '#'
 * are skipped. Missing states get count 0; repeated states add up.
 */
inline Dataset parse_data(std::istream& in, const std::string& source = "data")
{
    std::string raw;
    int line_no = 0;
    auto where = [&] { return source + ":" + std::to_string(line_no) + ": "; };
    auto next_line = [&](std::string_view& out) {
        while (std::getline(in, raw)) {
            ++line_no;
            out = detail::trim(raw);
            if (!out.empty() && out.front() != '#') return true;
        }
        return false;
    };

    std::string_view line;
    if (!next_line(line)) throw InputError(source + ": no header row");
    Dataset d;
    int count_col = -1;
    const auto header = detail::split_csv(line);
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c].empty()) throw InputError(where() + "empty column name");
        if (header[c] == "count") {
            if (count_col >= 0) throw InputError(where() + "more than one count column");
            count_col = static_cast<int>(c);
            continue;
        }
        if (std::find(d.names.begin(), d.names.end(), header[c]) != d.names.end()) {
            throw InputError(where() + "duplicate column '" + std::string(header[c]) + "'");
        }
        d.names.emplace_back(header[c]);
    }
    if (d.names.empty()) throw InputError(where() + "no variable columns");
    if (d.names.size() > static_cast<std::size_t>(Model::max_vertices)) {
        throw InputError(where() + "too many variables (" + std::to_string(d.names.size()) + ")");
    }

    const int nv = static_cast<int>(d.names.size());
    d.counts = CountVector::Zero(Eigen::Index{1} << nv);
    double total = 0;
    while (next_line(line)) {
        const auto cells = detail::split_csv(line);
        if (cells.size() != header.size()) {
            throw InputError(where() + "expected " + std::to_string(header.size()) + " fields, found "
                             + std::to_string(cells.size()));
        }
        std::size_t state = 0;
        double weight = 1;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (static_cast<int>(c) == count_col) {
                unsigned long long k = 0;
                const auto* end = cells[c].data() + cells[c].size();
                const auto [ptr, ec] = std::from_chars(cells[c].data(), end, k);
                if (ec == std::errc::result_out_of_range) throw InputError(where() + "count overflows");
                if (ec != std::errc() || ptr != end) {
                    throw InputError(where() + "count '" + std::string(cells[c]) + "' is not a nonnegative integer");
                }
                weight = static_cast<double>(k);
                continue;
            }
            if (cells[c] != "0" && cells[c] != "1") {
                throw InputError(where() + "value '" + std::string(cells[c]) + "' in column '" + std::string(header[c])
                                 + "' is not 0 or 1");
            }
            state = (state << 1) | (cells[c] == "1" ? 1u : 0u);
        }
        total += weight;
        if (total >= detail::max_exact_count) throw InputError(where() + "total count overflows");
        d.counts[static_cast<Eigen::Index>(state)] += weight;
    }
    return d;
}

inline Dataset load_data(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw InputError("cannot open data file '" + path + "'");
    return parse_data(in, path);
}

// Aggregated form: header, then every state with its count (zeros included).
inline void write_counts(std::ostream& out, const Dataset& d)
{
    for (const auto& n : d.names) out << n << ',';
    out << "count\n";
    const int nv = static_cast<int>(d.names.size());
    for (Eigen::Index r = 0; r < d.counts.size(); ++r) {
        for (int k = nv - 1; k >= 0; --k) out << ((r >> k) & 1) << ',';
        out << static_cast<unsigned long long>(d.counts[r]) << '\n';
    }
}

// One line per observation, states in index order.
inline void write_rows(std::ostream& out, const Dataset& d)
{
    const int nv = static_cast<int>(d.names.size());
    for (int k = 0; k < nv; ++k) out << (k ? "," : "") << d.names[k];
    out << '\n';
    for (Eigen::Index r = 0; r < d.counts.size(); ++r) {
        for (auto i = static_cast<unsigned long long>(d.counts[r]); i > 0; --i) {
            for (int k = nv - 1; k >= 0; --k) out << ((r >> k) & 1) << (k ? "," : "\n");
        }
    }
}

inline void save_data(const std::string& path, const Dataset& d)
{
    std::ofstream out(path);
    if (!out) throw InputError("cannot write data file '" + path + "'");
    write_counts(out, d);
}

/*
 * Counts in the graph's joint-state order. Every data column must be a vertex
 * and every vertex a data column.
 */
inline CountVector counts_for(const Admg& g, const Dataset& d)
{
    std::unordered_map<std::string, int> column;
    for (std::size_t c = 0; c < d.names.size(); ++c) column.emplace(d.names[c], static_cast<int>(c));
    for (const auto& name : d.names) {
        if (!g.has_label(name)) throw InputError("data column '" + name + "' is not a vertex of the graph");
    }
    const int nv = static_cast<int>(d.names.size());
    std::vector<int> bit_of_vertex(g.size());
    for (Vertex v = 0; v < g.size(); ++v) {
        auto it = column.find(g.label(v));
        if (it == column.end()) throw InputError("vertex '" + g.label(v) + "' has no data column");
        bit_of_vertex[v] = nv - 1 - it->second;
    }
    CountVector out = CountVector::Zero(d.counts.size());
    for (Eigen::Index r = 0; r < d.counts.size(); ++r) {
        std::size_t s = 0;
        for (Vertex v = 0; v < g.size(); ++v) s = (s << 1) | ((r >> bit_of_vertex[v]) & 1);
        out[static_cast<Eigen::Index>(s)] += d.counts[r];
    }
    return out;
}

inline Admg edgeless_graph(const std::vector<std::string>& names)
{
    return Admg(names, {}, {});
}

/*
 * n draws from p(q) by inverting the cumulative distribution over joint
 * states. The same seed gives the same data.
 */
inline Dataset simulate(const Model& model, const ParamVector& q, long long n, std::uint64_t seed)
{
    if (n < 1) throw InputError("sample size must be at least 1");
    const auto p = prob_vector(model, q);
    if (p.minCoeff() < -1e-12) throw InputError("parameters give a negative cell probability; they are not in the model");
    std::vector<double> cumulative(p.size());
    std::partial_sum(p.begin(), p.end(), cumulative.begin(), [](double a, double b) { return a + std::max(b, 0.0); });
    const double top = cumulative.back();

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, top);
    Dataset d;
    d.names = model.graph().labels();
    d.counts = CountVector::Zero(p.size());
    for (long long i = 0; i < n; ++i) {
        const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), unif(rng));
        const auto r = std::min<std::ptrdiff_t>(it - cumulative.begin(), p.size() - 1);
        d.counts[r] += 1;
    }
    return d;
}

} // namespace admg
