#pragma once

#include <admg/graph.hpp>

#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>

namespace admg {

/*
 * Graph text format, one statement per line:
 *
 *   vertices: A B C     # optional; fixes order and declares isolated vertices
 *   A -> B              # directed edge
 *   B <-> C             # bidirected edge
 *
 * '#' starts a comment. Whitespace around tokens is ignored. Vertices that
 * are not pre-declared are registered in order of first appearance.
 */
inline Admg parse_graph(std::istream& in)
{
    std::vector<std::string> labels;
    std::unordered_map<std::string, Vertex> index;
    std::vector<std::pair<Vertex, Vertex>> directed, bidirected;

    auto trim = [](std::string_view s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string_view::npos) return std::string_view{};
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    };
    auto vertex = [&](std::string_view name, int line) {
        if (name.empty() || name.find_first_of(" \t") != std::string_view::npos) {
            throw GraphError("line " + std::to_string(line) + ": bad vertex name '" + std::string(name) + "'");
        }
        auto [it, fresh] = index.emplace(std::string(name), static_cast<Vertex>(labels.size()));
        if (fresh) labels.emplace_back(name);
        return it->second;
    };

    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (auto h = line.find('#'); h != std::string_view::npos) line = line.substr(0, h);
        line = trim(line);
        if (line.empty()) continue;

        if (line.starts_with("vertices:")) {
            std::istringstream names{std::string(line.substr(9))};
            std::string name;
            while (names >> name) vertex(name, line_no);
            continue;
        }
        std::size_t pos;
        if ((pos = line.find("<->")) != std::string_view::npos) {
            auto a = vertex(trim(line.substr(0, pos)), line_no);
            auto b = vertex(trim(line.substr(pos + 3)), line_no);
            bidirected.emplace_back(a, b);
        } else if ((pos = line.find("->")) != std::string_view::npos) {
            auto a = vertex(trim(line.substr(0, pos)), line_no);
            auto b = vertex(trim(line.substr(pos + 2)), line_no);
            directed.emplace_back(a, b);
        } else {
            throw GraphError("line " + std::to_string(line_no) + ": expected 'A -> B', 'A <-> B' or 'vertices:'");
        }
    }
    return Admg(std::move(labels), directed, bidirected);
}

inline Admg parse_graph(const std::string& text)
{
    std::istringstream in(text);
    return parse_graph(in);
}

inline Admg load_graph(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw InputError("cannot open graph file '" + path + "'");
    return parse_graph(in);
}

inline std::string format_graph(const Admg& g)
{
    std::string out = "vertices:";
    for (const auto& l : g.labels()) out += " " + l;
    out += "\n";
    for (const auto& e : g.edges()) {
        out += g.label(e.from) + (e.kind == EdgeKind::directed ? " -> " : " <-> ") + g.label(e.to) + "\n";
    }
    return out;
}

} // namespace admg
