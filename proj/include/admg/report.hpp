#pragma once

#include <admg/graph_io.hpp>
#include <admg/inference.hpp>

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace admg {

using json = nlohmann::ordered_json;

constexpr int report_version = 1;

inline json labels_json(const Admg& g, VertexSet s)
{
    json out = json::array();
    for (auto v : s) out.push_back(g.label(v));
    return out;
}

// Tail values as a 0/1 string, tail vertices in declaration order.
inline std::string tail_state_string(const ParamIndex& pi)
{
    std::string s;
    for (int k = pi.tail.size() - 1; k >= 0; --k) s += ((pi.tail_state >> k) & 1u) ? '1' : '0';
    return s;
}

struct FitSummary
{
    FitResult fit;
    Goodness gof;
    std::optional<Eigen::VectorXd> std_errors;
    std::vector<std::string> warnings;
};

inline FitSummary summarize(const Model& model, FitResult fit, const CountVector& n)
{
    FitSummary s;
    s.gof = goodness(model, fit, n);
    try {
        auto se = standard_errors(model, fit.q_hat, s.gof.n);
        s.std_errors = se.se;
        if (se.warning) s.warnings.push_back(*se.warning);
    } catch (const NumericalError& e) {
        s.warnings.push_back(std::string("no standard errors: ") + e.what());
    }
    if (fit.possibly_non_unique) s.warnings.push_back("zero counts present: the maximizer may lie on the boundary and need not be unique");
    if (!fit.converged) s.warnings.push_back("did not converge within the cycle limit");
    for (const auto& d : fit.diagnostics) s.warnings.push_back(d);
    s.fit = std::move(fit);
    return s;
}

/*
 * {version, graph, parameters: [{head, tail, tail_state, estimate, std_error}],
 *  loglik, deviance, df, p_value, bic, aic, n, cycles, converged, warnings}
 */
inline json report_json(const Model& model, const FitSummary& s)
{
    const auto& g = model.graph();
    json params = json::array();
    for (std::size_t j = 0; j < model.num_params(); ++j) {
        const auto& pi = model.params()[j];
        json p;
        p["head"] = labels_json(g, pi.head);
        p["tail"] = labels_json(g, pi.tail);
        p["tail_state"] = tail_state_string(pi);
        p["estimate"] = s.fit.q_hat[j];
        p["std_error"] = s.std_errors ? json((*s.std_errors)[j]) : json(nullptr);
        params.push_back(std::move(p));
    }
    json r;
    r["version"] = report_version;
    r["graph"] = format_graph(g);
    r["parameters"] = std::move(params);
    r["loglik"] = s.gof.loglik;
    r["deviance"] = s.gof.deviance;
    r["df"] = s.gof.df;
    r["p_value"] = s.gof.p_value;
    r["bic"] = s.gof.bic;
    r["aic"] = s.gof.aic;
    r["n"] = s.gof.n;
    r["cycles"] = s.fit.cycles;
    r["converged"] = s.fit.converged;
    r["warnings"] = s.warnings;
    return r;
}

inline std::string fixed(double x, int digits = 6)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, x);
    return buf;
}

inline std::string report_text(const Model& model, const FitSummary& s)
{
    std::ostringstream out;
    out << format_graph(model.graph()) << '\n';
    out << "parameter\testimate\tstd_error\n";
    for (std::size_t j = 0; j < model.num_params(); ++j) {
        out << model.param_name(j) << '\t' << fixed(s.fit.q_hat[j]) << '\t'
            << (s.std_errors ? fixed((*s.std_errors)[j]) : std::string("NA")) << '\n';
    }
    out << '\n';
    out << "n         " << static_cast<long long>(s.gof.n) << '\n';
    out << "loglik    " << fixed(s.gof.loglik, 4) << '\n';
    out << "deviance  " << fixed(s.gof.deviance, 4) << " on " << s.gof.df << " df (p = " << fixed(s.gof.p_value, 4) << ")\n";
    out << "bic       " << fixed(s.gof.bic, 4) << '\n';
    out << "aic       " << fixed(s.gof.aic, 4) << '\n';
    out << "cycles    " << s.fit.cycles << (s.fit.converged ? " (converged)" : " (not converged)") << '\n';
    for (const auto& w : s.warnings) out << "warning: " << w << '\n';
    return out.str();
}

/*
 * Head/tail table laid out in two rows:
 *
 *   H  {1}  {2}  ...
 *   T  {}   {1}  ...
 */
inline std::string head_tail_table(const Model& model)
{
    const auto& g = model.graph();
    std::vector<std::string> hs, ts;
    for (const auto& ht : model.heads().all()) {
        hs.push_back(g.format(ht.head));
        ts.push_back(g.format(ht.tail));
    }
    std::string h = "H", t = "T";
    for (std::size_t i = 0; i < hs.size(); ++i) {
        const auto w = std::max(hs[i].size(), ts[i].size());
        h += " " + hs[i] + std::string(w - hs[i].size(), ' ');
        t += " " + ts[i] + std::string(w - ts[i].size(), ' ');
    }
    auto rstrip = [](std::string s) { return s.erase(s.find_last_not_of(' ') + 1); };
    return rstrip(h) + "\n" + rstrip(t) + "\n";
}

inline std::string param_list(const Model& model)
{
    std::string out;
    for (std::size_t j = 0; j < model.num_params(); ++j) out += std::to_string(j) + " " + model.param_name(j) + "\n";
    return out;
}

/*
 * Sparse dump of M and P per district as "row col value" triplets. Header
 * lines (starting with '#') name the index spaces.
 */
inline std::string matrices_dump(const Model& model)
{
    const auto& g = model.graph();
    std::ostringstream out;
    out << "# rows of M: joint states r, bits of r give (";
    bool first = true;
    for (const auto& l : g.labels()) {
        out << (first ? "" : ",") << l;
        first = false;
    }
    out << ") with the first vertex most significant\n";
    for (const auto& dm : model.districts()) {
        out << "district " << g.format(dm.district) << '\n';
        for (std::size_t k = 0; k < dm.terms.size(); ++k) {
            const auto& t = dm.terms[k];
            out << "# term " << k << ": C=" << g.format(t.c) << " tail " << g.format(t.tail_vars) << "=";
            for (int b = t.tail_vars.size() - 1; b >= 0; --b) out << ((t.tail_state >> b) & 1u);
            out << '\n';
        }
        for (std::size_t j = 0; j < dm.params.size(); ++j) {
            out << "# param " << j << ": " << model.param_name(dm.params[j]) << '\n';
        }
        out << "M " << dm.m.rows << ' ' << dm.m.cols << ' ' << dm.m.nonzeros() << '\n';
        for (std::size_t r = 0; r < dm.m.rows; ++r) {
            for (auto e = dm.m.row_ptr[r]; e < dm.m.row_ptr[r + 1]; ++e) out << r << ' ' << dm.m.col[e] << ' ' << int(dm.m.val[e]) << '\n';
        }
        out << "P " << dm.p.rows << ' ' << dm.p.cols << ' ' << dm.p.nonzeros() << '\n';
        for (std::size_t r = 0; r < dm.p.rows; ++r) {
            for (auto e = dm.p.row_ptr[r]; e < dm.p.row_ptr[r + 1]; ++e) out << r << ' ' << dm.p.col[e] << ' ' << int(dm.p.val[e]) << '\n';
        }
    }
    return out.str();
}

/*
 * Parameters from JSON: an object with a "parameters" array (a fit report
 * works) whose entries give head, tail, tail_state and estimate. Every
 * parameter of the model must appear exactly once.
 */
inline ParamVector params_from_json(const Model& model, const json& doc)
{
    const auto& g = model.graph();
    if (!doc.is_object() || !doc.contains("parameters") || !doc["parameters"].is_array()) {
        throw InputError("parameter file needs a \"parameters\" array");
    }
    ParamVector q = ParamVector::Constant(model.num_params(), std::numeric_limits<double>::quiet_NaN());
    try {
        for (const auto& p : doc["parameters"]) {
            const auto head = g.set(p.at("head").get<std::vector<std::string>>());
            const auto tail = g.set(p.value("tail", std::vector<std::string>{}));
            const auto bits = p.value("tail_state", std::string{});
            if (!model.heads().contains(head)) throw InputError(g.format(head) + " is not a head of the graph");
            const auto& ht = model.heads()[model.heads().position(head)];
            if (ht.tail != tail) {
                throw InputError("head " + g.format(head) + " has tail " + g.format(ht.tail) + ", not " + g.format(tail));
            }
            if (bits.size() != static_cast<std::size_t>(tail.size()) || bits.find_first_not_of("01") != std::string::npos) {
                throw InputError("tail_state '" + bits + "' does not match tail " + g.format(tail));
            }
            std::uint32_t state = 0;
            for (char c : bits) state = (state << 1) | (c == '1' ? 1u : 0u);
            const auto j = model.param_position(head, state);
            if (!std::isnan(q[j])) throw InputError("parameter " + model.param_name(j) + " given twice");
            q[j] = p.at("estimate").get<double>();
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("bad parameter file: ") + e.what());
    } catch (const GraphError& e) {
        throw InputError(std::string("bad parameter file: ") + e.what());
    }
    for (std::size_t j = 0; j < model.num_params(); ++j) {
        if (std::isnan(q[j])) throw InputError("parameter " + model.param_name(j) + " is missing");
        if (!(q[j] > 0 && q[j] < 1)) throw InputError("parameter " + model.param_name(j) + " is not in (0,1)");
    }
    return q;
}

inline json load_json(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError(path + ": " + e.what());
    }
}

} // namespace admg
