#pragma once

#include <admg/moebius.hpp>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace admg {

// Cell counts in joint-state order (see Model). Whole numbers held as doubles.
using CountVector = Eigen::VectorXd;

// "0110": the value of each vertex in joint state r, in declaration order.
inline std::string state_label(const Model& model, std::size_t r)
{
    std::string s;
    const auto ones = model.state_set(r);
    for (auto v : model.graph().vertices()) s += ones.contains(v) ? '1' : '0';
    return s;
}

inline void check_counts(const Model& model, const CountVector& n, bool allow_zero)
{
    if (static_cast<std::size_t>(n.size()) != model.num_states()) {
        throw InputError("count vector has " + std::to_string(n.size()) + " cells, expected "
                         + std::to_string(model.num_states()));
    }
    for (Eigen::Index r = 0; r < n.size(); ++r) {
        if (!std::isfinite(n[r]) || n[r] < 0 || n[r] != std::floor(n[r])) {
            throw InputError("count for cell " + state_label(model, r) + " is not a nonnegative whole number");
        }
        if (n[r] == 0 && !allow_zero) {
            throw InputError("cell " + state_label(model, r)
                             + " has a zero count; strict mode needs every count positive (see --allow-zero-counts)");
        }
    }
    if (n.sum() < 1) throw InputError("data contain no observations");
}

struct ArmijoOptions
{
    double initial_step = 1.0;
    double beta = 0.5;
    double sigma = 1e-4;
};

struct FitOptions
{
    double tol = 1e-8;          // stop when a full cycle gains less log-likelihood than this
    int max_cycles = 5000;
    ArmijoOptions armijo;
    int max_inner = 100;        // line-search iterations per vertex update
    double slack = 1e-12;       // every cell probability is kept >= slack
    std::uint64_t seed = 1;     // for jittered restarts
    int starts = 1;
    bool allow_zero_counts = false;
    unsigned jobs = 1;          // worker threads for district-parallel fits

    void validate() const
    {
        if (!(tol > 0)) throw InputError("tolerance must be positive");
        if (max_cycles < 1) throw InputError("max cycles must be at least 1");
        if (!(armijo.initial_step > 0)) throw InputError("initial step must be positive");
        if (!(armijo.beta > 0 && armijo.beta < 1)) throw InputError("backtracking factor must lie in (0,1)");
        if (!(armijo.sigma > 0 && armijo.sigma < 1)) throw InputError("sufficient-increase constant must lie in (0,1)");
        if (max_inner < 1) throw InputError("inner iteration cap must be at least 1");
        if (!(slack >= 0)) throw InputError("slack must be nonnegative");
        if (starts < 1) throw InputError("number of starts must be at least 1");
        if (jobs < 1) throw InputError("jobs must be at least 1");
    }
};

/*
 * The cell probabilities as an affine function of the parameters whose heads
 * contain `vertex`, all others held fixed: p = a * theta - b.
 */
struct VertexBlock
{
    Vertex vertex = 0;
    std::vector<std::size_t> params;
    Eigen::VectorXd theta;
    Eigen::MatrixXd a;
    Eigen::VectorXd b;
};

struct UpdateResult
{
    Eigen::VectorXd theta;
    double loglik_before = 0;
    double loglik = 0;
    int iterations = 0;
    bool moved = false;
    bool stalled = false;
};

struct FitResult
{
    ParamVector q_hat;
    ProbVector p_hat;
    double loglik = 0;
    int cycles = 0;
    bool converged = false;
    // relaxed zero-count mode with zero cells present: the optimum may sit on
    // the boundary and need not be unique
    bool possibly_non_unique = false;
    int projections = 0;
    int stalls = 0;
    std::vector<std::string> diagnostics;
};

// Σ n_i log p_i over cells with n_i > 0; -inf when some p_i < slack.
inline double block_loglik(const Eigen::VectorXd& p, const Eigen::VectorXd& w, double slack)
{
    double l = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (!(p[i] >= slack)) return -std::numeric_limits<double>::infinity();
        if (w[i] > 0) l += w[i] * std::log(p[i]);
    }
    return l;
}

/*
 * Maximize Σ w_i log (a θ - b)_i over θ with a θ - b >= slack. Newton-scaled
 * ascent directions with Armijo backtracking; a step is shortened until it is
 * both feasible and sufficiently increasing.
 */
inline UpdateResult update_vertex(const VertexBlock& block, const Eigen::VectorXd& w, const FitOptions& opts)
{
    UpdateResult out;
    out.theta = block.theta;
    Eigen::VectorXd p = block.a * out.theta - block.b;
    // a cell already below the slack (boundary optimum with zero counts) may
    // stay where it is but not drop further
    const double slack = std::min(opts.slack, std::max(0.0, p.minCoeff()));
    double l = block_loglik(p, w, slack);
    if (!std::isfinite(l)) throw NumericalError("vertex update started from an infeasible point");
    out.loglik_before = l;

    const Eigen::Index m = out.theta.size();
    int polish = 0;
    for (int it = 0; it < opts.max_inner; ++it) {
        out.iterations = it + 1;
        const Eigen::VectorXd ratio = w.cwiseQuotient(p);
        const Eigen::VectorXd grad = block.a.transpose() * ratio;
        const Eigen::MatrixXd scaled = block.a.array().colwise() * (w.cwiseSqrt().cwiseQuotient(p)).array();
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m, m);
        h.selfadjointView<Eigen::Lower>().rankUpdate(scaled.transpose());
        h = h.selfadjointView<Eigen::Lower>();

        Eigen::VectorXd d = grad;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
        if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
            Eigen::VectorXd newton = ldlt.solve(grad);
            if (newton.allFinite() && grad.dot(newton) > 0) d = newton;
        }
        const double decrement = grad.dot(d);
        if (!(decrement > 0)) break;
        if (decrement < 1e-10 * (1.0 + std::abs(l))) {
            // near the maximizer the gain is at rounding level: take a few
            // plain Newton steps that lose no more than rounding
            const Eigen::VectorXd theta_new = out.theta + d;
            const Eigen::VectorXd p_new = block.a * theta_new - block.b;
            const double l_new = block_loglik(p_new, w, slack);
            if (++polish > 8 || !std::isfinite(l_new) || l_new < l - 1e-13 * (1.0 + std::abs(l))) break;
            const bool tiny = (theta_new - out.theta).cwiseAbs().maxCoeff() <= 1e-15 * (1.0 + out.theta.cwiseAbs().maxCoeff());
            if (theta_new != out.theta) out.moved = true;
            out.theta = theta_new;
            p = p_new;
            l = l_new;
            if (tiny) break;
            continue;
        }

        double step = opts.armijo.initial_step;
        Eigen::VectorXd theta_new, p_new;
        double l_new = l;
        bool accepted = false;
        while (step > 1e-20) {
            theta_new = out.theta + step * d;
            p_new = block.a * theta_new - block.b;
            l_new = block_loglik(p_new, w, slack);
            if (std::isfinite(l_new) && l_new >= l + opts.armijo.sigma * step * decrement) {
                accepted = true;
                break;
            }
            step *= opts.armijo.beta;
        }
        if (!accepted) {
            out.stalled = true;
            break;
        }
        if (theta_new != out.theta) out.moved = true;
        out.theta = theta_new;
        p = p_new;
        l = l_new;
    }
    out.loglik = l;
    return out;
}

/*
 * Independence start: q_{H|T}^{i_T} = ∏_{v∈H} m_v with m_v the proportion of
 * observations with X_v = 0. In relaxed mode the proportions are clamped into
 * [1/(2n), 1 - 1/(2n)] so the start is interior.
 */
inline ParamVector independence_params(const Model& model, const std::vector<double>& margins)
{
    ParamVector q(model.num_params());
    for (std::size_t j = 0; j < model.num_params(); ++j) {
        double prod = 1.0;
        for (auto v : model.params()[j].head) prod *= margins[v];
        q[j] = prod;
    }
    return q;
}

inline std::vector<double> zero_margins(const Model& model, const CountVector& n, bool allow_zero)
{
    const double total = n.sum();
    std::vector<double> m(model.graph().size(), 0.0);
    for (std::size_t r = 0; r < model.num_states(); ++r) {
        const auto ones = model.state_set(r);
        for (auto v : model.graph().vertices()) {
            if (!ones.contains(v)) m[v] += n[r];
        }
    }
    for (auto& x : m) {
        x /= total;
        if (allow_zero) x = std::clamp(x, 0.5 / total, 1.0 - 0.5 / total);
    }
    return m;
}

inline ParamVector initialize(const Model& model, const CountVector& n, bool allow_zero = false)
{
    check_counts(model, n, allow_zero);
    return independence_params(model, zero_margins(model, n, allow_zero));
}

namespace detail {

struct DistrictOutcome
{
    ParamVector q;
    double loglik = 0;
    int cycles = 0;
    bool converged = false;
    int projections = 0;
    int stalls = 0;
    std::vector<std::string> diagnostics;
};

/*
 * Fitting state for one district D. The district factor depends only on the
 * vertices of D and the tails of its heads ("local" variables), so rows are
 * the joint states of those variables and counts are marginalized onto them.
 */
class DistrictFit
{
public:
    DistrictFit(const Model& model, std::size_t j) : model_(&model), dm_(&model.districts()[j])
    {
        VertexSet u = dm_->district;
        for (const auto& t : dm_->terms) u |= t.tail_vars;
        vars_ = u;
        const std::size_t rows = std::size_t{1} << u.size();
        full_row_.resize(rows);
        for (std::size_t r = 0; r < rows; ++r) full_row_[r] = model.state_index(write_state(static_cast<std::uint32_t>(r), u));

        for (auto c : dm_->params) {
            const auto h = model.params()[c].head_id;
            if (std::find(head_ids_.begin(), head_ids_.end(), h) == head_ids_.end()) head_ids_.push_back(h);
        }

        const std::size_t terms = dm_->terms.size();
        for (auto v : dm_->district) {
            VertexTerms vt;
            vt.vertex = v;
            std::vector<int> to_theta(dm_->params.size(), -1);
            for (std::size_t c = 0; c < dm_->params.size(); ++c) {
                if (model.params()[dm_->params[c]].head.contains(v)) {
                    to_theta[c] = static_cast<int>(vt.params.size());
                    vt.params.push_back(dm_->params[c]);
                }
            }
            vt.theta_of_term.assign(terms, -1);
            vt.entry_of_term.assign(terms, 0);
            for (std::size_t k = 0; k < terms; ++k) {
                for (auto e = dm_->p.row_ptr[k]; e < dm_->p.row_ptr[k + 1]; ++e) {
                    if (to_theta[dm_->p.col[e]] >= 0) {
                        vt.theta_of_term[k] = to_theta[dm_->p.col[e]];
                        vt.entry_of_term[k] = e;
                    }
                }
            }
            vertices_.push_back(std::move(vt));
        }
    }

    VertexSet vars() const { return vars_; }
    std::size_t rows() const { return full_row_.size(); }

    // local row of full joint state r
    std::size_t local_row(std::size_t r) const { return read_state(model_->state_set(r), vars_); }

    Eigen::VectorXd local_counts(const CountVector& n) const
    {
        Eigen::VectorXd out = Eigen::VectorXd::Zero(rows());
        for (std::size_t r = 0; r < model_->num_states(); ++r) out[local_row(r)] += n[r];
        return out;
    }

    Eigen::VectorXd factor(const ParamVector& q) const
    {
        const auto t = term_values(*dm_, q);
        Eigen::VectorXd f(rows());
        for (std::size_t u = 0; u < rows(); ++u) {
            const auto r = full_row_[u];
            double s = 0.0;
            for (auto e = dm_->m.row_ptr[r]; e < dm_->m.row_ptr[r + 1]; ++e) s += dm_->m.val[e] * t[dm_->m.col[e]];
            f[u] = s;
        }
        return f;
    }

    // Block for the k-th vertex of the district, over local rows.
    VertexBlock block(std::size_t k, const ParamVector& q) const
    {
        const auto& vt = vertices_[k];
        const std::size_t terms = dm_->terms.size();
        Eigen::VectorXd value(terms);  // full term, or its coefficient when it has a theta factor
        for (std::size_t i = 0; i < terms; ++i) {
            double prod = 1.0;
            for (auto e = dm_->p.row_ptr[i]; e < dm_->p.row_ptr[i + 1]; ++e) {
                if (vt.theta_of_term[i] >= 0 && e == vt.entry_of_term[i]) continue;
                prod *= q[dm_->params[dm_->p.col[e]]];
            }
            value[i] = prod;
        }

        VertexBlock out;
        out.vertex = vt.vertex;
        out.params = vt.params;
        out.theta.resize(vt.params.size());
        for (std::size_t c = 0; c < vt.params.size(); ++c) out.theta[c] = q[vt.params[c]];
        out.a = Eigen::MatrixXd::Zero(rows(), vt.params.size());
        out.b = Eigen::VectorXd::Zero(rows());
        for (std::size_t u = 0; u < rows(); ++u) {
            const auto r = full_row_[u];
            for (auto e = dm_->m.row_ptr[r]; e < dm_->m.row_ptr[r + 1]; ++e) {
                const auto term = dm_->m.col[e];
                const double x = dm_->m.val[e] * value[term];
                if (vt.theta_of_term[term] >= 0) out.a(u, vt.theta_of_term[term]) += x;
                else out.b[u] -= x;
            }
        }
        return out;
    }

    std::size_t num_vertices() const { return vertices_.size(); }

    /*
     * Cycle through the district's vertices until a full cycle gains less than
     * opts.tol or nothing moves. `other` is the product of the remaining
     * district factors over full joint states; it is only used to map back
     * into the parameter space (q <- q(p(q))) after each vertex update.
     */
    DistrictOutcome run(const ParamVector& start, const Eigen::VectorXd& counts, const Eigen::VectorXd& other,
                        const FitOptions& opts) const
    {
        DistrictOutcome out;
        out.q = start;
        double l = block_loglik(factor(out.q), counts, opts.slack);
        if (!std::isfinite(l)) throw NumericalError("starting point gives a zero cell probability");

        for (int cycle = 1; cycle <= opts.max_cycles; ++cycle) {
            const double l_cycle = l;
            bool moved = false;
            for (std::size_t k = 0; k < vertices_.size(); ++k) {
                const auto res = update_vertex(block(k, out.q), counts, opts);
                if (res.loglik < res.loglik_before - 1e-12 * (1.0 + std::abs(res.loglik_before))) {
                    out.diagnostics.push_back("log-likelihood decreased while updating vertex "
                                              + model_->graph().label(vertices_[k].vertex));
                }
                if (res.stalled) ++out.stalls;
                if (res.moved) {
                    moved = true;
                    for (std::size_t c = 0; c < vertices_[k].params.size(); ++c) out.q[vertices_[k].params[c]] = res.theta[c];
                    l = res.loglik;
                    project(out, l, counts, other, opts);
                }
            }
            out.cycles = cycle;
            if (!std::isfinite(l)) throw NumericalError("non-finite log-likelihood");
            if (!moved || l - l_cycle < opts.tol) {
                out.converged = true;
                break;
            }
        }
        out.loglik = l;
        return out;
    }

private:
    struct VertexTerms
    {
        Vertex vertex = 0;
        std::vector<std::size_t> params;
        std::vector<int> theta_of_term;
        std::vector<std::size_t> entry_of_term;
    };

    // Replace q by q(p(q)) when the two differ and the likelihood does not drop.
    void project(DistrictOutcome& out, double& l, const Eigen::VectorXd& counts, const Eigen::VectorXd& other,
                 const FitOptions& opts) const
    {
        const auto f = factor(out.q);
        ProbVector p(model_->num_states());
        for (std::size_t r = 0; r < model_->num_states(); ++r) p[r] = other[r] * f[local_row(r)];
        ParamVector mapped = out.q;
        try {
            for (auto h : head_ids_) head_conditionals(*model_, p, h, mapped);
        } catch (const NumericalError&) {
            out.diagnostics.push_back("projection skipped: zero marginal");
            return;
        }
        double diff = 0.0;
        for (auto c : dm_->params) diff = std::max(diff, std::abs(mapped[c] - out.q[c]));
        if (diff <= 1e-9) return;
        const double l_mapped = block_loglik(factor(mapped), counts, opts.slack);
        if (!(l_mapped >= l - 1e-9 * (1.0 + std::abs(l)))) {
            out.diagnostics.push_back("projection onto the model would lower the log-likelihood in district "
                                      + model_->graph().format(dm_->district) + "; kept the unprojected point");
            return;
        }
        out.q = mapped;
        l = l_mapped;
        ++out.projections;
    }

    const Model* model_;
    const DistrictMaps* dm_;
    VertexSet vars_;
    std::vector<std::size_t> full_row_;
    std::vector<std::size_t> head_ids_;
    std::vector<VertexTerms> vertices_;
};

// Product of all district factors except district `skip`, over full joint states.
inline Eigen::VectorXd other_factors(const Model& model, const ParamVector& q, std::size_t skip)
{
    Eigen::VectorXd g = Eigen::VectorXd::Ones(model.num_states());
    for (std::size_t j = 0; j < model.districts().size(); ++j) {
        if (j != skip) g.array() *= district_factor(model.districts()[j], q).array();
    }
    return g;
}

template <class Fn>
void run_indexed(std::size_t count, unsigned jobs, Fn fn)
{
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, jobs), count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = next++; i < count; i = next++) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

inline FitResult fit_one(const Model& model, const CountVector& n, const ParamVector& start, const FitOptions& opts,
                         unsigned jobs)
{
    require_positive(start, model.num_params());
    const std::size_t nd = model.districts().size();
    std::vector<DistrictOutcome> outcomes(nd);
    run_indexed(nd, jobs, [&](std::size_t j) {
        const DistrictFit df(model, j);
        outcomes[j] = df.run(start, df.local_counts(n), other_factors(model, start, j), opts);
    });

    FitResult res;
    res.q_hat = start;
    res.converged = true;
    for (std::size_t j = 0; j < nd; ++j) {
        for (auto c : model.districts()[j].params) res.q_hat[c] = outcomes[j].q[c];
        res.cycles = std::max(res.cycles, outcomes[j].cycles);
        res.converged = res.converged && outcomes[j].converged;
        res.projections += outcomes[j].projections;
        res.stalls += outcomes[j].stalls;
        res.diagnostics.insert(res.diagnostics.end(), outcomes[j].diagnostics.begin(), outcomes[j].diagnostics.end());
    }
    res.p_hat = prob_vector(model, res.q_hat);
    res.loglik = block_loglik(res.p_hat, n, 0.0);
    if (!std::isfinite(res.loglik)) throw NumericalError("fitted distribution gives a non-finite log-likelihood");
    res.possibly_non_unique = (n.array() == 0).any();
    return res;
}

inline FitResult fit_starts(const Model& model, const CountVector& n, const FitOptions& opts, unsigned jobs)
{
    opts.validate();
    check_counts(model, n, opts.allow_zero_counts);
    const auto margins = zero_margins(model, n, opts.allow_zero_counts);
    FitResult best = fit_one(model, n, independence_params(model, margins), opts, jobs);
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> unif(-0.5, 0.5);
    for (int s = 1; s < opts.starts; ++s) {
        auto jittered = margins;
        for (auto& m : jittered) m += unif(rng) * std::min(m, 1.0 - m);
        auto res = fit_one(model, n, independence_params(model, jittered), opts, jobs);
        if (res.loglik > best.loglik) best = std::move(res);
    }
    return best;
}

} // namespace detail

/*
 * p = A^v θ^v - b^v over full joint states, with every parameter whose head
 * does not contain v held at its value in q.
 */
inline VertexBlock vertex_block(const Model& model, const ParamVector& q, Vertex v)
{
    require_positive(q, model.num_params());
    const auto j = model.district_of_vertex(v);
    const detail::DistrictFit df(model, j);
    const auto d = model.districts()[j].district;
    std::size_t k = 0;
    for (auto x : d) {
        if (x == v) break;
        ++k;
    }
    const auto local = df.block(k, q);
    const auto g = detail::other_factors(model, q, j);
    VertexBlock out;
    out.vertex = v;
    out.params = local.params;
    out.theta = local.theta;
    out.a.resize(model.num_states(), local.a.cols());
    out.b.resize(model.num_states());
    for (std::size_t r = 0; r < model.num_states(); ++r) {
        const auto u = df.local_row(r);
        out.a.row(r) = g[r] * local.a.row(u);
        out.b[r] = g[r] * local.b[u];
    }
    return out;
}

// Block-coordinate ascent over districts one after another.
inline FitResult fit(const Model& model, const CountVector& n, const FitOptions& opts = {})
{
    return detail::fit_starts(model, n, opts, 1);
}

// Same result as fit; districts are fitted on up to opts.jobs threads.
inline FitResult fit_districts_parallel(const Model& model, const CountVector& n, const FitOptions& opts = {})
{
    return detail::fit_starts(model, n, opts, opts.jobs);
}

// Fit from a given feasible starting point (e.g. a warm start).
inline FitResult fit_from(const Model& model, const CountVector& n, const ParamVector& start, const FitOptions& opts = {})
{
    opts.validate();
    check_counts(model, n, opts.allow_zero_counts);
    return detail::fit_one(model, n, start, opts, opts.jobs);
}

} // namespace admg
