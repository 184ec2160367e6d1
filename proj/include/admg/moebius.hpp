#pragma once

#include <admg/heads.hpp>

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace admg {

// Generalized Möbius parameters, in the order given by Model::params().
using ParamVector = Eigen::VectorXd;
// Joint cell probabilities, indexed by joint state (see Model).
using ProbVector = Eigen::VectorXd;

// The k-th vertex of `vars` (in canonical order) is the (|vars|-1-k)-th bit of
// the returned index, i.e. the first vertex is most significant.
inline std::uint32_t read_state(VertexSet assignment, VertexSet vars)
{
    std::uint32_t idx = 0;
    for (auto v : vars) idx = (idx << 1) | (assignment.contains(v) ? 1u : 0u);
    return idx;
}

// Inverse of read_state: the set of vertices of `vars` that take value 1.
inline VertexSet write_state(std::uint32_t idx, VertexSet vars)
{
    VertexSet out;
    int k = vars.size() - 1;
    for (auto v : vars) {
        if ((idx >> k) & 1u) out.insert(v);
        --k;
    }
    return out;
}

// q_{H|T}^{i_T}
struct ParamIndex
{
    VertexSet head;
    VertexSet tail;
    std::uint32_t tail_state = 0;
    std::size_t head_id = 0;

    bool operator==(const ParamIndex&) const = default;
};

// One term ∏_{H∈[C]} q_{H|T}^{i_T}; `tail_vars` is the union of the tails of
// the blocks of [C].
struct TermIndex
{
    VertexSet c;
    VertexSet tail_vars;
    std::uint32_t tail_state = 0;
};

// Row-compressed sparse pattern with small integer values.
struct SparseIntMatrix
{
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::size_t> row_ptr{0};
    std::vector<std::uint32_t> col;
    std::vector<std::int8_t> val;

    std::size_t nonzeros() const { return col.size(); }

    void push(std::uint32_t c, std::int8_t v)
    {
        col.push_back(c);
        val.push_back(v);
    }
    void end_row()
    {
        row_ptr.push_back(col.size());
        ++rows;
    }

    int at(std::size_t r, std::size_t c) const
    {
        for (auto k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
            if (col[k] == c) return val[k];
        }
        return 0;
    }

    Eigen::MatrixXi dense() const
    {
        Eigen::MatrixXi out = Eigen::MatrixXi::Zero(rows, cols);
        for (std::size_t r = 0; r < rows; ++r) {
            for (auto k = row_ptr[r]; k < row_ptr[r + 1]; ++k) out(r, col[k]) = val[k];
        }
        return out;
    }
};

/*
 * M and P for one district D. The district factor
 *
 *   f_D(i) = Σ_{C: O∩D ⊆ C ⊆ D} (-1)^{|C \ O|} ∏_{H∈[C]} q_{H|T}^{i_T}
 *
 * equals (M exp(P log q_D))_i, with rows of M indexed by the full joint state
 * i. Columns of P are local: column j is global parameter `params[j]`.
 */
struct DistrictMaps
{
    VertexSet district;
    std::vector<TermIndex> terms;
    std::vector<std::size_t> params;
    SparseIntMatrix m;
    SparseIntMatrix p;
};

class Model
{
public:
    static constexpr int max_vertices = 26;

    Model() = default;

    explicit Model(Admg g) : graph_(std::move(g)), heads_(graph_)
    {
        const int n = graph_.size();
        if (n == 0) throw GraphError("graph has no vertices");
        if (n > max_vertices) {
            throw GraphError("joint state space too large: " + std::to_string(n) + " vertices (max "
                             + std::to_string(max_vertices) + ")");
        }
        const std::size_t states = std::size_t{1} << n;
        state_sets_.resize(states);
        for (std::size_t r = 0; r < states; ++r) {
            // bit (n-1-k) of r is vertex k
            VertexSet a;
            for (int k = 0; k < n; ++k) {
                if ((r >> (n - 1 - k)) & 1u) a.insert(k);
            }
            state_sets_[r] = a;
        }

        head_offset_.reserve(heads_.size() + 1);
        for (std::size_t h = 0; h < heads_.size(); ++h) {
            head_offset_.push_back(params_.size());
            const auto& ht = heads_[h];
            const std::uint32_t count = 1u << ht.tail.size();
            for (std::uint32_t s = 0; s < count; ++s) params_.push_back({ht.head, ht.tail, s, h});
        }
        head_offset_.push_back(params_.size());

        const auto ds = graph_.districts();
        for (auto d : ds) maps_.push_back(build_maps(d));
        district_of_param_.resize(params_.size());
        for (std::size_t j = 0; j < maps_.size(); ++j) {
            for (auto k : maps_[j].params) district_of_param_[k] = j;
        }
    }

    const Admg& graph() const { return graph_; }
    const HeadIndex& heads() const { return heads_; }
    const std::vector<ParamIndex>& params() const { return params_; }
    std::size_t num_params() const { return params_.size(); }
    std::size_t num_states() const { return state_sets_.size(); }
    const std::vector<DistrictMaps>& districts() const { return maps_; }
    std::size_t district_of_param(std::size_t j) const { return district_of_param_[j]; }

    std::size_t district_of_vertex(Vertex v) const
    {
        for (std::size_t j = 0; j < maps_.size(); ++j) {
            if (maps_[j].district.contains(v)) return j;
        }
        throw GraphError("unknown vertex");
    }

    // Vertices at value 1 in joint state r.
    VertexSet state_set(std::size_t r) const { return state_sets_[r]; }

    std::size_t state_index(VertexSet ones) const { return read_state(ones, graph_.vertices()); }

    std::size_t param_position(VertexSet head, std::uint32_t tail_state) const
    {
        const auto h = heads_.position(head);
        if (tail_state >= head_offset_[h + 1] - head_offset_[h]) throw GraphError("tail state out of range");
        return head_offset_[h] + tail_state;
    }

    // Parameter for head `head` with tail state read off the joint assignment.
    std::size_t param_for(std::size_t head_id, VertexSet ones) const
    {
        return head_offset_[head_id] + read_state(ones, heads_[head_id].tail);
    }

    std::string param_name(std::size_t j) const
    {
        const auto& pi = params_[j];
        std::string s = "q" + graph_.format(pi.head);
        if (!pi.tail.empty()) {
            s += "|" + graph_.format(pi.tail) + "=";
            int k = pi.tail.size() - 1;
            for ([[maybe_unused]] auto v : pi.tail) s += ((pi.tail_state >> k--) & 1u) ? '1' : '0';
        }
        return s;
    }

private:
    DistrictMaps build_maps(VertexSet d) const
    {
        DistrictMaps out;
        out.district = d;

        std::vector<std::size_t> local(params_.size(), SIZE_MAX);
        for (std::size_t j = 0; j < params_.size(); ++j) {
            if (d.contains(params_[j].head)) {
                local[j] = out.params.size();
                out.params.push_back(j);
            }
        }

        const std::size_t subsets = std::size_t{1} << d.size();
        std::vector<std::size_t> offset(subsets);
        std::vector<VertexSet> tail_vars(subsets);
        for_each_subset(d, [&](VertexSet c) {
            const auto ci = compress_bits(c.bits(), d.bits());
            const auto blocks = partition(heads_, c);
            VertexSet t;
            std::vector<std::size_t> block_heads;
            for (auto h : blocks) {
                block_heads.push_back(heads_.position(h));
                t |= heads_[block_heads.back()].tail;
            }
            offset[ci] = out.terms.size();
            tail_vars[ci] = t;
            const std::uint32_t count = 1u << t.size();
            for (std::uint32_t s = 0; s < count; ++s) {
                out.terms.push_back({c, t, s});
                const auto ones = write_state(s, t);
                for (auto h : block_heads) out.p.push(static_cast<std::uint32_t>(local[param_for(h, ones)]), 1);
                out.p.end_row();
            }
        });
        out.p.cols = out.params.size();

        out.m.cols = out.terms.size();
        for (std::size_t r = 0; r < num_states(); ++r) {
            const auto ones = state_sets_[r];
            const auto zeros = d - ones;
            for_each_subset(d - zeros, [&](VertexSet extra) {
                const auto c = zeros | extra;
                const auto ci = compress_bits(c.bits(), d.bits());
                const auto col = offset[ci] + read_state(ones, tail_vars[ci]);
                out.m.push(static_cast<std::uint32_t>(col), (extra.size() % 2) ? -1 : 1);
            });
            out.m.end_row();
        }
        return out;
    }

    Admg graph_;
    HeadIndex heads_;
    std::vector<ParamIndex> params_;
    std::vector<std::size_t> head_offset_;
    std::vector<VertexSet> state_sets_;
    std::vector<DistrictMaps> maps_;
    std::vector<std::size_t> district_of_param_;
};

inline std::vector<ParamIndex> enumerate_params(const Admg& g)
{
    return Model(g).params();
}

// The maps of district `d` of the model's graph.
inline const DistrictMaps& district_maps(const Model& model, VertexSet d)
{
    for (const auto& dm : model.districts()) {
        if (dm.district == d) return dm;
    }
    throw GraphError(model.graph().format(d) + " is not a district");
}

inline void require_positive(const ParamVector& q, std::size_t expected)
{
    if (static_cast<std::size_t>(q.size()) != expected) {
        throw NumericalError("parameter vector has length " + std::to_string(q.size()) + ", expected "
                             + std::to_string(expected));
    }
    for (Eigen::Index j = 0; j < q.size(); ++j) {
        if (!(q[j] > 0.0) || !std::isfinite(q[j])) {
            throw NumericalError("parameter " + std::to_string(j) + " is not strictly positive");
        }
    }
}

// exp(P log q) evaluated as products of the parameters in each row of P.
inline Eigen::VectorXd term_values(const DistrictMaps& dm, const ParamVector& q)
{
    Eigen::VectorXd t(dm.terms.size());
    for (std::size_t k = 0; k < dm.terms.size(); ++k) {
        double prod = 1.0;
        for (auto e = dm.p.row_ptr[k]; e < dm.p.row_ptr[k + 1]; ++e) prod *= q[dm.params[dm.p.col[e]]];
        t[k] = prod;
    }
    return t;
}

inline Eigen::VectorXd apply_m(const DistrictMaps& dm, const Eigen::VectorXd& t)
{
    Eigen::VectorXd f(dm.m.rows);
    for (std::size_t r = 0; r < dm.m.rows; ++r) {
        double s = 0.0;
        for (auto e = dm.m.row_ptr[r]; e < dm.m.row_ptr[r + 1]; ++e) s += dm.m.val[e] * t[dm.m.col[e]];
        f[r] = s;
    }
    return f;
}

// f_D = M exp(P log q) for one district, over all joint states.
inline Eigen::VectorXd district_factor(const DistrictMaps& dm, const ParamVector& q)
{
    return apply_m(dm, term_values(dm, q));
}

// p(q) = ∏_j M^j exp(P^j log q^j)
inline ProbVector prob_vector(const Model& model, const ParamVector& q)
{
    require_positive(q, model.num_params());
    ProbVector p = ProbVector::Ones(model.num_states());
    for (const auto& dm : model.districts()) p.array() *= district_factor(dm, q).array();
    return p;
}

/*
 * Single cell probability by direct inclusion–exclusion over all C ⊇ O,
 * without the district factorization or the M/P matrices.
 */
inline double prob_direct(const Model& model, const ParamVector& q, VertexSet ones)
{
    require_positive(q, model.num_params());
    const auto& g = model.graph();
    g.require(ones);
    const auto zeros = g.vertices() - ones;
    double total = 0.0;
    for_each_subset(ones, [&](VertexSet extra) {
        double term = 1.0;
        for (auto h : partition(model.heads(), zeros | extra)) term *= q[model.param_for(model.heads().position(h), ones)];
        total += (extra.size() % 2) ? -term : term;
    });
    return total;
}

/*
 * q_{H|T}^{i_T} = P(X_H = 0 | X_T = i_T) for one head, by marginalizing p,
 * written into q. Requires every conditioning marginal to be positive.
 */
inline void head_conditionals(const Model& model, const ProbVector& p, std::size_t head_id, ParamVector& q)
{
    const auto& ht = model.heads()[head_id];
    const std::size_t count = std::size_t{1} << ht.tail.size();
    std::vector<double> num(count, 0.0), den(count, 0.0);
    for (std::size_t r = 0; r < model.num_states(); ++r) {
        const auto ones = model.state_set(r);
        const auto s = read_state(ones, ht.tail);
        den[s] += p[r];
        if (!ones.intersects(ht.head)) num[s] += p[r];
    }
    for (std::size_t s = 0; s < count; ++s) {
        if (!(den[s] > 0.0)) {
            throw NumericalError("zero marginal probability for tail " + model.graph().format(ht.tail));
        }
        q[model.param_position(ht.head, static_cast<std::uint32_t>(s))] = num[s] / den[s];
    }
}

inline ParamVector q_from_p(const Model& model, const ProbVector& p)
{
    if (static_cast<std::size_t>(p.size()) != model.num_states()) throw NumericalError("probability vector has wrong length");
    ParamVector q(model.num_params());
    for (std::size_t h = 0; h < model.heads().size(); ++h) head_conditionals(model, p, h, q);
    return q;
}

} // namespace admg
