#pragma once

#include <admg/fitting.hpp>

#include <boost/math/special_functions/gamma.hpp>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace admg {

// ∂p_i/∂q_j: rows are joint states, columns are parameters.
using Jacobian = Eigen::MatrixXd;

/*
 * Within a district, ∂f/∂q_k = M diag(t) P e_k / q_k with t = exp(P log q).
 * Across districts p is a product, so column k picks up the factors of every
 * other district.
 */
inline Jacobian dp_dq(const Model& model, const ParamVector& q)
{
    require_positive(q, model.num_params());
    const auto& districts = model.districts();
    std::vector<Eigen::VectorXd> factors;
    for (const auto& dm : districts) factors.push_back(district_factor(dm, q));

    Jacobian jac = Jacobian::Zero(model.num_states(), model.num_params());
    for (std::size_t d = 0; d < districts.size(); ++d) {
        const auto& dm = districts[d];
        Eigen::VectorXd others = Eigen::VectorXd::Ones(model.num_states());
        for (std::size_t e = 0; e < districts.size(); ++e) {
            if (e != d) others.array() *= factors[e].array();
        }
        const auto t = term_values(dm, q);

        // diag(t) P / q, one sparse row per term
        Eigen::MatrixXd tp = Eigen::MatrixXd::Zero(dm.terms.size(), dm.params.size());
        for (std::size_t k = 0; k < dm.terms.size(); ++k) {
            for (auto e = dm.p.row_ptr[k]; e < dm.p.row_ptr[k + 1]; ++e) {
                const auto j = dm.p.col[e];
                tp(k, j) += dm.p.val[e] * t[k] / q[dm.params[j]];
            }
        }
        for (std::size_t r = 0; r < dm.m.rows; ++r) {
            for (auto e = dm.m.row_ptr[r]; e < dm.m.row_ptr[r + 1]; ++e) {
                const double mv = dm.m.val[e] * others[r];
                const auto k = dm.m.col[e];
                for (std::size_t j = 0; j < dm.params.size(); ++j) {
                    if (tp(k, j) != 0.0) jac(r, dm.params[j]) += mv * tp(k, j);
                }
            }
        }
    }
    return jac;
}

// Per-observation information Jᵀ (diag 1/p − 11ᵀ) J.
inline Eigen::MatrixXd fisher_information(const Model& model, const ParamVector& q)
{
    const auto jac = dp_dq(model, q);
    const auto p = prob_vector(model, q);
    if (!(p.minCoeff() > 0.0)) throw NumericalError("information needs every cell probability positive");
    const Eigen::RowVectorXd colsum = jac.colwise().sum();
    const Eigen::MatrixXd scaled = jac.array().colwise() / p.array().sqrt();
    Eigen::MatrixXd info = scaled.transpose() * scaled - colsum.transpose() * colsum;
    return 0.5 * (info + info.transpose());
}

struct StandardErrors
{
    Eigen::VectorXd se;
    double condition = 0;
    std::optional<std::string> warning;
};

/*
 * SE_j = sqrt([I(q)^{-1}]_jj / n) with I per observation. A singular or
 * numerically singular information matrix is an error.
 */
inline StandardErrors standard_errors(const Model& model, const ParamVector& q, double n)
{
    if (!(n > 0)) throw InputError("sample size must be positive");
    const auto info = fisher_information(model, q);
    StandardErrors out;
    if (info.size() == 0) return out;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(info, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    out.condition = lo > 0 ? hi / lo : std::numeric_limits<double>::infinity();
    char cond[32];
    std::snprintf(cond, sizeof cond, "%.3g", out.condition);
    if (!(lo > hi * 1e-13)) throw NumericalError(std::string("Fisher information is singular (condition number ") + cond + ")");
    if (out.condition > 1e8) out.warning = std::string("Fisher information is ill-conditioned (condition number ") + cond + ")";
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) throw NumericalError("Fisher information is not positive definite");
    const Eigen::MatrixXd inv = ldlt.solve(Eigen::MatrixXd::Identity(info.rows(), info.cols()));
    out.se = (inv.diagonal().array() / n).sqrt();
    return out;
}

// Σ n_i log p_i; cells with n_i = 0 contribute nothing.
inline double loglik(const ProbVector& p, const CountVector& n)
{
    double l = 0.0;
    for (Eigen::Index i = 0; i < n.size(); ++i) {
        if (n[i] > 0) l += n[i] * std::log(p[i]);
    }
    return l;
}

inline double saturated_loglik(const CountVector& n)
{
    const double total = n.sum();
    double l = 0.0;
    for (Eigen::Index i = 0; i < n.size(); ++i) {
        if (n[i] > 0) l += n[i] * std::log(n[i] / total);
    }
    return l;
}

inline long degrees_of_freedom(std::size_t num_vertices, std::size_t num_params)
{
    return static_cast<long>((std::size_t{1} << num_vertices) - 1) - static_cast<long>(num_params);
}

// Upper tail of chi-square(df); 1 when df = 0.
inline double chi_square_upper(double x, long df)
{
    if (df <= 0) return 1.0;
    if (!(x > 0)) return 1.0;
    return boost::math::gamma_q(0.5 * static_cast<double>(df), 0.5 * x);
}

struct Goodness
{
    double loglik = 0;
    double deviance = 0;
    long df = 0;
    double p_value = 1;
    double bic = 0;
    double aic = 0;
    double n = 0;
};

inline double bic(double l, std::size_t k, double n) { return -2.0 * l + static_cast<double>(k) * std::log(n); }
inline double aic(double l, std::size_t k) { return -2.0 * l + 2.0 * static_cast<double>(k); }

inline Goodness goodness(const Model& model, const ProbVector& p, const CountVector& n)
{
    if (static_cast<std::size_t>(n.size()) != model.num_states()) throw InputError("count vector has wrong length");
    Goodness g;
    g.n = n.sum();
    g.loglik = loglik(p, n);
    g.deviance = 2.0 * (saturated_loglik(n) - g.loglik);
    if (g.deviance < 0 && g.deviance > -1e-8) g.deviance = 0.0;
    g.df = degrees_of_freedom(model.graph().size(), model.num_params());
    g.p_value = chi_square_upper(g.deviance, g.df);
    g.bic = bic(g.loglik, model.num_params(), g.n);
    g.aic = aic(g.loglik, model.num_params());
    return g;
}

inline Goodness goodness(const Model& model, const FitResult& fit, const CountVector& n)
{
    return goodness(model, fit.p_hat, n);
}

} // namespace admg
