#include "support.hpp"

#include <admg/graph_io.hpp>
#include <admg/inference.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace admg;
using namespace admg::testing;

namespace {

Jacobian central_differences(const Model& model, const ParamVector& q, double h)
{
    Jacobian out(model.num_states(), model.num_params());
    for (std::size_t j = 0; j < model.num_params(); ++j) {
        ParamVector up = q, down = q;
        up[j] += h;
        down[j] -= h;
        out.col(j) = (prob_vector(model, up) - prob_vector(model, down)) / (2 * h);
    }
    return out;
}

// The same graph and counts with vertex v renamed perm[v].
std::pair<Admg, CountVector> relabel(const Admg& g, const CountVector& n, const std::vector<int>& perm)
{
    std::vector<std::pair<Vertex, Vertex>> d, b;
    for (auto [x, y] : g.directed_edges()) d.emplace_back(perm[x], perm[y]);
    for (auto [x, y] : g.bidirected_edges()) b.emplace_back(perm[x], perm[y]);
    auto h = Admg::with_numbered_vertices(g.size(), d, b);
    const Model from(g), to(h);
    CountVector m = CountVector::Zero(n.size());
    for (std::size_t r = 0; r < from.num_states(); ++r) {
        VertexSet ones;
        for (auto v : from.state_set(r)) ones.insert(perm[v]);
        m[to.state_index(ones)] = n[r];
    }
    return {h, m};
}

} // namespace

TEST(Jacobian, MatchesCentralDifferences)
{
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 40; ++trial) {
        const Model model(random_admg(rng, 2 + trial % 4));
        const auto q = random_q(model, rng);
        const auto jac = dp_dq(model, q);
        const auto fd = central_differences(model, q, 1e-6);
        const double scale = std::max(1.0, jac.cwiseAbs().maxCoeff());
        EXPECT_LE((jac - fd).cwiseAbs().maxCoeff() / scale, 1e-5) << format_graph(model.graph());
    }
}

TEST(Jacobian, ColumnsSumToZero)
{
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 30; ++trial) {
        const Model model(random_admg(rng, 5));
        const auto jac = dp_dq(model, random_q(model, rng));
        EXPECT_LT(jac.colwise().sum().cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Jacobian, SingleVertex)
{
    const Model model(Admg::with_numbered_vertices(1, {}, {}));
    ParamVector q(1);
    q << 0.3;
    const auto jac = dp_dq(model, q);
    EXPECT_EQ(jac(0, 0), 1.0);
    EXPECT_EQ(jac(1, 0), -1.0);
}

TEST(Jacobian, VertexBlockColumnsAreDerivatives)
{
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        const Model model(random_admg(rng, 4));
        const auto q = random_q(model, rng);
        const auto jac = dp_dq(model, q);
        for (auto v : model.graph().vertices()) {
            const auto blk = vertex_block(model, q, v);
            for (std::size_t c = 0; c < blk.params.size(); ++c) {
                EXPECT_LT((blk.a.col(c) - jac.col(blk.params[c])).cwiseAbs().maxCoeff(), 1e-10);
            }
        }
    }
}

TEST(Jacobian, RejectsNonPositive)
{
    const Model model(g1());
    ParamVector q = ParamVector::Constant(model.num_params(), 0.5);
    q[2] = 0.0;
    EXPECT_THROW(dp_dq(model, q), NumericalError);
}

TEST(Information, SingleVertexIsBernoulli)
{
    const Model model(Admg::with_numbered_vertices(1, {}, {}));
    for (double v : {0.1, 0.5, 0.77}) {
        ParamVector q(1);
        q << v;
        EXPECT_NEAR(fisher_information(model, q)(0, 0), 1.0 / (v * (1 - v)), 1e-12 / (v * (1 - v)));
    }
}

TEST(Information, SymmetricPositiveDefinite)
{
    std::mt19937_64 rng(24);
    for (int trial = 0; trial < 40; ++trial) {
        const Model model(random_admg(rng, 2 + trial % 4));
        const auto info = fisher_information(model, random_q(model, rng));
        EXPECT_LE((info - info.transpose()).cwiseAbs().maxCoeff(), 1e-10);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(info);
        EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-8);
        EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
    }
}

TEST(Information, MatchesScoreCovariance)
{
    std::mt19937_64 rng(25);
    const Model model(g1());
    const auto q = random_q(model, rng);
    const auto p = prob_vector(model, q);
    const auto jac = dp_dq(model, q);
    const auto n = multinomial(rng, p, 100000);
    const Eigen::Index k = jac.cols();
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(k);
    Eigen::MatrixXd second = Eigen::MatrixXd::Zero(k, k);
    for (Eigen::Index r = 0; r < n.size(); ++r) {
        const Eigen::VectorXd s = jac.row(r).transpose() / p[r];
        mean += n[r] * s;
        second += n[r] * s * s.transpose();
    }
    mean /= n.sum();
    const Eigen::MatrixXd cov = second / n.sum() - mean * mean.transpose();
    const auto info = fisher_information(model, q);
    EXPECT_LE((cov - info).norm() / info.norm(), 0.05);
}

TEST(StandardErrors, SingleVertexClosedForm)
{
    const Model model(Admg::with_numbered_vertices(1, {}, {}));
    ParamVector q(1);
    q << 0.5;
    EXPECT_DOUBLE_EQ(standard_errors(model, q, 100).se[0], 0.05);
    q << 0.23;
    EXPECT_NEAR(standard_errors(model, q, 371).se[0], std::sqrt(0.23 * 0.77 / 371), 1e-15);
}

TEST(StandardErrors, ShrinkLikeRootN)
{
    std::mt19937_64 rng(26);
    const Model model(g1());
    const auto q = random_q(model, rng);
    const auto small = standard_errors(model, q, 100).se;
    const auto large = standard_errors(model, q, 10000).se;
    for (Eigen::Index j = 0; j < small.size(); ++j) EXPECT_NEAR(small[j] / large[j], 10.0, 0.5);
}

TEST(StandardErrors, SaturatedPairMatchesDeltaMethod)
{
    // 1 <-> 2: q1 = p00 + p01, q2 = p00 + p10, q12 = p00, all linear in p
    const Model model(Admg::with_numbered_vertices(2, {}, {{0, 1}}));
    std::mt19937_64 rng(27);
    const auto q = random_q(model, rng);
    const auto p = prob_vector(model, q);
    Eigen::MatrixXd lin = Eigen::MatrixXd::Zero(3, 4);
    for (std::size_t j = 0; j < 3; ++j) {
        const auto& pi = model.params()[j];
        for (std::size_t r = 0; r < 4; ++r) {
            if (!model.state_set(r).intersects(pi.head)) lin(j, r) = 1.0;
        }
    }
    const double n = 500;
    const Eigen::MatrixXd multinomial_cov = Eigen::MatrixXd(p.asDiagonal()) - p * p.transpose();
    const Eigen::VectorXd delta = (lin * multinomial_cov * lin.transpose() / n).diagonal().cwiseSqrt();
    const auto se = standard_errors(model, q, n).se;
    EXPECT_LT((se - delta).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(StandardErrors, SingularInformationIsAnError)
{
    const Model model(Admg::with_numbered_vertices(1, {}, {}));
    ParamVector q(1);
    q << 1.0 - 1e-17;
    EXPECT_THROW(standard_errors(model, q, 10), NumericalError);
}

TEST(Goodness, SaturatedHasZeroDevianceAndDf)
{
    std::mt19937_64 rng(28);
    const Model model(complete_bidirected(3));
    const auto n = latent_counts(model, rng, 400);
    const auto res = fit(model, n);
    const auto gof = goodness(model, res, n);
    EXPECT_NEAR(gof.deviance, 0.0, 1e-8);
    EXPECT_EQ(gof.df, 0);
    EXPECT_EQ(gof.p_value, 1.0);
}

TEST(Goodness, DegreesOfFreedomArithmetic)
{
    EXPECT_EQ(degrees_of_freedom(7, 19), 108);
    EXPECT_EQ(degrees_of_freedom(7, 51), 76);
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 20; ++trial) {
        const Model model(random_admg(rng, 2 + trial % 5));
        EXPECT_EQ(degrees_of_freedom(model.graph().size(), model.num_params()) + static_cast<long>(model.num_params()),
                  (1L << model.graph().size()) - 1);
    }
}

TEST(Goodness, ChiSquareTail)
{
    // deviance 76.7 on 76 degrees of freedom has p = 0.456
    EXPECT_NEAR(chi_square_upper(76.7, 76), 0.456, 5e-4);
    EXPECT_NEAR(chi_square_upper(2.0, 2), std::exp(-1.0), 1e-15);
    EXPECT_LT(chi_square_upper(180.8, 108), 1e-4);
    EXPECT_EQ(chi_square_upper(3.0, 0), 1.0);
}

TEST(Goodness, CriteriaFormulas)
{
    EXPECT_DOUBLE_EQ(bic(-100, 5, 1000), 200 + 5 * std::log(1000.0));
    EXPECT_DOUBLE_EQ(aic(-100, 5), 210);
}

TEST(Goodness, ReportedFieldsAreConsistent)
{
    std::mt19937_64 rng(30);
    const Model model(g1());
    const auto n = latent_counts(model, rng, 1000);
    const auto res = fit(model, n);
    const auto gof = goodness(model, res, n);
    EXPECT_NEAR(gof.loglik, res.loglik, 1e-9 * std::abs(res.loglik));
    EXPECT_DOUBLE_EQ(gof.n, n.sum());
    EXPECT_NEAR(gof.deviance, 2 * (saturated_loglik(n) - gof.loglik), 1e-9);
    EXPECT_GE(gof.deviance, -1e-8);
    EXPECT_DOUBLE_EQ(gof.bic, -2 * gof.loglik + model.num_params() * std::log(n.sum()));
}

TEST(Goodness, BicPrefersIndependenceOnIndependentData)
{
    for (int seed = 0; seed < 5; ++seed) {
        std::mt19937_64 rng(100 + seed);
        const Model edgeless(Admg::with_numbered_vertices(3, {}, {}));
        const Model saturated(complete_bidirected(3));
        const CountVector counts = multinomial(rng, prob_vector(edgeless, random_q(edgeless, rng)), 2000).array() + 1.0;
        const auto small = goodness(edgeless, fit(edgeless, counts), counts);
        const auto big = goodness(saturated, fit(saturated, counts), counts);
        EXPECT_LT(small.bic, big.bic);
    }
}

TEST(Goodness, DevianceFallsAlongNestedChain)
{
    std::mt19937_64 rng(31);
    const auto truth = g1();
    const auto n = latent_counts(Model(truth), rng, 3000);
    std::vector<Admg> chain = {
        Admg::with_numbered_vertices(4, {}, {}),
        Admg::with_numbered_vertices(4, {{0, 1}}, {}),
        Admg::with_numbered_vertices(4, {{0, 1}, {1, 3}}, {}),
        Admg::with_numbered_vertices(4, {{0, 1}, {1, 3}}, {{1, 2}}),
        truth,
        Admg::with_numbered_vertices(4, {{0, 1}, {1, 3}}, {{1, 2}, {2, 3}, {0, 2}}),
    };
    double previous = std::numeric_limits<double>::infinity();
    for (const auto& g : chain) {
        const Model model(g);
        const auto dev = goodness(model, fit(model, n), n).deviance;
        EXPECT_LE(dev, previous + 1e-6) << format_graph(g);
        previous = dev;
    }
}

TEST(Goodness, DevianceIgnoresVertexOrder)
{
    std::mt19937_64 rng(32);
    const auto g = g1();
    const auto n = latent_counts(Model(g), rng, 800);
    const auto [h, m] = relabel(g, n, {2, 0, 3, 1});
    const Model a(g), b(h);
    EXPECT_NEAR(goodness(a, fit(a, n), n).deviance, goodness(b, fit(b, m), m).deviance, 1e-6);
}
