#include <gtest/gtest.h>

#include <random>

#include "gwrecon/cone_k.hpp"

using namespace gwr;

namespace
{

struct kset {
    layout_ptr lay;
    algebra_ptr<qrational> alg;
    kset(int n, int qcap, int tcap, std::vector<std::string> defs = {})
    {
        layout_builder b("q");
        b.novikov("Q");
        for (auto &d : defs)
            b.deformation(d);
        lay = b.caps(qcap, tcap).z_window(120, 120).exact_loop().build();
        alg = make_algebra<qrational>(ktheory_projective_ring(n), lay);
    }
    qrational poly(const upoly &p, int shift = 0) const { return qrational(qrational::poly_series(lay, p, shift)); }
    qrational over(const upoly &n, const upoly &d) const { return qrational(qrational::poly_series(lay, n), d); }
    qrational v(const std::string &name, int e = 1) const { return qrational(series::var(lay, name, e)); }
    qrational c(const rational &x) const { return qrational::constant(lay, x); }
    element<qrational> basis(std::size_t i, const qrational &x) const { return element<qrational>::basis(alg, i, x); }
};

upoly one_minus_q_pow(int r, int k)
{
    // (1 - q^r)^k
    upoly base = upoly{1} - upoly::monomial(static_cast<std::size_t>(r));
    upoly out{1};
    for (int i = 0; i < k; ++i)
        out = out * base;
    return out;
}

// Independent oracle: with eps = 1 - P nilpotent (eps^n = 0),
// 1/(1 - Pq^r)^n = 1/((1 - q^r) + eps q^r)^n = sum_k binom(-n, k) eps^k q^{rk} / (1 - q^r)^{n+k}.
element<qrational> seed_oracle(const kset &K, int n, int d)
{
    element<qrational> out = K.basis(0, K.poly({1, -1}));
    for (int r = 1; r <= d; ++r) {
        element<qrational> fac(K.alg);
        for (int k = 0; k < n; ++k) {
            rational b = binomial(n + k - 1, k);
            if (k % 2)
                b = -b;
            fac[static_cast<std::size_t>(k)] =
                qrational(qrational::poly_series(K.lay, upoly::monomial(static_cast<std::size_t>(r * k), b)),
                          one_minus_q_pow(r, n + k));
        }
        // multiply in the truncated polynomial ring by hand
        element<qrational> next(K.alg);
        for (int i = 0; i < n; ++i)
            for (int j = 0; i + j < n; ++j)
                next[static_cast<std::size_t>(i + j)] += out[static_cast<std::size_t>(i)] * fac[static_cast<std::size_t>(j)];
        out = next;
    }
    return out;
}

} // namespace

TEST(ConeK, SeedLineDegreeOne)
{
    kset K(2, 2, 0);
    auto I1 = seed_eval_k(2, K.alg, 1);
    EXPECT_EQ(I1[0], K.over({1}, {1, -1}));
    EXPECT_EQ(I1[1], K.over({0, -2}, {1, -2, 1}));
    EXPECT_EQ(seed_eval_k(2, K.alg, 0), K.basis(0, K.poly({1, -1})));
}

TEST(ConeK, SeedOnAPoint)
{
    kset K(1, 2, 0);
    EXPECT_EQ(seed_eval_k(1, K.alg, 1), one(K.alg));
    EXPECT_EQ(seed_eval_k(1, K.alg, 2), K.basis(0, K.over({1}, {1, 0, -1})));
}

TEST(ConeK, SeedMatchesBinomialOracle)
{
    for (int n : {2, 3, 4}) {
        kset K(n, 3, 0);
        for (int d = 0; d <= 3; ++d)
            EXPECT_EQ(seed_eval_k(n, K.alg, d), seed_oracle(K, n, d)) << n << " " << d;
    }
    kset K(2, 0, 0);
    EXPECT_THROW(seed_eval_k(2, K.alg, -1), validation_error);
    EXPECT_THROW(seed_eval_k(3, K.alg, 1), mismatch_error);
}

TEST(ConeK, FlowAtZeroIsInput)
{
    kset K(2, 2, 1, {"tau0", "tau1"});
    auto f = seed_family_k(2, K.alg, monomial_basis(K.alg));
    std::vector<qrational> zero(2, qrational(K.lay));
    element<qrational> expect(K.alg);
    for (int d = 0; d <= 2; ++d)
        expect += seed_eval_k(2, K.alg, d) * K.v("Q", d);
    EXPECT_EQ(family_value_k(f, zero), expect);
    auto g = flow_family_k(expect, monomial_basis(K.alg));
    EXPECT_EQ(family_value_k(g, zero), expect);
}

TEST(ConeK, TangentExample)
{
    // Q^1 term of (1-q) d/dtau_1 I at tau = 0 with Psi_1 = 1 - P: 1 - (1-P) q/(1-q)
    kset K(2, 1, 0);
    auto f = seed_family_k(2, K.alg, monomial_basis(K.alg));
    std::vector<qrational> tau(2, qrational(K.lay)), c{K.c(0), K.c(1)};
    auto g = tangent_k(f, tau, c);
    auto q1 = decompose_point_k(g)[1];
    EXPECT_EQ(q1, K.basis(0, K.c(1)) + K.basis(1, K.over({0, -1}, {1, -1})));
}

TEST(ConeK, UnitDirectionFlowIsUniform)
{
    kset K(2, 2, 3, {"s"});
    auto f = seed_family_k(2, K.alg, monomial_basis(K.alg));
    std::vector<qrational> tau{K.v("s"), K.c(0)};
    auto e = exp_divided_one_minus_q(K.basis(0, K.v("s")));
    EXPECT_EQ(family_value_k(f, tau), family_value_k(f, {K.c(0), K.c(0)}) * e[0]);
}

TEST(ConeK, MatchAtZeroGivesSmallSeries)
{
    for (int n : {2, 3}) {
        kset K(n, 2, 0);
        auto f = seed_family_k(n, K.alg, monomial_basis(K.alg));
        auto m = match_input_k(f, element<qrational>(K.alg));
        for (std::size_t a = 0; a < static_cast<std::size_t>(n); ++a) {
            EXPECT_TRUE(m.tau[a].is_zero());
            EXPECT_EQ(m.c[a], K.c(a == 0 ? 1 : 0));
        }
        element<qrational> expect(K.alg);
        for (int d = 0; d <= 2; ++d)
            expect += seed_oracle(K, n, d) * K.v("Q", d);
        EXPECT_EQ(m.point, expect) << n;
        auto [lpart, rpart] = k_split(m.point);
        EXPECT_EQ(lpart, K.basis(0, K.poly({1, -1})));
    }
}

TEST(ConeK, MatchLeadingOrder)
{
    kset K(2, 1, 1, {"s"});
    auto f = seed_family_k(2, K.alg, monomial_basis(K.alg));
    auto m = match_input_k(f, K.basis(1, K.v("s")));
    EXPECT_EQ(m.tau[1], K.v("s"));
}

TEST(ConeK, DilatonShiftAndIdempotence)
{
    kset K(2, 2, 2, {"s", "u"});
    auto f = seed_family_k(2, K.alg, monomial_basis(K.alg));
    auto t = K.basis(1, K.v("s") * K.poly({0, 1})) + K.basis(0, K.v("u") * K.poly({1}, -1));
    auto m = match_input_k(f, t);
    EXPECT_EQ(k_split(m.point).first, t + K.basis(0, K.poly({1, -1})));
    auto again = match_input_k(f, k_split(m.point).first - K.basis(0, K.poly({1, -1})));
    EXPECT_EQ(again.point, m.point);
    EXPECT_EQ(again.tau, m.tau);
}

TEST(ConeK, DegreeZeroPartIsExponential)
{
    kset K(3, 1, 3, {"s", "u"});
    auto f = seed_family_k(3, K.alg, monomial_basis(K.alg));
    auto t = K.basis(0, K.v("u")) + K.basis(1, K.v("s"));
    auto J = j_function_k(f, t);
    auto J0 = decompose_point_k(J)[0];
    EXPECT_EQ(J0, exp_divided_one_minus_q(t) * K.poly({1, -1}));
}

TEST(ConeK, BasisIndependence)
{
    kset K(3, 2, 2, {"s", "u"});
    auto t = K.basis(1, K.v("s")) + K.basis(2, K.v("u") * K.poly({0, 0, 1}));
    auto J1 = j_function_k(seed_family_k(3, K.alg, monomial_basis(K.alg)), t);
    auto psis = basis_from_matrix(K.alg, {{1, 0, 0}, {1, 2, 0}, {-1, rational(1, 3), 1}});
    auto J2 = j_function_k(seed_family_k(3, K.alg, psis), t);
    EXPECT_EQ(J1, J2);
}

TEST(ConeK, FlowInvarianceRandom)
{
    std::mt19937 rng(5);
    std::uniform_int_distribution<int> coef(-3, 3), qe(-1, 1);
    for (int trial = 0; trial < 6; ++trial) {
        kset K(2, 2, 2, {"s", "eps"});
        auto f = seed_family_k(2, K.alg, monomial_basis(K.alg));
        auto t = K.basis(0, K.v("s") * K.poly({rational(coef(rng))}, qe(rng)))
                 + K.basis(1, K.v("s") * K.poly({rational(coef(rng)), rational(coef(rng))}, qe(rng)));
        auto J = j_function_k(f, t);
        basis_poly<qrational> psi{K.c(coef(rng)), K.c(coef(rng) == 0 ? 1 : 2)};
        auto F = translation_flow_k(J, psi, K.v("eps"));
        auto tt = k_split(F).first - K.basis(0, K.poly({1, -1}));
        EXPECT_EQ(j_function_k(f, tt), F) << trial;
    }
}

TEST(ConeK, Rejections)
{
    kset K(2, 1, 1, {"s"});
    auto f = seed_family_k(2, K.alg, monomial_basis(K.alg));
    EXPECT_THROW(match_input_k(f, K.basis(1, K.c(1))), validation_error);
    EXPECT_THROW(match_input_k(f, K.basis(1, K.v("s") * K.over({1}, {1, -1}))), validation_error);
    auto psis = monomial_basis(K.alg);
    psis[1][1] = K.poly({0, 1});
    EXPECT_THROW(match_input_k(seed_family_k(2, K.alg, psis), element<qrational>(K.alg)), validation_error);
}

namespace
{

matrix<qrational> one_by_one(const qrational &x)
{
    matrix<qrational> m(1, x.lay());
    m(0, 0) = x;
    return m;
}

bool laurent_valued(const matrix<qrational> &m)
{
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < m.size(); ++j)
            if (!m(i, j).is_laurent_polynomial())
                return false;
    return true;
}

bool regular_with_unit_base(const matrix<qrational> &m)
{
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < m.size(); ++j) {
            if (!m(i, j).is_zero() && m(i, j).num().z_min() < 0)
                return false;
            auto v = m(i, j).is_zero() ? series(m.lay()) : m(i, j).evaluate_q(0);
            if (v != series::constant(m.lay(), i == j ? 1 : 0))
                return false;
        }
    return true;
}

} // namespace

TEST(ConeK, BirkhoffExamples)
{
    // eps^2 = 0
    kset K(1, 0, 1, {"eps"});
    auto I = matrix<qrational>::identity(2, K.lay);
    auto f0 = birkhoff_factorize_k(I);
    EXPECT_EQ(f0.V, I);
    EXPECT_EQ(f0.W, I);
    auto eps = K.v("eps");
    auto U1 = one_by_one(K.c(1) + eps * K.over({0, 1}, {1, -1}));
    auto f1 = birkhoff_factorize_k(U1);
    EXPECT_EQ(f1.V, one_by_one(K.c(1)));
    EXPECT_EQ(f1.W, U1);
    auto U2 = one_by_one(K.poly({0, 1}) + eps * K.over({1}, {1, -1}));
    auto f2 = birkhoff_factorize_k(U2);
    EXPECT_EQ(f2.V, one_by_one(K.poly({0, 1}) + eps * K.poly({1, 1})));
    EXPECT_EQ(f2.W, one_by_one(K.c(1) + eps * K.over({0, 1}, {1, -1})));
    EXPECT_EQ(f2.V * f2.W, U2);
    auto S = matrix<qrational>::identity(2, K.lay);
    S(1, 1) = K.c(0);
    EXPECT_THROW(birkhoff_factorize_k(S), computation_error);
}

TEST(ConeK, BirkhoffRandomRemultiplies)
{
    kset K(1, 2, 2, {"eps"});
    std::mt19937 rng(17);
    std::uniform_int_distribution<int> coef(-3, 3), sh(-2, 2);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 1 + trial % 3;
        matrix<qrational> U(n, K.lay);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                qrational small = K.v("eps") * K.over({rational(coef(rng)), rational(coef(rng))}, {1, -1, 0, 1})
                                  + K.v("Q") * K.poly({rational(coef(rng))}, sh(rng));
                U(i, j) = small + (i == j ? K.poly({rational(1 + static_cast<int>(i))}, sh(rng)) : K.c(0));
            }
        auto f = birkhoff_factorize_k(U);
        EXPECT_EQ(f.V * f.W, U) << trial;
        EXPECT_TRUE(laurent_valued(f.V)) << trial;
        EXPECT_TRUE(regular_with_unit_base(f.W)) << trial;
        auto again = birkhoff_factorize_k(f.V * f.W);
        EXPECT_EQ(again.V, f.V);
        EXPECT_EQ(again.W, f.W);
    }
}

TEST(ConeK, BirkhoffOfFamily)
{
    kset K(2, 2, 2, {"tau0", "tau1"});
    auto f = seed_family_k(2, K.alg, monomial_basis(K.alg));
    auto U = assemble_U_k(f, {K.v("tau0"), K.v("tau1")});
    auto fac = birkhoff_factorize_k(U);
    EXPECT_EQ(fac.V * fac.W, U);
    EXPECT_TRUE(laurent_valued(fac.V));
    EXPECT_TRUE(regular_with_unit_base(fac.W));
}
