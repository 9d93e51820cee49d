#include <gtest/gtest.h>

#include "gwrecon/ring.hpp"

using namespace gwr;

namespace
{

using vec = std::vector<lambda_poly>;

lambda_poly c(const rational &x, std::size_t nv = 0) { return lp::constant(x, nv); }

void expect_ring_axioms(const ring_presentation &r)
{
    const auto n = r.rank;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            EXPECT_EQ(r.pairing(i, j), r.pairing(j, i));
            auto bi = basis_vector(r, i), bj = basis_vector(r, j);
            EXPECT_EQ(ring_multiply(r, bi, bj), ring_multiply(r, bj, bi));
            for (std::size_t k = 0; k < n; ++k) {
                auto bk = basis_vector(r, k);
                EXPECT_EQ(ring_multiply(r, ring_multiply(r, bi, bj), bk), ring_multiply(r, bi, ring_multiply(r, bj, bk)));
                EXPECT_EQ(ring_pair(r, ring_multiply(r, bi, bj), bk), ring_pair(r, bi, ring_multiply(r, bj, bk)));
            }
        }
    // completeness: sum_a phi_a (phi^a, x) = x
    auto dual = dual_basis(r);
    for (std::size_t x = 0; x < n; ++x) {
        vec acc(n);
        for (std::size_t a = 0; a < n; ++a) {
            auto pr = ring_pair(r, dual[a], basis_vector(r, x));
            lp::add_to(acc[a], pr);
        }
        EXPECT_EQ(acc, basis_vector(r, x));
        for (std::size_t b = 0; b < n; ++b) {
            auto d = ring_pair(r, basis_vector(r, b), dual[x]);
            EXPECT_EQ(d, b == x ? c(1, r.nvars()) : lambda_poly{});
        }
    }
}

} // namespace

TEST(Rings, ProjectiveLineGram)
{
    auto r = projective_ring(2);
    EXPECT_EQ(r.pairing(0, 0), lambda_poly{});
    EXPECT_EQ(r.pairing(0, 1), c(1));
    EXPECT_EQ(r.pairing(1, 0), c(1));
    EXPECT_EQ(r.pairing(1, 1), lambda_poly{});
}

TEST(Rings, ProjectivePlaneRelations)
{
    auto r = projective_ring(3);
    EXPECT_EQ(ring_multiply(r, basis_vector(r, 1), basis_vector(r, 2)), vec(3));
    // (p, p) = integral of p^2 = 1 on the plane; only i + j = 2 pairs nontrivially
    EXPECT_EQ(r.pairing(1, 1), c(1));
    EXPECT_EQ(r.pairing(1, 2), lambda_poly{});
    EXPECT_EQ(r.pairing(0, 2), c(1));
}

TEST(Rings, ProjectiveDualBases)
{
    auto d2 = dual_basis(projective_ring(2));
    EXPECT_EQ(d2[0], (vec{{}, c(1)}));
    EXPECT_EQ(d2[1], (vec{c(1), {}}));
    auto d3 = dual_basis(projective_ring(3));
    EXPECT_EQ(d3[0], (vec{{}, {}, c(1)}));
    EXPECT_EQ(d3[1], (vec{{}, c(1), {}}));
    EXPECT_EQ(d3[2], (vec{c(1), {}, {}}));
}

TEST(Rings, KTheoryLineGramAndDual)
{
    auto r = ktheory_projective_ring(2);
    EXPECT_EQ(r.pairing(0, 0), c(1));
    EXPECT_EQ(r.pairing(0, 1), c(1));
    EXPECT_EQ(r.pairing(1, 1), lambda_poly{});
    auto d = dual_basis(r);
    // (1-P, P) = (1-P, 1 - (1-P))
    EXPECT_EQ(d[0], (vec{{}, c(1)}));
    EXPECT_EQ(d[1], (vec{c(1), c(-1)}));
}

TEST(Rings, KTheoryEulerCharacteristics)
{
    // chi(CP^{n-1}, O(k)) = C(n-1+k, n-1); chi(eps^m) = sum_j (-1)^j C(m,j) chi(O(-j))
    for (int n = 1; n <= 5; ++n) {
        auto chi = ktheory_euler_characteristics(n);
        for (int m = 0; m < 2 * n - 1; ++m) {
            rational expect = 0;
            for (int j = 0; j <= m; ++j) {
                // chi(O(-j)) = C(n-1-j, n-1), zero for 0 < j < n, (-1)^{n-1} C(j-1, n-1) for j >= n
                integer o = j < n ? (j == 0 ? integer(1) : integer(0))
                                  : integer(((n - 1) % 2 ? -1 : 1) * binomial(j - 1, n - 1));
                expect += rational((j % 2 ? -1 : 1) * binomial(m, j) * o);
            }
            EXPECT_EQ(chi[m], expect) << "n=" << n << " m=" << m;
        }
        // top power pairs to zero for n >= 2
        if (n >= 2) {
            EXPECT_EQ(chi[2 * n - 2], 0);
        }
    }
}

TEST(Rings, AxiomsHoldForAllConstructors)
{
    for (int n = 1; n <= 4; ++n) {
        expect_ring_axioms(projective_ring(n));
        expect_ring_axioms(ktheory_projective_ring(n));
        expect_ring_axioms(equivariant_projective_ring(n, 3));
    }
}

TEST(Rings, EquivariantRelationN2)
{
    auto r = equivariant_projective_ring(2, 3);
    lambda_poly e1{{{1, 0}, 1}, {{0, 1}, 1}};
    lambda_poly e2{{{1, 1}, -1}};
    auto p = basis_vector(r, 1);
    auto p2 = ring_multiply(r, p, p);
    EXPECT_EQ(p2, (vec{e2, e1}));
    // p^3 -> ((l1+l2)^2 - l1 l2) p - (l1+l2) l1 l2
    auto p3 = ring_multiply(r, p2, p);
    lambda_poly a{{{2, 0}, 1}, {{1, 1}, 1}, {{0, 2}, 1}};
    lambda_poly b{{{2, 1}, -1}, {{1, 2}, -1}};
    EXPECT_EQ(p3, (vec{b, a}));
}

TEST(Rings, EquivariantSpecializesToProjective)
{
    for (int n = 1; n <= 4; ++n) {
        auto e = equivariant_projective_ring(n, 2);
        auto r = projective_ring(n);
        for (std::size_t i = 0; i < e.structure.size(); ++i)
            EXPECT_EQ(lp::constant_part(e.structure[i]), lp::constant_part(r.structure[i]));
        for (std::size_t i = 0; i < e.gram.size(); ++i)
            EXPECT_EQ(lp::constant_part(e.gram[i]), lp::constant_part(r.gram[i]));
    }
}

TEST(Rings, RejectsInvalidRank)
{
    EXPECT_THROW(projective_ring(0), validation_error);
    EXPECT_THROW(ktheory_projective_ring(-1), validation_error);
    EXPECT_THROW(equivariant_projective_ring(2, -1), validation_error);
}

TEST(Rings, JsonRoundTripsLabels)
{
    auto j = to_json(projective_ring(3));
    EXPECT_EQ(j["basis_labels"][2], "p^2");
    EXPECT_EQ(j["pairing_gram"][0][2], "1/1");
    EXPECT_EQ(j["pairing_gram"][1][2], "0/1");
}

TEST(Ring, LocalEulerWeightedPairing)
{
    auto r = local_projective_ring(2, 1);
    EXPECT_EQ(r.kind, "local");
    EXPECT_EQ(lp::to_string(r.pairing(0, 0), r.lambda_names), "1/1");
    EXPECT_EQ(lp::to_string(r.pairing(0, 1), r.lambda_names), "1/1*lambda");
    EXPECT_TRUE(r.pairing(1, 1).empty());
    for (int n : {2, 3})
        for (int l : {1, 2}) {
            auto q = local_projective_ring(n, l);
            auto dual = dual_basis(q);
            for (std::size_t i = 0; i < q.rank; ++i)
                for (std::size_t j = 0; j < q.rank; ++j) {
                    auto v = ring_pair(q, basis_vector(q, i), dual[j]);
                    EXPECT_EQ(lp::to_string(v, q.lambda_names), i == j ? "1/1" : "0/1") << n << l << i << j;
                }
        }
    EXPECT_THROW(local_projective_ring(2, 0), validation_error);
}
