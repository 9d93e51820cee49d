#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gwrecon/cone_h.hpp"

namespace gwr
{

// U_{ab} = coordinate b of d/dtau_a I(tau), i.e. (d_a I, phi^b).
inline matrix<series> assemble_U(const family_h &f, const std::vector<series> &tau)
{
    const std::size_t n = f.rank();
    const auto &lay = f.alg->lay();
    if (!(f.terms[0] == element<series>::scalar(f.alg, series::loop(lay, 1, -1))))
        throw validation_error("assemble_U: the degree-0 term of the point must be -z");
    matrix<series> U(n, lay);
    for (std::size_t a = 0; a < n; ++a) {
        std::vector<series> c(n, series(lay));
        c[a] = series::constant(lay, 1);
        element<series> row = tangent_combination(f, tau, c);
        for (std::size_t b = 0; b < n; ++b)
            U(a, b) = row[b].z_shift(-1);
    }
    return U;
}

inline int matrix_min_order(const matrix<series> &m)
{
    const layout &L = *m.lay();
    int best = 1 << 20;
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < m.size(); ++j)
            for (const auto &t : m(i, j).terms())
                best = std::min(best, L.q_degree(t.k) + L.def_degree(t.k) + L.lambda_degree(t.k));
    return best;
}

namespace detail
{

// Solve M x = b over Q; returns nullopt when inconsistent. Free variables are set to zero.
inline std::optional<std::vector<rational>> solve_linear(std::vector<std::vector<rational>> M, std::vector<rational> b)
{
    const std::size_t rows = M.size(), cols = rows ? M[0].size() : 0;
    std::vector<std::size_t> pivcol;
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t p = r;
        while (p < rows && sgn(M[p][c]) == 0)
            ++p;
        if (p == rows)
            continue;
        std::swap(M[p], M[r]);
        std::swap(b[p], b[r]);
        rational inv = 1 / M[r][c];
        for (std::size_t j = c; j < cols; ++j)
            M[r][j] *= inv;
        b[r] *= inv;
        for (std::size_t i = 0; i < rows; ++i)
            if (i != r && sgn(M[i][c]) != 0) {
                rational f = M[i][c];
                for (std::size_t j = c; j < cols; ++j)
                    M[i][j] -= f * M[r][j];
                b[i] -= f * b[r];
            }
        pivcol.push_back(c);
        ++r;
    }
    for (std::size_t i = r; i < rows; ++i)
        if (sgn(b[i]) != 0)
            return std::nullopt;
    std::vector<rational> x(cols, 0);
    for (std::size_t i = 0; i < r; ++i)
        x[pivcol[i]] = b[i];
    return x;
}

} // namespace detail

// Factor the leading (small-variable-free) part L = V0 W0 with V0 a power series in z and
// W0 = I + O(1/z). A z-constant L is taken as V0; otherwise a polynomial Y with Y L = W0 is
// sought by exact linear algebra and V0 = Y^{-1}.
inline std::pair<matrix<series>, matrix<series>> leading_factorization(const matrix<series> &L)
{
    const std::size_t n = L.size();
    const auto &lay = L.lay();
    auto I = matrix<series>::identity(n, lay);
    int zmin = 127, zmax = -127;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (const auto &t : L(i, j).terms()) {
                zmin = std::min<int>(zmin, t.k[0]);
                zmax = std::max<int>(zmax, t.k[0]);
            }
    if (zmin > zmax)
        throw computation_error("birkhoff: singular leading term at order 0");
    if (zmin >= 0) {
        if (determinant(L).z_coeff(0).is_zero())
            throw computation_error("birkhoff: singular leading term at order 0");
        return {L, I};
    }
    if (zmax <= 0) {
        matrix<series> v0 = L.map([](const series &s) { return s.z_coeff(0); });
        if (determinant(v0).is_zero())
            throw computation_error("birkhoff: singular leading term at order 0");
        return {v0, inverse(v0) * L};
    }
    // coefficient matrices L_k as rationals
    auto coeff = [&](int k, std::size_t i, std::size_t j) -> rational {
        rational out = 0;
        for (const auto &t : L(i, j).terms()) {
            if (t.k[0] != k)
                continue;
            for (std::size_t v = 1; v < max_vars; ++v)
                if (t.k[v] != 0)
                    throw computation_error("birkhoff: leading term with parameters is not supported");
            out = L(i, j).coeff_of(t);
        }
        return out;
    };
    for (int ny = 0; ny <= 12; ++ny) {
        matrix<series> Y(n, lay);
        bool ok = true;
        for (std::size_t row = 0; row < n && ok; ++row) {
            // unknowns y[e][j], e in [0, ny]; equations for k in [zmin, ny + zmax], column m
            std::vector<std::vector<rational>> M;
            std::vector<rational> b;
            for (int k = 0; k <= ny + zmax; ++k)
                for (std::size_t m = 0; m < n; ++m) {
                    std::vector<rational> eq(static_cast<std::size_t>(ny + 1) * n, 0);
                    for (int e = 0; e <= ny; ++e)
                        for (std::size_t j = 0; j < n; ++j)
                            eq[static_cast<std::size_t>(e) * n + j] = coeff(k - e, j, m);
                    M.push_back(eq);
                    b.push_back(k == 0 && m == row ? rational(1) : rational(0));
                }
            auto x = detail::solve_linear(M, b);
            if (!x) {
                ok = false;
                break;
            }
            for (int e = 0; e <= ny; ++e)
                for (std::size_t j = 0; j < n; ++j)
                    Y(row, j) += series::loop(lay, e, (*x)[static_cast<std::size_t>(e) * n + j]);
        }
        if (!ok)
            continue;
        matrix<series> W0 = Y * L;
        matrix<series> V0 = inverse(Y);
        if (V0 * W0 != L)
            continue;
        return {V0, W0};
    }
    throw computation_error("birkhoff: leading term has nontrivial partial indices (no factorization found)");
}

struct factorization {
    matrix<series> V, W;
    int iterations = 0;
};

// U = V W with V a power series in z and W = I + O(1/z), by order-by-order elimination:
// the defect E = U - V W is transported to X = V0^{-1} E W0^{-1}, whose z >= 0 part is
// absorbed into V and negative part into W.
inline factorization birkhoff_factorize(const matrix<series> &U)
{
    const auto &lay = U.lay();
    auto [V0, W0] = leading_factorization(U.leading());
    matrix<series> V0inv = inverse(V0), W0inv = inverse(W0);
    matrix<series> V = V0, W = W0;
    const int limit = filtration_limit(*lay);
    for (int it = 0; it <= limit; ++it) {
        matrix<series> E = U - V * W;
        if (E.is_zero())
            return {V, W, it};
        matrix<series> X = V0inv * E * W0inv;
        V = V + V0 * X.map([](const series &s) { return s.z_nonneg(); });
        W = W + X.map([](const series &s) { return s.z_neg(); }) * W0;
    }
    matrix<series> E = U - V * W;
    throw computation_error("birkhoff: elimination did not converge; defect remains at filtration order "
                            + std::to_string(matrix_min_order(E)));
}

// Mirror map read off the z^{-1} coefficient of the first row of W, expressed in the
// Phi-coordinates: returns tilde_tau_a = tau_a + O(Q). The flat coordinate of the S-matrix
// is t = -sum_a tilde_tau_a Phi_a(p) with the exp(+tau Phi/z) family convention.
inline std::vector<series> mirror_map(const family_h &f, const matrix<series> &W)
{
    if (!(f.phi_at[0][0] == one(f.alg)))
        throw validation_error("mirror_map: requires Phi_0 = 1");
    const std::size_t n = f.rank();
    std::vector<series> row(n, series(W.lay()));
    for (std::size_t b = 0; b < n; ++b)
        row[b] = W(0, b).z_coeff(-1);
    return row_times(row, inverse(basis_matrix(f)));
}

// Flat coordinates t_b (basis phi_b) as functions of tau: t = -tilde_tau A.
inline std::vector<series> flat_coordinates(const family_h &f, const std::vector<series> &mm)
{
    auto t = row_times(mm, basis_matrix(f));
    for (auto &x : t)
        x = -x;
    return t;
}

// Invert t(tau) = -tilde_tau(tau) A by fixed-point iteration: tau = target(t) - g(tau) with
// g = tilde_tau - tau = O(Q). Returns tau_a as series in the t variables.
inline std::vector<series> invert_mirror_map(const family_h &f, const std::vector<series> &mm,
                                             const std::vector<std::size_t> &tau_idx,
                                             const std::vector<series> &t_symbols)
{
    const std::size_t n = f.rank();
    const auto &lay = f.alg->lay();
    std::vector<series> neg_t(n, series(lay));
    for (std::size_t b = 0; b < n; ++b)
        neg_t[b] = -t_symbols[b];
    std::vector<series> target = row_times(neg_t, inverse(basis_matrix(f)));
    std::vector<series> g(n, series(lay));
    for (std::size_t a = 0; a < n; ++a)
        g[a] = mm[a] - series::var(lay, tau_idx[a]);
    std::vector<series> tau = target;
    const int limit = filtration_limit(*lay);
    for (int it = 0; it <= limit; ++it) {
        std::vector<series> next(n, series(lay));
        for (std::size_t a = 0; a < n; ++a) {
            series ga = g[a];
            for (std::size_t b = 0; b < n; ++b)
                ga = ga.substitute(tau_idx[b], tau[b]);
            next[a] = target[a] - ga;
        }
        if (next == tau)
            return tau;
        tau = std::move(next);
    }
    throw computation_error("invert_mirror_map: fixed-point iteration did not converge");
}

// S(t, z) = W(tau(t), -z). The family is re-evaluated at tau(t) and factorized again rather
// than substituting into W(tau): the inverse mirror map may shift tau at t = 0, and
// substitution into a tau-truncated W would lose terms.
inline matrix<series> s_matrix(const family_h &f, const std::vector<series> &tau_of_t)
{
    return birkhoff_factorize(assemble_U(f, tau_of_t)).W.map([](const series &s) { return s.z_flip(); });
}

// Row-convention multiplication matrix of an element: (M_x)_{gd} = coordinate d of x*phi_g.
inline matrix<series> multiplication_matrix(const element<series> &x)
{
    const auto &alg = x.alg();
    matrix<series> m(alg->rank(), alg->lay());
    for (std::size_t g = 0; g < alg->rank(); ++g) {
        auto prod = element<series>::basis(alg, g, rational(1)) * x;
        for (std::size_t d = 0; d < alg->rank(); ++d)
            m(g, d) = prod[d];
    }
    return m;
}

inline matrix<series> gram_matrix(const algebra_ptr<series> &alg)
{
    matrix<series> g(alg->rank(), alg->lay());
    for (std::size_t i = 0; i < alg->rank(); ++i)
        for (std::size_t j = 0; j < alg->rank(); ++j)
            g(i, j) = alg->gram(i, j);
    return g;
}

// Adjoint with respect to the pairing: S* = G S^T G^{-1}.
inline matrix<series> adjoint(const matrix<series> &S, const algebra_ptr<series> &alg)
{
    auto G = gram_matrix(alg);
    return G * S.transpose() * inverse(G);
}

struct quantum_product {
    std::vector<matrix<series>> C; // C[b]_{gd} = coefficient of phi_d in phi_b * phi_g
    int valid_def_degree = 0;
};

// phi_b * = (z d/dt_b S) S^{-1}, certified z-independent. The derivative is exact one
// deformation degree below the cap, so everything is compared there.
inline quantum_product quantum_product_of(const matrix<series> &S, const std::vector<std::size_t> &t_idx)
{
    const int valid = S.lay()->trunc().def_degree_cap - 1;
    if (valid < 0)
        throw computation_error("quantum_product: deformation cap must be at least 1");
    auto cut = [valid](const series &s) { return s.truncate_def(valid); };
    matrix<series> Sinv = inverse(S);
    quantum_product qp;
    qp.valid_def_degree = valid;
    for (auto b : t_idx) {
        matrix<series> dS = S.map([b](const series &s) { return s.derivative(b).z_shift(1); });
        matrix<series> C = (dS * Sinv).map(cut);
        for (std::size_t i = 0; i < C.size(); ++i)
            for (std::size_t j = 0; j < C.size(); ++j) {
                const auto &x = C(i, j);
                if (x.z_min() != 0 || x.z_max() != 0) {
                    if (!x.is_zero())
                        throw computation_error("quantum_product: z-dependence in phi_" + std::to_string(b)
                                                + "* at entry (" + std::to_string(i) + "," + std::to_string(j)
                                                + "); raise the z window or deformation cap");
                }
            }
        qp.C.push_back(C);
    }
    return qp;
}

struct check_result {
    std::string name;
    bool pass = false;
    std::string detail; // first failing order when failing
};

inline std::string first_failure(const matrix<series> &D)
{
    const layout &L = *D.lay();
    int bq = 1 << 20, bd = 0, bz = 0;
    for (std::size_t i = 0; i < D.size(); ++i)
        for (std::size_t j = 0; j < D.size(); ++j)
            for (const auto &t : D(i, j).terms()) {
                int q = L.q_degree(t.k), d = L.def_degree(t.k);
                if (q < bq || (q == bq && d < bd)) {
                    bq = q;
                    bd = d;
                    bz = t.k[0];
                }
            }
    return "first failing order: Q^" + std::to_string(bq) + ", deformation degree " + std::to_string(bd) + ", z^"
           + std::to_string(bz);
}

// Symplectic condition, string equation and divisor equation for S(t, z).
inline std::vector<check_result> structural_checks(const matrix<series> &S, const algebra_ptr<series> &alg,
                                                   const std::vector<std::size_t> &t_idx)
{
    const auto &lay = S.lay();
    const std::size_t qi = novikov_index(*lay);
    const int valid = lay->trunc().def_degree_cap - 1;
    auto cut = [valid](const matrix<series> &m) {
        return m.map([valid](const series &s) { return s.truncate_def(valid); });
    };
    std::vector<check_result> out;
    {
        auto Sstar_neg = adjoint(S, alg).map([](const series &s) { return s.z_flip(); });
        auto D = Sstar_neg * S - matrix<series>::identity(S.size(), lay);
        out.push_back({"symplectic S*(-z) S(z) = I", D.is_zero(), D.is_zero() ? "" : first_failure(D)});
    }
    {
        auto lhs = S.map([&](const series &s) { return s.derivative(t_idx[0]).z_shift(1); });
        auto D = cut(lhs - S);
        out.push_back({"string z d0 S = S", D.is_zero(), D.is_zero() ? "" : first_failure(D)});
    }
    {
        const auto &dc = alg->ring().divisor_coords;
        for (std::size_t i = 0; i < dc.size(); ++i) {
            element<series> p(alg);
            for (std::size_t k = 0; k < dc[i].size(); ++k)
                p[k] = alg->lift(dc[i][k]);
            auto dS = S.map([&](const series &s) {
                series acc(lay);
                for (std::size_t b = 0; b < p.rank(); ++b)
                    if (!p[b].is_zero())
                        acc += s.derivative(t_idx[b]) * p[b];
                return acc.z_shift(1);
            });
            auto rhs = S.map([&](const series &s) { return s.euler(qi).z_shift(1); }) + S * multiplication_matrix(p);
            auto D = cut(dS - rhs);
            out.push_back({"divisor z d_p S = z Q dQ S + S p", D.is_zero(), D.is_zero() ? "" : first_failure(D)});
        }
    }
    return out;
}

// Full S-matrix pipeline over a layout declaring tau0.. and t0.. deformation variables.
struct smatrix_result {
    matrix<series> U, V, W;
    std::vector<series> mirror;   // tilde tau(tau)
    std::vector<series> tau_of_t; // inverse mirror map
    matrix<series> S;
    std::vector<std::size_t> tau_idx, t_idx;
};

inline smatrix_result smatrix_pipeline(const family_h &f)
{
    const auto &lay = f.alg->lay();
    const std::size_t n = f.rank();
    smatrix_result r;
    std::vector<series> tau;
    std::vector<series> tsym;
    for (std::size_t a = 0; a < n; ++a) {
        r.tau_idx.push_back(lay->index("tau" + std::to_string(a)));
        r.t_idx.push_back(lay->index("t" + std::to_string(a)));
        tau.push_back(series::var(lay, r.tau_idx.back()));
        tsym.push_back(series::var(lay, r.t_idx.back()));
    }
    r.U = assemble_U(f, tau);
    auto fac = birkhoff_factorize(r.U);
    r.V = fac.V;
    r.W = fac.W;
    r.mirror = mirror_map(f, r.W);
    r.tau_of_t = invert_mirror_map(f, r.mirror, r.tau_idx, tsym);
    r.S = s_matrix(f, r.tau_of_t);
    return r;
}

// Rational plane curves through 3d-1 points, by the classical recursion.
inline std::vector<integer> kontsevich_oracle(int dmax)
{
    if (dmax < 1)
        throw validation_error("dmax must be ≥ 1");
    std::vector<integer> N(static_cast<std::size_t>(dmax) + 1, 0);
    N[1] = 1;
    for (int d = 2; d <= dmax; ++d) {
        integer s = 0;
        for (int d1 = 1; d1 < d; ++d1) {
            int d2 = d - d1;
            integer term = N[static_cast<std::size_t>(d1)] * N[static_cast<std::size_t>(d2)] * d1 * d1 * d2
                           * (d2 * binomial(3 * d - 4, 3 * d1 - 2) - d1 * binomial(3 * d - 4, 3 * d1 - 1));
            s += term;
        }
        N[static_cast<std::size_t>(d)] = s;
    }
    return std::vector<integer>(N.begin() + 1, N.end());
}

struct nd_result {
    std::vector<integer> computed;
    std::vector<integer> oracle;
    bool agree = false;
};

// N_d for the projective plane from the quantum product along the p^2 direction: the
// J-function is matched at t = t0 + t1 p + t2 p^2, its t-derivatives at t0 = t1 = 0 give S,
// and F_222 = (p^2 * p^2, p^2) yields N_d = (3d-4)! [Q^d t2^{3d-4}] F_222 for d >= 2, while
// N_1 = [Q t2] F_112 with p * computed from the divisor equation.
inline nd_result nd_invariants(int dmax, int q_cap, int p2_cap)
{
    if (dmax < 1)
        throw validation_error("dmax must be ≥ 1");
    const int need_p2 = std::max(0, 3 * dmax - 4);
    if (q_cap < dmax || p2_cap < need_p2)
        throw computation_error("nd_invariants: insufficient caps; minimal sufficient caps are Q <= "
                                + std::to_string(dmax) + " and p^2-deformation degree <= " + std::to_string(need_p2));
    // two extra p^2 orders: one for d/dt2 in S, one for d/dt2 in the quantum product
    const int t2cap = std::max(need_p2 + 2, 2);
    auto lay = layout_builder("z")
                   .novikov("Q")
                   .deformation("t0", 1)
                   .deformation("t1", 1)
                   .deformation("t2", t2cap)
                   .caps(dmax, t2cap + 1)
                   .z_window(3 * t2cap + 12, 3 * t2cap + 12)
                   .build();
    auto alg = make_algebra<series>(projective_ring(3), lay);
    auto fam = seed_family(projective_seed(3), alg, monomial_basis(alg));
    const std::size_t i0 = lay->index("t0"), i1 = lay->index("t1"), i2 = lay->index("t2");
    element<series> t(alg);
    t[0] = series::var(lay, i0);
    t[1] = series::var(lay, i1);
    t[2] = series::var(lay, i2);
    element<series> J = j_function(fam, t);
    // S_{b.} = coords of d/dt_b J at t0 = t1 = 0, then z -> -z
    matrix<series> S(3, lay);
    const std::size_t idx[3] = {i0, i1, i2};
    for (std::size_t b = 0; b < 3; ++b)
        for (std::size_t g = 0; g < 3; ++g)
            S(b, g) = J[g].derivative(idx[b]).evaluate(i0, 0).evaluate(i1, 0).z_flip();
    matrix<series> Sinv = inverse(S);
    matrix<series> C2 = S.map([&](const series &s) { return s.derivative(i2).z_shift(1); }) * Sinv;
    const std::size_t qi = novikov_index(*lay);
    element<series> p = divisor_element(alg);
    matrix<series> C1 =
        (S.map([&](const series &s) { return s.euler(qi).z_shift(1); }) + S * multiplication_matrix(p)) * Sinv;
    for (const auto *C : {&C1, &C2})
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) {
                series x = (*C)(i, j).filter([&](const key &k) { return k[i2] <= t2cap - 2; });
                if (!x.is_zero() && (x.z_min() != 0 || x.z_max() != 0))
                    throw computation_error("nd_invariants: quantum product is not z-independent; caps too low");
            }
    nd_result r;
    r.oracle = kontsevich_oracle(dmax);
    for (int d = 1; d <= dmax; ++d) {
        rational v;
        if (d == 1) {
            key k{};
            k[qi] = 1;
            k[i2] = 1;
            v = C1(1, 0).coeff(k);
        } else {
            key k{};
            k[qi] = static_cast<std::int8_t>(d);
            k[i2] = static_cast<std::int8_t>(3 * d - 4);
            v = C2(2, 0).coeff(k) * factorial(static_cast<unsigned>(3 * d - 4));
        }
        if (v.get_den() != 1)
            throw computation_error("nd_invariants: non-integral invariant at degree " + std::to_string(d));
        r.computed.push_back(v.get_num());
    }
    r.agree = r.computed == r.oracle;
    return r;
}

} // namespace gwr
