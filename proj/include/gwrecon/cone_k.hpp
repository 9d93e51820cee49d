#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gwrecon/cone_h.hpp"
#include "gwrecon/qrational.hpp"

namespace gwr
{

// Loop variable is q; the K-ring basis is (1-P)^i.

inline qrational one_minus_q(const layout_ptr &lay) { return qrational(qrational::poly_series(lay, upoly{1, -1})); }

inline qrational q_power(const layout_ptr &lay, int e) { return qrational(series::loop(lay, e)); }

// The class P as an element of the K-ring algebra.
inline element<qrational> line_class(const algebra_ptr<qrational> &alg)
{
    const auto &coords = alg->ring().divisor_coords;
    if (coords.empty())
        throw validation_error("ring has no line bundle generator");
    element<qrational> e(alg);
    for (std::size_t k = 0; k < coords[0].size(); ++k)
        e[k] = alg->lift(coords[0][k]);
    return e;
}

// I_d = (1-q) / prod_{r=1}^d (1 - P q^r)^n for CP^{n-1}.
inline element<qrational> seed_eval_k(int n, const algebra_ptr<qrational> &alg, int d)
{
    if (n < 1)
        throw validation_error("n must be ≥ 1");
    if (d < 0)
        throw validation_error("seed_eval_k: degree must be ≥ 0");
    if (alg->rank() != static_cast<std::size_t>(n))
        throw mismatch_error("seed_eval_k: ring rank does not match n");
    const auto &lay = alg->lay();
    element<qrational> P = line_class(alg);
    element<qrational> out = element<qrational>::scalar(alg, one_minus_q(lay));
    for (int r = 1; r <= d; ++r) {
        element<qrational> fac = one(alg) - P * q_power(lay, r);
        element<qrational> inv = invert_unit(fac);
        for (int k = 0; k < n; ++k)
            out = out * inv;
    }
    return out;
}

struct family_k {
    algebra_ptr<qrational> alg;
    std::size_t novikov = 0;
    std::vector<element<qrational>> terms;   // I_d
    std::vector<basis_poly<qrational>> psis; // Psi_a as polynomials in X = 1 - P
    std::vector<std::vector<element<qrational>>> psi_at; // Psi_a(P q^d)
    bool verified = true;

    std::size_t rank() const { return alg->rank(); }
};

inline family_k make_family_k(const algebra_ptr<qrational> &alg, std::vector<element<qrational>> terms,
                              std::vector<basis_poly<qrational>> psis, bool verified = true)
{
    if (psis.size() != alg->rank())
        throw validation_error("basis size must equal the ring rank");
    family_k f;
    f.alg = alg;
    f.novikov = novikov_index(*alg->lay());
    f.terms = std::move(terms);
    f.psis = std::move(psis);
    f.verified = verified;
    const auto &lay = alg->lay();
    element<qrational> P = line_class(alg);
    for (std::size_t d = 0; d < f.terms.size(); ++d) {
        // X = 1 - P q^d
        element<qrational> x = one(alg) - P * q_power(lay, static_cast<int>(d));
        std::vector<element<qrational>> row;
        for (const auto &psi : f.psis)
            row.push_back(eval_basis_poly(psi, x));
        f.psi_at.push_back(std::move(row));
    }
    return f;
}

inline family_k seed_family_k(int n, const algebra_ptr<qrational> &alg, std::vector<basis_poly<qrational>> psis)
{
    std::vector<element<qrational>> terms;
    for (int d = 0; d <= alg->lay()->trunc().q_degree_cap; ++d)
        terms.push_back(seed_eval_k(n, alg, d));
    return make_family_k(alg, std::move(terms), std::move(psis));
}

inline std::vector<element<qrational>> decompose_point_k(const element<qrational> &point)
{
    const auto &lay = point.alg()->lay();
    const std::size_t qi = novikov_index(*lay);
    std::vector<element<qrational>> out;
    for (int d = 0; d <= lay->trunc().q_degree_cap; ++d)
        out.push_back(point.map([&](const qrational &s) { return qrational(s.num().var_coeff(qi, d), s.den()); }));
    return out;
}

// Family built on a caller-supplied point; cone membership is not certified.
inline family_k flow_family_k(const element<qrational> &point, std::vector<basis_poly<qrational>> psis)
{
    return make_family_k(point.alg(), decompose_point_k(point), std::move(psis), false);
}

inline element<qrational> flow_exponential_k(const family_k &f, std::size_t d, const std::vector<qrational> &tau)
{
    element<qrational> arg(f.alg);
    for (std::size_t a = 0; a < tau.size(); ++a)
        if (!tau[a].is_zero())
            arg += f.psi_at[d][a] * tau[a];
    if (arg.is_zero())
        return one(f.alg);
    return exp_divided_one_minus_q(arg);
}

// I(tau) = sum_d I_d Q^d exp(sum_a tau_a Psi_a(P q^d) / (1-q)).
inline element<qrational> family_value_k(const family_k &f, const std::vector<qrational> &tau)
{
    const auto &lay = f.alg->lay();
    element<qrational> out(f.alg);
    for (std::size_t d = 0; d < f.terms.size() && static_cast<int>(d) <= lay->trunc().q_degree_cap; ++d)
        out += f.terms[d] * flow_exponential_k(f, d, tau)
               * qrational(series::var(lay, f.novikov, static_cast<int>(d)));
    return out;
}

// sum_a c_a(q) (1-q) d/dtau_a I(tau).
inline element<qrational> tangent_k(const family_k &f, const std::vector<qrational> &tau,
                                    const std::vector<qrational> &c)
{
    const auto &lay = f.alg->lay();
    element<qrational> out(f.alg);
    for (std::size_t d = 0; d < f.terms.size() && static_cast<int>(d) <= lay->trunc().q_degree_cap; ++d) {
        element<qrational> comb(f.alg);
        for (std::size_t a = 0; a < c.size(); ++a)
            if (!c[a].is_zero())
                comb += f.psi_at[d][a] * c[a];
        if (comb.is_zero())
            continue;
        out += f.terms[d] * flow_exponential_k(f, d, tau) * comb
               * qrational(series::var(lay, f.novikov, static_cast<int>(d)));
    }
    return out;
}

inline matrix<qrational> basis_matrix_k(const family_k &f)
{
    matrix<qrational> a(f.rank(), f.alg->lay());
    for (std::size_t i = 0; i < f.rank(); ++i)
        for (std::size_t j = 0; j < f.rank(); ++j)
            a(i, j) = f.psi_at[0][i][j];
    return a;
}

inline std::vector<qrational> row_times_k(const std::vector<qrational> &v, const matrix<qrational> &m)
{
    std::vector<qrational> out(m.size(), qrational(m.lay()));
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i].is_zero())
            continue;
        for (std::size_t j = 0; j < m.size(); ++j)
            if (!m(i, j).is_zero())
                out[j] += v[i] * m(i, j);
    }
    return out;
}

struct match_result_k {
    std::vector<qrational> tau;
    std::vector<qrational> c; // Laurent polynomials in q
    element<qrational> point;
    int iterations = 0;
};

// Solve laurent_part(sum_a c_a (1-q) d_a I(tau)) = 1 - q + t. At leading order the Laurent
// part of the correction is sum_a ((1-q) dc_a + dtau_a) Psi_a(P), so with w = R A^{-1}:
// dtau = w(1) and dc = (w - w(1)) / (1-q).
inline match_result_k match_input_k(const family_k &f, const element<qrational> &t)
{
    const auto &lay = f.alg->lay();
    const std::size_t n = f.rank();
    for (const auto &x : t.coords()) {
        if (!x.is_laurent_polynomial())
            throw validation_error("match_input_k: input must be a Laurent polynomial in q");
        if (!x.leading().is_zero())
            throw validation_error("match_input_k: input must vanish modulo Novikov and deformation variables");
    }
    if (!(f.terms.size() > 0 && f.terms[0] == element<qrational>::scalar(f.alg, one_minus_q(lay))))
        throw validation_error("match_input_k: the degree-0 term of the point must be 1-q");
    for (const auto &psi : f.psis)
        for (const auto &x : psi)
            if (x.num().z_min() != 0 || x.num().z_max() != 0 || !x.is_laurent_polynomial())
                if (!x.is_zero())
                    throw validation_error("match_input_k: q-dependent Psi coefficients are not supported in matching");
    matrix<qrational> A = basis_matrix_k(f);
    matrix<qrational> Ainv = inverse(A);
    std::vector<qrational> tau(n, qrational(lay)), c(n, qrational(lay));
    {
        std::vector<qrational> e0(n, qrational(lay));
        e0[0] = qrational::constant(lay, 1);
        c = row_times_k(e0, Ainv);
    }
    element<qrational> target = t + element<qrational>::scalar(f.alg, one_minus_q(lay));
    const qrational inv_one_minus_q = qrational::inverse_poly(lay, upoly{1, -1});
    const int limit = filtration_limit(*lay);
    for (int it = 0; it <= limit; ++it) {
        element<qrational> g = tangent_k(f, tau, c);
        element<qrational> r = target - k_split(g).first;
        if (r.is_zero())
            return {tau, c, g, it};
        std::vector<qrational> w = row_times_k(r.coords(), Ainv);
        for (std::size_t a = 0; a < n; ++a) {
            if (w[a].is_zero())
                continue;
            if (!w[a].is_laurent_polynomial())
                throw computation_error("match_input_k: non-polynomial correction (is {Psi_a} a basis?)");
            qrational w1(w[a].evaluate_q(1));
            tau[a] += w1;
            qrational dc = (w[a] - w1) * inv_one_minus_q;
            if (!dc.is_laurent_polynomial())
                throw computation_error("match_input_k: internal division defect");
            c[a] += dc;
        }
    }
    throw computation_error("match_input_k: non-convergent filtration (is {Psi_a} a basis of the ring?)");
}

inline element<qrational> j_function_k(const family_k &f, const element<qrational> &t)
{
    return match_input_k(f, t).point;
}

// Apply exp(eps Psi(P q^{Q d/dQ}) / (1-q)) degree by degree.
inline element<qrational> translation_flow_k(const element<qrational> &point, const basis_poly<qrational> &psi,
                                             const qrational &eps)
{
    const auto &alg = point.alg();
    const auto &lay = alg->lay();
    const std::size_t qi = novikov_index(*lay);
    auto terms = decompose_point_k(point);
    element<qrational> P = line_class(alg);
    element<qrational> out(alg);
    for (std::size_t d = 0; d < terms.size(); ++d) {
        if (terms[d].is_zero())
            continue;
        element<qrational> x = one(alg) - P * q_power(lay, static_cast<int>(d));
        element<qrational> e = exp_divided_one_minus_q(eval_basis_poly(psi, x) * eps);
        out += terms[d] * e * qrational(series::var(lay, qi, static_cast<int>(d)));
    }
    return out;
}

// U_{ab} = coordinate b of (1-q) d/dtau_a I(tau).
inline matrix<qrational> assemble_U_k(const family_k &f, const std::vector<qrational> &tau)
{
    const std::size_t n = f.rank();
    matrix<qrational> U(n, f.alg->lay());
    for (std::size_t a = 0; a < n; ++a) {
        std::vector<qrational> c(n, qrational(f.alg->lay()));
        c[a] = qrational::constant(f.alg->lay(), 1);
        auto row = tangent_k(f, tau, c);
        for (std::size_t b = 0; b < n; ++b)
            U(a, b) = row[b];
    }
    return U;
}

struct factorization_k {
    matrix<qrational> V, W;
    int iterations = 0;
};

// U = V W with V Laurent-polynomial valued and W regular at q = 0 with W(0) = I. Each defect
// X = V0^{-1} E is split as L + R (Laurent + reduced); L + R(0) goes to V and R - R(0) to W.
inline factorization_k birkhoff_factorize_k(const matrix<qrational> &U)
{
    const auto &lay = U.lay();
    const std::size_t n = U.size();
    matrix<qrational> V0 = U.leading();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (!V0(i, j).is_laurent_polynomial())
                throw computation_error("birkhoff_k: leading term is not a Laurent polynomial matrix");
    if (determinant(V0).is_zero())
        throw computation_error("birkhoff_k: leading-order singularity at order 0");
    matrix<qrational> V0inv = inverse(V0);
    matrix<qrational> V = V0, W = matrix<qrational>::identity(n, lay);
    const int limit = filtration_limit(*lay);
    for (int it = 0; it <= limit; ++it) {
        matrix<qrational> E = U - V * W;
        if (E.is_zero())
            return {V, W, it};
        matrix<qrational> X = V0inv * E;
        matrix<qrational> Lp(n, lay), Rp(n, lay);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                auto [l, r] = X(i, j).k_split();
                qrational r0 = r.is_zero() ? qrational(lay) : qrational(r.evaluate_q(0));
                Lp(i, j) = l + r0;
                Rp(i, j) = r - r0;
            }
        V = V + V0 * Lp;
        W = W + Rp;
    }
    throw computation_error("birkhoff_k: elimination did not converge");
}

} // namespace gwr
