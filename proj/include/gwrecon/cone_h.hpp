#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gwrecon/algebra.hpp"

namespace gwr
{

// One linear factor a*p + sum_j b_j*lambda_j + c + m*r*z, taken to the power `power`
// for every r in [lo0 + lo1*d, hi0 + hi1*d]. Negative powers divide.
struct seed_factor {
    rational p_coeff = 0;
    std::vector<std::pair<std::string, rational>> lambda_coeffs;
    rational constant = 0;
    rational z_per_r = 0;
    int lo0 = 0, lo1 = 0, hi0 = 0, hi1 = 0;
    int power = -1;
};

// I_d = (-z) * prod of factors.
struct seed_spec {
    std::string name;
    std::vector<seed_factor> factors;
};

inline seed_spec projective_seed(int n)
{
    if (n < 1)
        throw validation_error("n must be ≥ 1");
    seed_factor f;
    f.p_coeff = 1;
    f.z_per_r = -1;
    f.lo0 = 1;
    f.hi1 = 1;
    f.power = -n;
    return {"projective", {f}};
}

// Torus-equivariant CP^{n-1}: denominators prod_j prod_{r=1}^d (p - lambda_j - r z).
inline seed_spec equivariant_seed(int n)
{
    if (n < 1)
        throw validation_error("n must be ≥ 1");
    seed_spec s{"equivariant", {}};
    for (int j = 1; j <= n; ++j) {
        seed_factor f;
        f.p_coeff = 1;
        f.lambda_coeffs = {{"lambda" + std::to_string(j), -1}};
        f.z_per_r = -1;
        f.lo0 = 1;
        f.hi1 = 1;
        f.power = -1;
        s.factors.push_back(f);
    }
    return s;
}

// Local theory of O(l) over CP^{n-1}. The raw series has I_0 = -z/(lp + lambda); the seed
// used here is its tangent combination with c(z) = lambda + l*(p - dz), which cancels the
// r = ld factor and gives I_0 = -z.
inline seed_spec local_seed(int n, int l)
{
    if (n < 1)
        throw validation_error("n must be ≥ 1");
    if (l <= 0)
        throw validation_error("local seed requires l > 0");
    seed_spec s = projective_seed(n);
    s.name = "local";
    seed_factor f;
    f.p_coeff = l;
    f.lambda_coeffs = {{"lambda", 1}};
    f.z_per_r = -1;
    f.lo0 = 0;
    f.hi0 = -1;
    f.hi1 = l;
    f.power = -1;
    s.factors.push_back(f);
    return s;
}

// The divisor class p (first divisor generator) as an element.
inline element<series> divisor_element(const algebra_ptr<series> &alg, std::size_t i = 0)
{
    const auto &coords = alg->ring().divisor_coords;
    if (i >= coords.size())
        throw validation_error("ring has no divisor generator");
    element<series> e(alg);
    for (std::size_t k = 0; k < coords[i].size(); ++k)
        e[k] = alg->lift(coords[i][k]);
    return e;
}

inline element<series> seed_eval(const seed_spec &spec, const algebra_ptr<series> &alg, int d)
{
    if (d < 0)
        throw validation_error("seed_eval: degree must be ≥ 0");
    const auto &lay = alg->lay();
    element<series> p = divisor_element(alg);
    element<series> out = element<series>::scalar(alg, series::loop(lay, 1, -1));
    for (const auto &f : spec.factors) {
        const int lo = f.lo0 + f.lo1 * d, hi = f.hi0 + f.hi1 * d;
        for (int r = lo; r <= hi; ++r) {
            series s = series::constant(lay, f.constant) + series::loop(lay, 1, f.z_per_r * r);
            for (const auto &[name, b] : f.lambda_coeffs)
                s += series::var(lay, name, 1, b);
            element<series> fac = p.scaled(f.p_coeff) + element<series>::scalar(alg, s);
            element<series> base = f.power < 0 ? invert_unit(fac) : fac;
            for (int k = 0; k < std::abs(f.power); ++k)
                out = out * base;
        }
    }
    return out;
}

// Lowest z exponent of an element (its exact pole bound), or +127 for zero.
inline int pole_bound(const element<series> &e)
{
    int m = 127;
    for (const auto &c : e.coords())
        if (!c.is_zero())
            m = std::min(m, c.z_min());
    return m;
}

// A basis polynomial Phi(X) = sum_k coeffs[k] X^k, X the divisor generator (p, or 1 - P on the K side).
template <class C> using basis_poly = std::vector<C>;

// Monomial basis 1, X, ..., X^{rank-1}.
template <class C> std::vector<basis_poly<C>> monomial_basis(const algebra_ptr<C> &alg)
{
    std::vector<basis_poly<C>> out;
    for (std::size_t a = 0; a < alg->rank(); ++a) {
        basis_poly<C> b(a + 1, alg->zero());
        b[a] = alg->scalar(1);
        out.push_back(b);
    }
    return out;
}

// Basis from a rational coordinate matrix: row alpha holds the X-power coefficients of Phi_alpha.
template <class C>
std::vector<basis_poly<C>> basis_from_matrix(const algebra_ptr<C> &alg, const std::vector<std::vector<rational>> &m)
{
    std::vector<basis_poly<C>> out;
    for (const auto &row : m) {
        basis_poly<C> b;
        for (const auto &x : row)
            b.push_back(alg->scalar(x));
        out.push_back(b);
    }
    return out;
}

template <class C> element<C> eval_basis_poly(const basis_poly<C> &phi, const element<C> &x)
{
    element<C> out(x.alg()), pw = one(x.alg());
    for (std::size_t k = 0; k < phi.size(); ++k) {
        if (k > 0)
            pw = pw * x;
        if (!phi[k].is_zero())
            out += pw * phi[k];
    }
    return out;
}

// The flowed family I(tau) = sum_d I_d Q^d exp(sum_a tau_a Phi_a(p - zd)/z),
// stored as its per-degree data.
struct family_h {
    algebra_ptr<series> alg;
    std::size_t novikov = 1; // layout index of Q
    std::vector<element<series>> terms; // I_d without Q^d
    std::vector<basis_poly<series>> phis;
    std::vector<std::vector<element<series>>> phi_at; // phi_at[d][a] = Phi_a(p - zd)
    bool verified = true;

    std::size_t rank() const { return alg->rank(); }
    int max_degree() const { return static_cast<int>(terms.size()) - 1; }
};

inline std::size_t novikov_index(const layout &lay)
{
    auto nov = lay.indices_of(var_kind::novikov);
    if (nov.size() != 1)
        throw validation_error("exactly one Novikov variable is supported");
    return nov[0];
}

// Split a point sum_d I_d Q^d into its Q-coefficients.
inline std::vector<element<series>> decompose_point(const element<series> &point)
{
    const auto &lay = point.alg()->lay();
    const std::size_t qi = novikov_index(*lay);
    std::vector<element<series>> out;
    for (int d = 0; d <= lay->trunc().q_degree_cap; ++d)
        out.push_back(point.map([&](const series &s) { return s.var_coeff(qi, d); }));
    return out;
}

inline element<series> assemble_point(const algebra_ptr<series> &alg, const std::vector<element<series>> &terms)
{
    const auto &lay = alg->lay();
    const std::size_t qi = novikov_index(*lay);
    element<series> out(alg);
    for (std::size_t d = 0; d < terms.size(); ++d)
        out += terms[d] * series::var(lay, qi, static_cast<int>(d));
    return out;
}

inline family_h make_family(const algebra_ptr<series> &alg, std::vector<element<series>> terms,
                            std::vector<basis_poly<series>> phis, bool verified = true)
{
    if (phis.size() != alg->rank())
        throw validation_error("basis size must equal the ring rank");
    family_h f;
    f.alg = alg;
    f.novikov = novikov_index(*alg->lay());
    f.terms = std::move(terms);
    f.phis = std::move(phis);
    f.verified = verified;
    const auto &lay = alg->lay();
    element<series> p = divisor_element(alg);
    for (std::size_t d = 0; d < f.terms.size(); ++d) {
        element<series> x = p + element<series>::scalar(alg, series::loop(lay, 1, -static_cast<int>(d)));
        std::vector<element<series>> row;
        for (const auto &phi : f.phis)
            row.push_back(eval_basis_poly(phi, x));
        f.phi_at.push_back(std::move(row));
    }
    return f;
}

inline family_h seed_family(const seed_spec &spec, const algebra_ptr<series> &alg,
                            std::vector<basis_poly<series>> phis)
{
    std::vector<element<series>> terms;
    for (int d = 0; d <= alg->lay()->trunc().q_degree_cap; ++d)
        terms.push_back(seed_eval(spec, alg, d));
    return make_family(alg, std::move(terms), std::move(phis));
}

// Family built on a caller-supplied point; cone membership is not certified.
inline family_h flow_family(const element<series> &point, std::vector<basis_poly<series>> phis)
{
    return make_family(point.alg(), decompose_point(point), std::move(phis), false);
}

inline element<series> flow_exponential(const family_h &f, std::size_t d, const std::vector<series> &tau)
{
    element<series> arg(f.alg);
    for (std::size_t a = 0; a < tau.size(); ++a)
        if (!tau[a].is_zero())
            arg += f.phi_at[d][a] * tau[a];
    if (arg.is_zero())
        return one(f.alg);
    return exp_divided_z(arg);
}

// I(tau).
inline element<series> family_value(const family_h &f, const std::vector<series> &tau)
{
    const auto &lay = f.alg->lay();
    element<series> out(f.alg);
    for (std::size_t d = 0; d < f.terms.size(); ++d) {
        if (static_cast<int>(d) > lay->trunc().q_degree_cap)
            break;
        out += f.terms[d] * flow_exponential(f, d, tau) * series::var(lay, f.novikov, static_cast<int>(d));
    }
    return out;
}

// sum_a c_a(z) z d/dtau_a I(tau), computed per degree as I_d E_d sum_a c_a Phi_a(p - zd).
inline element<series> tangent_combination(const family_h &f, const std::vector<series> &tau,
                                           const std::vector<series> &c)
{
    const auto &lay = f.alg->lay();
    element<series> out(f.alg);
    for (std::size_t d = 0; d < f.terms.size(); ++d) {
        if (static_cast<int>(d) > lay->trunc().q_degree_cap)
            break;
        element<series> comb(f.alg);
        for (std::size_t a = 0; a < c.size(); ++a)
            if (!c[a].is_zero())
                comb += f.phi_at[d][a] * c[a];
        if (comb.is_zero())
            continue;
        out += f.terms[d] * flow_exponential(f, d, tau) * comb * series::var(lay, f.novikov, static_cast<int>(d));
    }
    return out;
}

// Symbolic deformation variables tau_a for a family over a layout that declares them.
inline std::vector<series> tau_symbols(const layout_ptr &lay, std::size_t rank, const std::string &prefix = "tau")
{
    std::vector<series> out;
    for (std::size_t a = 0; a < rank; ++a)
        out.push_back(series::var(lay, prefix + std::to_string(a)));
    return out;
}

// Matrix A_{ab} = coordinate b of Phi_a(p) (row convention).
inline matrix<series> basis_matrix(const family_h &f)
{
    matrix<series> a(f.rank(), f.alg->lay());
    for (std::size_t i = 0; i < f.rank(); ++i)
        for (std::size_t j = 0; j < f.rank(); ++j)
            a(i, j) = f.phi_at[0][i][j];
    return a;
}

inline std::vector<series> row_times(const std::vector<series> &v, const matrix<series> &m)
{
    std::vector<series> out(m.size(), series(m.lay()));
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i].is_zero())
            continue;
        for (std::size_t j = 0; j < m.size(); ++j)
            if (!m(i, j).is_zero())
                out[j] += v[i] * m(i, j);
    }
    return out;
}

// Every coefficient must lie in the maximal ideal (no part free of small variables).
inline void require_small_input(const element<series> &t)
{
    for (const auto &c : t.coords()) {
        if (!c.leading().is_zero())
            throw validation_error("input t must lie in the formal neighborhood: every coefficient needs a "
                                   "deformation variable or a positive Novikov degree");
        if (c.z_min() < 0 && !c.is_zero())
            throw validation_error("input t must be a power series in z");
    }
}

struct match_result {
    std::vector<series> tau;
    std::vector<series> c; // power series in z
    element<series> point; // the matched cone point
    int iterations = 0;
};

inline int filtration_limit(const layout &lay)
{
    int wmax = 1;
    for (const auto &v : lay.vars())
        if (v.kind == var_kind::novikov)
            wmax = std::max(wmax, v.weight);
    return lay.trunc().q_degree_cap * wmax + lay.trunc().def_degree_cap + lay.trunc().lambda_order + 8;
}

// Solve [sum_a c_a(z) z d/dtau_a I(tau)]_+ = -z + t(z) for tau and c, order by order in the
// joint Novikov/deformation filtration. Each pass solves the linearized equation at the
// leading order, where the H_+ part of the correction is -sum_a (dtau_a + z dc_a) Phi_a(p).
inline match_result match_input(const family_h &f, const element<series> &t)
{
    require_small_input(t);
    const auto &lay = f.alg->lay();
    const std::size_t n = f.rank();
    if (!(f.terms.size() > 0 && f.terms[0] == element<series>::scalar(f.alg, series::loop(lay, 1, -1))))
        throw validation_error("match_input: the degree-0 term of the point must be -z");
    matrix<series> A = basis_matrix(f);
    matrix<series> Ainv = inverse(A);
    std::vector<series> tau(n, series(lay)), c(n, series(lay));
    {
        std::vector<series> e0(n, series(lay));
        e0[0] = series::constant(lay, 1);
        c = row_times(e0, Ainv);
    }
    element<series> target = t + element<series>::scalar(f.alg, series::loop(lay, 1, -1));
    const int limit = filtration_limit(*lay);
    for (int it = 0; it <= limit; ++it) {
        element<series> g = tangent_combination(f, tau, c);
        element<series> r = target - h_plus_project(g);
        if (r.is_zero())
            return {tau, c, g, it};
        std::vector<series> w = row_times(r.coords(), Ainv);
        for (std::size_t a = 0; a < n; ++a) {
            w[a] = -w[a];
            series w0 = w[a].z_coeff(0);
            tau[a] += w0;
            c[a] += (w[a] - w0).z_shift(-1);
        }
    }
    throw computation_error("match_input: non-convergent filtration (is {Phi_a} a basis of the ring?)");
}

inline element<series> j_function(const family_h &f, const element<series> &t) { return match_input(f, t).point; }

// Apply the divisor flow exp(eps Phi(p - z Q d/dQ)/z) to a point, degree by degree.
inline element<series> divisor_flow(const element<series> &point, const basis_poly<series> &phi, const series &eps)
{
    const auto &alg = point.alg();
    const auto &lay = alg->lay();
    const std::size_t qi = novikov_index(*lay);
    auto terms = decompose_point(point);
    element<series> p = divisor_element(alg);
    element<series> out(alg);
    for (std::size_t d = 0; d < terms.size(); ++d) {
        if (terms[d].is_zero())
            continue;
        element<series> x = p + element<series>::scalar(alg, series::loop(lay, 1, -static_cast<int>(d)));
        element<series> e = exp_divided_z(eval_basis_poly(phi, x) * eps);
        out += terms[d] * e * series::var(lay, qi, static_cast<int>(d));
    }
    return out;
}

} // namespace gwr
