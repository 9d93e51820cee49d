#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "gwrecon/rational.hpp"

namespace gwr
{

// Truncated polynomial in the equivariant parameters: exponent vector -> coefficient.
using lambda_poly = std::map<std::vector<int>, rational>;

namespace lp
{

inline int degree(const std::vector<int> &e)
{
    int s = 0;
    for (int x : e)
        s += x;
    return s;
}

inline lambda_poly constant(const rational &c, std::size_t nvars)
{
    lambda_poly r;
    if (sgn(c) != 0)
        r[std::vector<int>(nvars, 0)] = c;
    return r;
}

inline void add_to(lambda_poly &a, const lambda_poly &b, const rational &scale = 1)
{
    for (const auto &[e, c] : b) {
        auto &slot = a[e];
        slot += c * scale;
        if (sgn(slot) == 0)
            a.erase(e);
    }
}

inline lambda_poly mul(const lambda_poly &a, const lambda_poly &b, int order)
{
    lambda_poly r;
    for (const auto &[ea, ca] : a)
        for (const auto &[eb, cb] : b) {
            std::vector<int> e(ea.size());
            for (std::size_t i = 0; i < e.size(); ++i)
                e[i] = ea[i] + eb[i];
            if (order >= 0 && degree(e) > order)
                continue;
            auto &slot = r[e];
            slot += ca * cb;
            if (sgn(slot) == 0)
                r.erase(e);
        }
    return r;
}

inline bool is_constant(const lambda_poly &a)
{
    for (const auto &[e, c] : a)
        if (degree(e) != 0)
            return false;
    return true;
}

inline rational constant_part(const lambda_poly &a)
{
    for (const auto &[e, c] : a)
        if (degree(e) == 0)
            return c;
    return 0;
}

inline std::string to_string(const lambda_poly &a, const std::vector<std::string> &names)
{
    if (a.empty())
        return "0/1";
    if (is_constant(a))
        return gwr::to_string(constant_part(a));
    std::string out;
    for (const auto &[e, c] : a) {
        if (!out.empty())
            out += " + ";
        out += gwr::to_string(c);
        for (std::size_t i = 0; i < e.size(); ++i)
            if (e[i] != 0)
                out += "*" + names[i] + (e[i] != 1 ? "^" + std::to_string(e[i]) : "");
    }
    return out;
}

} // namespace lp

struct ring_presentation {
    std::string kind; // projective | projective-K | equivariant | local
    int n = 0;
    std::size_t rank = 0;
    std::vector<std::string> labels;
    std::vector<int> grading;
    std::vector<std::string> lambda_names; // empty unless equivariant
    int lambda_order = 0;
    std::vector<lambda_poly> structure; // entry (i*rank + j)*rank + k: coefficient of b_k in b_i*b_j
    std::vector<lambda_poly> gram;      // entry i*rank + j
    std::vector<std::size_t> divisor_indices;
    std::vector<std::vector<lambda_poly>> divisor_coords; // p_i (or P_i) in the basis
    int novikov_rank = 1;
    int twist = 0; // line bundle degree l of the local theory

    std::size_t nvars() const { return lambda_names.size(); }
    const lambda_poly &mult(std::size_t i, std::size_t j, std::size_t k) const
    {
        return structure[(i * rank + j) * rank + k];
    }
    const lambda_poly &pairing(std::size_t i, std::size_t j) const { return gram[i * rank + j]; }
};

namespace detail
{

inline ring_presentation truncated_polynomial_ring(int n, const std::string &kind, const std::string &gen)
{
    if (n < 1)
        throw validation_error("n must be ≥ 1");
    ring_presentation r;
    r.kind = kind;
    r.n = n;
    r.rank = static_cast<std::size_t>(n);
    for (int i = 0; i < n; ++i) {
        r.labels.push_back(i == 0 ? "1" : (i == 1 ? gen : gen + "^" + std::to_string(i)));
        r.grading.push_back(i);
    }
    r.structure.assign(r.rank * r.rank * r.rank, {});
    for (std::size_t i = 0; i < r.rank; ++i)
        for (std::size_t j = 0; i + j < r.rank; ++j)
            r.structure[(i * r.rank + j) * r.rank + i + j] = lp::constant(1, 0);
    if (n > 1)
        r.divisor_indices = {1};
    return r;
}

// Coefficients of a truncated power series in p modulo p^n.
using pseries = std::vector<rational>;

inline pseries pmul(const pseries &a, const pseries &b)
{
    pseries r(a.size(), 0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; i + j < a.size(); ++j)
            r[i + j] += a[i] * b[j];
    return r;
}

inline pseries pinv(const pseries &a)
{
    // a[0] != 0; solve a*r = 1 term by term
    pseries r(a.size(), 0);
    r[0] = 1 / a[0];
    for (std::size_t k = 1; k < a.size(); ++k) {
        rational s = 0;
        for (std::size_t j = 1; j <= k; ++j)
            s += a[j] * r[k - j];
        r[k] = -s / a[0];
    }
    return r;
}

} // namespace detail

// Q[p]/(p^n) with pairing (p^i, p^j) = [i + j == n - 1].
inline ring_presentation projective_ring(int n)
{
    auto r = detail::truncated_polynomial_ring(n, "projective", "p");
    r.gram.assign(r.rank * r.rank, {});
    for (std::size_t i = 0; i < r.rank; ++i)
        r.gram[i * r.rank + (r.rank - 1 - i)] = lp::constant(1, 0);
    // on a point the hyperplane class vanishes
    r.divisor_coords = {std::vector<lambda_poly>(r.rank)};
    if (n > 1)
        r.divisor_coords[0][1] = lp::constant(1, 0);
    return r;
}

// Local theory of O(l) over CP^{n-1}: Q((lambda))[p]/(p^n) with the pairing
// (a, b) = integral of a b (lambda + l p). The seed family carries the factor 1/(lambda + l p)
// at every degree, so its cone is Lagrangian for the Euler-weighted pairing.
inline ring_presentation local_projective_ring(int n, int l)
{
    if (l <= 0)
        throw validation_error("local ring requires l > 0");
    auto r = detail::truncated_polynomial_ring(n, "local", "p");
    r.lambda_names = {"lambda"};
    r.twist = l;
    r.lambda_order = -1; // Laurent in lambda: products are not truncated
    for (auto &x : r.structure)
        if (!x.empty())
            x = lp::constant(1, 1);
    r.gram.assign(r.rank * r.rank, {});
    for (std::size_t i = 0; i < r.rank; ++i)
        for (std::size_t j = 0; i + j < r.rank; ++j) {
            if (i + j == r.rank - 1)
                r.gram[i * r.rank + j] = lambda_poly{{{1}, 1}};
            else if (i + j == r.rank - 2)
                r.gram[i * r.rank + j] = lp::constant(l, 1);
        }
    r.divisor_coords = {std::vector<lambda_poly>(r.rank)};
    if (n > 1)
        r.divisor_coords[0][1] = lp::constant(1, 1);
    return r;
}

// Euler characteristics chi(eps^k), eps = 1 - P, P = O(-1) on CP^{n-1}, via
// Hirzebruch-Riemann-Roch over Q[p]/(p^n).
inline std::vector<rational> ktheory_euler_characteristics(int n)
{
    using namespace detail;
    const std::size_t N = static_cast<std::size_t>(n);
    pseries expm(N, 0); // e^{-p}
    for (std::size_t k = 0; k < N; ++k)
        expm[k] = rational((k % 2) ? -1 : 1) / factorial(static_cast<unsigned>(k));
    pseries ch_eps(N, 0); // 1 - e^{-p}
    for (std::size_t k = 1; k < N; ++k)
        ch_eps[k] = -expm[k];
    // p/(1 - e^{-p}) = 1 / (sum_{k>=0} (-1)^k p^k/(k+1)!)
    pseries q(N, 0);
    for (std::size_t k = 0; k < N; ++k)
        q[k] = rational((k % 2) ? -1 : 1) / factorial(static_cast<unsigned>(k + 1));
    pseries td_line = pinv(q);
    pseries td(N, 0);
    td[0] = 1;
    for (int i = 0; i < n; ++i)
        td = pmul(td, td_line);
    std::vector<rational> chi;
    pseries pw(N, 0);
    pw[0] = 1;
    for (std::size_t k = 0; k < 2 * N - 1; ++k) {
        chi.push_back(pmul(pw, td)[N - 1]);
        pw = pmul(pw, ch_eps);
    }
    return chi;
}

// K^0(CP^{n-1}) = Q[P]/((1-P)^n) in the basis (1-P)^i.
inline ring_presentation ktheory_projective_ring(int n)
{
    auto r = detail::truncated_polynomial_ring(n, "projective-K", "(1-P)");
    auto chi = ktheory_euler_characteristics(n);
    r.gram.assign(r.rank * r.rank, {});
    for (std::size_t i = 0; i < r.rank; ++i)
        for (std::size_t j = 0; j < r.rank; ++j)
            r.gram[i * r.rank + j] = lp::constant(chi[i + j], 0);
    // P = 1 - (1-P)
    r.divisor_coords = {std::vector<lambda_poly>(r.rank)};
    r.divisor_coords[0][0] = lp::constant(1, 0);
    if (n > 1)
        r.divisor_coords[0][1] = lp::constant(-1, 0);
    return r;
}

// Torus-equivariant cohomology of CP^{n-1}: relation prod_j (p - lambda_j) = 0,
// coefficients truncated at total lambda-degree lambda_order.
inline ring_presentation equivariant_projective_ring(int n, int lambda_order)
{
    if (n < 1)
        throw validation_error("n must be ≥ 1");
    if (lambda_order < 0)
        throw validation_error("lambda_order must be ≥ 0");
    ring_presentation r;
    r.kind = "equivariant";
    r.n = n;
    r.rank = static_cast<std::size_t>(n);
    r.lambda_order = lambda_order;
    const std::size_t nv = r.rank;
    for (int j = 1; j <= n; ++j)
        r.lambda_names.push_back("lambda" + std::to_string(j));
    for (int i = 0; i < n; ++i) {
        r.labels.push_back(i == 0 ? "1" : (i == 1 ? "p" : "p^" + std::to_string(i)));
        r.grading.push_back(i);
    }
    // prod_j (p - lambda_j) as coefficients of p^k: poly[k]
    std::vector<lambda_poly> prod{lp::constant(1, nv)};
    for (std::size_t j = 0; j < nv; ++j) {
        std::vector<lambda_poly> next(prod.size() + 1);
        lambda_poly lam;
        std::vector<int> e(nv, 0);
        e[j] = 1;
        lam[e] = -1;
        for (std::size_t k = 0; k < prod.size(); ++k) {
            lp::add_to(next[k + 1], prod[k]);
            lp::add_to(next[k], lp::mul(prod[k], lam, lambda_order));
        }
        prod = std::move(next);
    }
    // p^m for m < 2n-1 reduced to the basis
    std::vector<std::vector<lambda_poly>> powers;
    for (std::size_t m = 0; m < 2 * r.rank - 1; ++m) {
        std::vector<lambda_poly> v(r.rank);
        if (m < r.rank) {
            v[m] = lp::constant(1, nv);
        } else {
            const auto &prev = powers[m - 1];
            // p * prev, then replace p^n by p^n - prod
            std::vector<lambda_poly> up(r.rank + 1);
            for (std::size_t k = 0; k < r.rank; ++k)
                up[k + 1] = prev[k];
            for (std::size_t k = 0; k < r.rank; ++k)
                v[k] = up[k];
            for (std::size_t k = 0; k < r.rank; ++k)
                lp::add_to(v[k], lp::mul(up[r.rank], prod[k], lambda_order), -1);
        }
        powers.push_back(std::move(v));
    }
    r.structure.assign(r.rank * r.rank * r.rank, {});
    r.gram.assign(r.rank * r.rank, {});
    for (std::size_t i = 0; i < r.rank; ++i)
        for (std::size_t j = 0; j < r.rank; ++j) {
            for (std::size_t k = 0; k < r.rank; ++k)
                r.structure[(i * r.rank + j) * r.rank + k] = powers[i + j][k];
            r.gram[i * r.rank + j] = powers[i + j][r.rank - 1];
        }
    r.divisor_coords = {std::vector<lambda_poly>(r.rank)};
    if (n > 1) {
        r.divisor_indices = {1};
        r.divisor_coords[0][1] = lp::constant(1, nv);
    } else if (lambda_order >= 1) {
        // p = lambda_1 on a point
        r.divisor_coords[0][0] = lambda_poly{{{1}, 1}};
    }
    return r;
}

// Multiply two coordinate vectors with the presentation's table.
inline std::vector<lambda_poly> ring_multiply(const ring_presentation &r, const std::vector<lambda_poly> &a,
                                              const std::vector<lambda_poly> &b)
{
    std::vector<lambda_poly> out(r.rank);
    for (std::size_t i = 0; i < r.rank; ++i)
        for (std::size_t j = 0; j < r.rank; ++j) {
            if (a[i].empty() || b[j].empty())
                continue;
            auto ab = lp::mul(a[i], b[j], r.lambda_order);
            for (std::size_t k = 0; k < r.rank; ++k)
                if (!r.mult(i, j, k).empty())
                    lp::add_to(out[k], lp::mul(ab, r.mult(i, j, k), r.lambda_order));
        }
    return out;
}

inline lambda_poly ring_pair(const ring_presentation &r, const std::vector<lambda_poly> &a,
                             const std::vector<lambda_poly> &b)
{
    lambda_poly out;
    for (std::size_t i = 0; i < r.rank; ++i)
        for (std::size_t j = 0; j < r.rank; ++j)
            if (!a[i].empty() && !b[j].empty() && !r.pairing(i, j).empty())
                lp::add_to(out, lp::mul(lp::mul(a[i], b[j], r.lambda_order), r.pairing(i, j), r.lambda_order));
    return out;
}

inline std::vector<lambda_poly> basis_vector(const ring_presentation &r, std::size_t i)
{
    std::vector<lambda_poly> v(r.rank);
    v[i] = lp::constant(1, r.nvars());
    return v;
}

// Inverse of the Gram matrix (row alpha holds the coordinates of phi^alpha).
// The lambda = 0 part is inverted exactly and the remainder by a terminating Neumann series.
inline std::vector<std::vector<lambda_poly>> dual_basis(const ring_presentation &r)
{
    const std::size_t n = r.rank;
    if (r.kind == "local") {
        // phi^j = p^{n-1-j} / (lambda + l p) = sum_k (-l)^k lambda^{-k-1} p^{n-1-j+k}
        std::vector<std::vector<lambda_poly>> out(n, std::vector<lambda_poly>(n));
        for (std::size_t j = 0; j < n; ++j) {
            rational c = 1;
            for (std::size_t m = n - 1 - j, k = 0; m < n; ++m, ++k) {
                out[j][m] = lambda_poly{{{-static_cast<int>(k) - 1}, c}};
                c *= -r.twist;
            }
        }
        return out;
    }
    std::vector<std::vector<rational>> g0(n, std::vector<rational>(n, 0)), inv(n, std::vector<rational>(n, 0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            g0[i][j] = lp::constant_part(r.pairing(i, j));
    for (std::size_t i = 0; i < n; ++i)
        inv[i][i] = 1;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        while (piv < n && sgn(g0[piv][c]) == 0)
            ++piv;
        if (piv == n)
            throw computation_error("dual_basis: singular Gram matrix");
        std::swap(g0[piv], g0[c]);
        std::swap(inv[piv], inv[c]);
        rational s = 1 / g0[c][c];
        for (std::size_t j = 0; j < n; ++j) {
            g0[c][j] *= s;
            inv[c][j] *= s;
        }
        for (std::size_t i = 0; i < n; ++i)
            if (i != c && sgn(g0[i][c]) != 0) {
                rational f = g0[i][c];
                for (std::size_t j = 0; j < n; ++j) {
                    g0[i][j] -= f * g0[c][j];
                    inv[i][j] -= f * inv[c][j];
                }
            }
    }
    using mat = std::vector<std::vector<lambda_poly>>;
    auto matmul = [&](const mat &a, const mat &b) {
        mat out(n, std::vector<lambda_poly>(n));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k)
                for (std::size_t j = 0; j < n; ++j)
                    if (!a[i][k].empty() && !b[k][j].empty())
                        lp::add_to(out[i][j], lp::mul(a[i][k], b[k][j], r.lambda_order));
        return out;
    };
    mat ginv(n, std::vector<lambda_poly>(n)), nil(n, std::vector<lambda_poly>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            ginv[i][j] = lp::constant(inv[i][j], r.nvars());
            for (const auto &[e, c] : r.pairing(i, j))
                if (lp::degree(e) > 0)
                    nil[i][j][e] = c;
        }
    // G^{-1} = sum_k (-G0^{-1} N)^k G0^{-1}
    mat step = matmul(ginv, nil);
    for (auto &row : step)
        for (auto &x : row)
            for (auto &[e, c] : x)
                c = -c;
    mat result = ginv, term = ginv;
    for (int k = 0; k <= r.lambda_order; ++k) {
        term = matmul(step, term);
        bool zero = true;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                if (!term[i][j].empty())
                    zero = false;
                lp::add_to(result[i][j], term[i][j]);
            }
        if (zero)
            break;
    }
    return result;
}

inline nlohmann::json to_json(const ring_presentation &r)
{
    nlohmann::json j;
    j["kind"] = r.kind;
    j["n"] = r.n;
    j["rank"] = r.rank;
    j["basis_labels"] = r.labels;
    j["grading"] = r.grading;
    j["lambda"] = r.lambda_names;
    j["lambda_order"] = r.lambda_order;
    if (r.kind == "local")
        j["l"] = r.twist;
    j["novikov_rank"] = r.novikov_rank;
    j["divisor_indices"] = r.divisor_indices;
    auto table = nlohmann::json::array();
    for (std::size_t i = 0; i < r.rank; ++i)
        for (std::size_t jj = 0; jj < r.rank; ++jj)
            for (std::size_t k = 0; k < r.rank; ++k)
                if (!r.mult(i, jj, k).empty())
                    table.push_back({i, jj, k, lp::to_string(r.mult(i, jj, k), r.lambda_names)});
    j["structure_constants"] = table;
    auto gram = nlohmann::json::array();
    for (std::size_t i = 0; i < r.rank; ++i) {
        auto row = nlohmann::json::array();
        for (std::size_t jj = 0; jj < r.rank; ++jj)
            row.push_back(lp::to_string(r.pairing(i, jj), r.lambda_names));
        gram.push_back(row);
    }
    j["pairing_gram"] = gram;
    return j;
}

} // namespace gwr
