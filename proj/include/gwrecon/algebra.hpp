#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "gwrecon/qrational.hpp"
#include "gwrecon/ring.hpp"
#include "gwrecon/series.hpp"

namespace gwr
{

inline constexpr int neumann_limit = 1024;

// ---- scalar units -------------------------------------------------------

// Inverse of the unit monomial that leads x: the lowest-z monomial of the part free
// of small variables (in Laurent-lambda mode, among the monomials of highest lambda power).
inline series unit_inverse(const series &x)
{
    series lead = x.leading();
    if (lead.is_zero())
        throw computation_error("invert_unit: non-unit leading part");
    const layout &L = *x.lay();
    auto lam = L.indices_of(var_kind::lambda);
    const series::term *best = nullptr;
    int best_lam = 0;
    for (const auto &t : lead.terms()) {
        int lsum = 0;
        if (L.mode() == lambda_mode::laurent)
            for (auto i : lam)
                lsum += t.k[i];
        if (!best || lsum > best_lam || (lsum == best_lam && t.k[0] < best->k[0])) {
            best = &t;
            best_lam = lsum;
        }
    }
    key k = best->k;
    for (auto &e : k)
        e = static_cast<std::int8_t>(-e);
    return series::monomial(x.lay(), k, 1 / lead.coeff_of(*best));
}

// Inverse of the small-variable-free part, an honest rational function of q.
inline qrational unit_inverse(const qrational &x)
{
    qrational lead = x.leading();
    if (lead.is_zero())
        throw computation_error("invert_unit: non-unit leading part");
    // lead = q^m n(q) / D(q) with n(0) != 0
    const auto &num = lead.num();
    int m = num.z_min();
    upoly n;
    {
        auto groups = qrational::group_by_rest(num);
        if (groups.size() != 1)
            throw computation_error("invert_unit: leading part is not a scalar rational function");
        n = groups.begin()->second.second;
    }
    series top = qrational::poly_series(x.lay(), lead.den(), -m);
    rational c0 = n[0];
    return qrational(top.scaled(1 / c0), n.scaled(1 / c0));
}

template <class C> C one_like(const C &x) { return C::constant(x.lay(), 1); }

template <class C> C inverse(const C &x)
{
    C uinv = unit_inverse(x);
    C y = x * uinv;
    C r = y - one_like(x);
    C sum = one_like(x), term = one_like(x);
    for (int k = 0; k < neumann_limit; ++k) {
        term = -(term * r);
        if (term.is_zero())
            return sum * uinv;
        sum += term;
    }
    throw computation_error("invert_unit: non-unit leading part (expansion does not terminate)");
}

// ---- algebra and elements ------------------------------------------------

template <class C> class algebra
{
public:
    algebra(std::shared_ptr<const ring_presentation> ring, layout_ptr lay)
        : ring_(std::move(ring)), lay_(std::move(lay)), rank_(ring_->rank)
    {
        for (const auto &name : ring_->lambda_names)
            lambda_slots_.push_back(lay_->index(name));
        table_.resize(rank_ * rank_);
        for (std::size_t i = 0; i < rank_; ++i)
            for (std::size_t j = 0; j < rank_; ++j)
                for (std::size_t k = 0; k < rank_; ++k) {
                    const auto &p = ring_->mult(i, j, k);
                    if (p.empty())
                        continue;
                    table_[i * rank_ + j].push_back({k, lift(p), lp::is_constant(p) && lp::constant_part(p) == 1});
                }
        gram_.reserve(rank_ * rank_);
        for (const auto &g : ring_->gram)
            gram_.push_back(lift(g));
    }

    const ring_presentation &ring() const { return *ring_; }
    const std::shared_ptr<const ring_presentation> &ring_ptr() const { return ring_; }
    const layout_ptr &lay() const { return lay_; }
    std::size_t rank() const { return rank_; }
    const C &gram(std::size_t i, std::size_t j) const { return gram_[i * rank_ + j]; }

    struct entry {
        std::size_t k;
        C value;
        bool is_one;
    };
    const std::vector<entry> &products(std::size_t i, std::size_t j) const { return table_[i * rank_ + j]; }

    C lift(const lambda_poly &p) const
    {
        std::vector<std::pair<key, rational>> t;
        for (const auto &[e, c] : p) {
            key k{};
            for (std::size_t v = 0; v < e.size(); ++v)
                k[lambda_slots_[v]] = static_cast<std::int8_t>(e[v]);
            t.push_back({k, c});
        }
        return C(series::from_terms(lay_, t));
    }

    C zero() const { return C(lay_); }
    C scalar(const rational &c) const { return C::constant(lay_, c); }

private:
    std::shared_ptr<const ring_presentation> ring_;
    layout_ptr lay_;
    std::size_t rank_;
    std::vector<std::size_t> lambda_slots_;
    std::vector<std::vector<entry>> table_;
    std::vector<C> gram_;
};

template <class C> using algebra_ptr = std::shared_ptr<const algebra<C>>;

template <class C>
algebra_ptr<C> make_algebra(const ring_presentation &ring, layout_ptr lay)
{
    return std::make_shared<const algebra<C>>(std::make_shared<const ring_presentation>(ring), std::move(lay));
}

// Element of the coefficient ring tensored with the scalar series type C.
template <class C> class element
{
public:
    element() = default;
    explicit element(algebra_ptr<C> alg) : alg_(std::move(alg)), c_(alg_->rank(), alg_->zero()) {}
    element(algebra_ptr<C> alg, std::vector<C> coords) : alg_(std::move(alg)), c_(std::move(coords))
    {
        if (c_.size() != alg_->rank())
            throw mismatch_error("element: coordinate count does not match ring rank");
    }

    static element basis(algebra_ptr<C> alg, std::size_t i, const C &coeff)
    {
        element e(alg);
        e.c_[i] = coeff;
        return e;
    }
    static element basis(algebra_ptr<C> alg, std::size_t i, const rational &coeff = 1)
    {
        auto s = alg->scalar(coeff);
        return basis(alg, i, s);
    }
    static element scalar(algebra_ptr<C> alg, const C &s) { return basis(std::move(alg), 0, s); }
    // Coordinates given as rationals.
    static element from_rationals(algebra_ptr<C> alg, const std::vector<rational> &v)
    {
        element e(alg);
        for (std::size_t i = 0; i < v.size(); ++i)
            e.c_[i] = alg->scalar(v[i]);
        return e;
    }

    const algebra_ptr<C> &alg() const { return alg_; }
    std::size_t rank() const { return c_.size(); }
    const C &operator[](std::size_t i) const { return c_[i]; }
    C &operator[](std::size_t i) { return c_[i]; }
    const std::vector<C> &coords() const { return c_; }

    bool is_zero() const
    {
        for (const auto &x : c_)
            if (!x.is_zero())
                return false;
        return true;
    }

    friend bool operator==(const element &a, const element &b) { return a.c_ == b.c_; }
    friend bool operator!=(const element &a, const element &b) { return !(a == b); }

    friend element operator+(const element &a, const element &b)
    {
        check(a, b);
        element r = a;
        for (std::size_t i = 0; i < r.c_.size(); ++i)
            r.c_[i] += b.c_[i];
        return r;
    }
    friend element operator-(const element &a, const element &b)
    {
        check(a, b);
        element r = a;
        for (std::size_t i = 0; i < r.c_.size(); ++i)
            r.c_[i] -= b.c_[i];
        return r;
    }
    element operator-() const
    {
        element r = *this;
        for (auto &x : r.c_)
            x = -x;
        return r;
    }
    element &operator+=(const element &o) { return *this = *this + o; }
    element &operator-=(const element &o) { return *this = *this - o; }

    friend element operator*(const element &a, const element &b)
    {
        check(a, b);
        const auto &alg = *a.alg_;
        element r(a.alg_);
        const std::size_t n = alg.rank();
        for (std::size_t i = 0; i < n; ++i) {
            if (a.c_[i].is_zero())
                continue;
            for (std::size_t j = 0; j < n; ++j) {
                if (b.c_[j].is_zero())
                    continue;
                const auto &prods = alg.products(i, j);
                if (prods.empty())
                    continue;
                C ab = a.c_[i] * b.c_[j];
                for (const auto &e : prods)
                    r.c_[e.k] += e.is_one ? ab : ab * e.value;
            }
        }
        return r;
    }
    element &operator*=(const element &o) { return *this = *this * o; }

    friend element operator*(const element &a, const C &s)
    {
        element r = a;
        for (auto &x : r.c_)
            if (!x.is_zero())
                x = x * s;
        return r;
    }
    friend element operator*(const C &s, const element &a) { return a * s; }

    element scaled(const rational &s) const
    {
        element r = *this;
        for (auto &x : r.c_)
            x = x.scaled(s);
        return r;
    }

    template <class F> element map(F &&f) const
    {
        element r = *this;
        for (auto &x : r.c_)
            x = f(x);
        return r;
    }

    std::string to_string() const
    {
        std::string out;
        const auto &labels = alg_->ring().labels;
        for (std::size_t i = 0; i < c_.size(); ++i) {
            if (c_[i].is_zero())
                continue;
            if (!out.empty())
                out += " + ";
            out += "[" + c_[i].to_string() + "]*" + labels[i];
        }
        return out.empty() ? "0" : out;
    }

private:
    static void check(const element &a, const element &b)
    {
        if (a.alg_ != b.alg_ && (a.alg_->lay() != b.alg_->lay() || a.alg_->rank() != b.alg_->rank()))
            throw mismatch_error("elements of different coefficient rings");
    }

    algebra_ptr<C> alg_;
    std::vector<C> c_;
};

template <class C> std::ostream &operator<<(std::ostream &os, const element<C> &e) { return os << e.to_string(); }

template <class C> element<C> one(const algebra_ptr<C> &alg) { return element<C>::basis(alg, 0, rational(1)); }

// Multiplicative inverse of an element with a unit leading part.
template <class C> element<C> invert_unit(const element<C> &x)
{
    C uinv = unit_inverse(x[0]);
    element<C> y = x * uinv;
    element<C> r = y - one(x.alg());
    element<C> sum = one(x.alg()), term = one(x.alg());
    for (int k = 0; k < neumann_limit; ++k) {
        term = -(term * r);
        if (term.is_zero())
            return sum * uinv;
        sum += term;
    }
    throw computation_error("invert_unit: non-unit leading part (expansion does not terminate)");
}

// exp(a * divisor_inverse): the scalar part free of small variables must vanish.
template <class C> element<C> exp_divided(const element<C> &a, const C &divisor_inverse)
{
    element<C> y = a * divisor_inverse;
    if (!y[0].leading().is_zero())
        throw computation_error("exp_divided: argument has a unit constant term (divergent exponential)");
    element<C> sum = one(a.alg()), term = one(a.alg());
    for (int k = 1; k < neumann_limit; ++k) {
        term = (term * y).scaled(rational(1, k));
        if (term.is_zero())
            return sum;
        sum += term;
    }
    throw computation_error("exp_divided: expansion does not terminate");
}

inline element<series> exp_divided_z(const element<series> &a)
{
    return exp_divided(a, series::loop(a.alg()->lay(), -1));
}

inline element<qrational> exp_divided_one_minus_q(const element<qrational> &a)
{
    return exp_divided(a, qrational::inverse_poly(a.alg()->lay(), upoly{1, -1}));
}

// Nonnegative-z part of every coordinate.
inline element<series> h_plus_project(const element<series> &v)
{
    return v.map([](const series &s) { return s.z_nonneg(); });
}

inline std::pair<element<qrational>, element<qrational>> k_split(const element<qrational> &v)
{
    element<qrational> a(v.alg()), b(v.alg());
    for (std::size_t i = 0; i < v.rank(); ++i) {
        auto [l, r] = v[i].k_split();
        a[i] = l;
        b[i] = r;
    }
    return {a, b};
}

// ---- matrices -------------------------------------------------------------

// Square matrix over C; row-major.
template <class C> class matrix
{
public:
    matrix() = default;
    matrix(std::size_t n, layout_ptr lay) : n_(n), lay_(std::move(lay)), a_(n * n, C(lay_)) {}

    static matrix identity(std::size_t n, layout_ptr lay)
    {
        matrix m(n, lay);
        for (std::size_t i = 0; i < n; ++i)
            m(i, i) = C::constant(lay, 1);
        return m;
    }

    std::size_t size() const { return n_; }
    const layout_ptr &lay() const { return lay_; }
    C &operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
    const C &operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

    bool is_zero() const
    {
        for (const auto &x : a_)
            if (!x.is_zero())
                return false;
        return true;
    }

    friend bool operator==(const matrix &a, const matrix &b) { return a.n_ == b.n_ && a.a_ == b.a_; }
    friend bool operator!=(const matrix &a, const matrix &b) { return !(a == b); }

    friend matrix operator+(const matrix &a, const matrix &b)
    {
        matrix r = a;
        for (std::size_t i = 0; i < r.a_.size(); ++i)
            r.a_[i] += b.a_[i];
        return r;
    }
    friend matrix operator-(const matrix &a, const matrix &b)
    {
        matrix r = a;
        for (std::size_t i = 0; i < r.a_.size(); ++i)
            r.a_[i] -= b.a_[i];
        return r;
    }
    matrix operator-() const
    {
        matrix r = *this;
        for (auto &x : r.a_)
            x = -x;
        return r;
    }
    friend matrix operator*(const matrix &a, const matrix &b)
    {
        if (a.n_ != b.n_)
            throw mismatch_error("matrix size mismatch");
        matrix r(a.n_, a.lay_);
        for (std::size_t i = 0; i < a.n_; ++i)
            for (std::size_t k = 0; k < a.n_; ++k) {
                const C &x = a(i, k);
                if (x.is_zero())
                    continue;
                for (std::size_t j = 0; j < a.n_; ++j)
                    if (!b(k, j).is_zero())
                        r(i, j) += x * b(k, j);
            }
        return r;
    }

    matrix scaled(const rational &s) const
    {
        return map([&](const C &x) { return x.scaled(s); });
    }

    template <class F> matrix map(F &&f) const
    {
        matrix r = *this;
        for (auto &x : r.a_)
            x = f(x);
        return r;
    }

    matrix transpose() const
    {
        matrix r(n_, lay_);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j)
                r(j, i) = (*this)(i, j);
        return r;
    }

    matrix leading() const
    {
        return map([](const C &x) { return x.leading(); });
    }

    std::string to_string() const
    {
        std::string out = "[";
        for (std::size_t i = 0; i < n_; ++i) {
            out += i ? ", [" : "[";
            for (std::size_t j = 0; j < n_; ++j)
                out += (j ? ", " : "") + (*this)(i, j).to_string();
            out += "]";
        }
        return out + "]";
    }

private:
    std::size_t n_ = 0;
    layout_ptr lay_;
    std::vector<C> a_;
};

template <class C> std::ostream &operator<<(std::ostream &os, const matrix<C> &m) { return os << m.to_string(); }

template <class C> C determinant(const matrix<C> &m)
{
    const std::size_t n = m.size();
    if (n == 0)
        return C::constant(m.lay(), 1);
    if (n == 1)
        return m(0, 0);
    C det(m.lay());
    for (std::size_t j = 0; j < n; ++j) {
        if (m(0, j).is_zero())
            continue;
        matrix<C> minor(n - 1, m.lay());
        for (std::size_t r = 1; r < n; ++r)
            for (std::size_t c = 0, cc = 0; c < n; ++c)
                if (c != j)
                    minor(r - 1, cc++) = m(r, c);
        C term = m(0, j) * determinant(minor);
        if (j % 2)
            det -= term;
        else
            det += term;
    }
    return det;
}

template <class C> matrix<C> adjugate(const matrix<C> &m)
{
    const std::size_t n = m.size();
    matrix<C> adj(n, m.lay());
    if (n == 1) {
        adj(0, 0) = C::constant(m.lay(), 1);
        return adj;
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            matrix<C> minor(n - 1, m.lay());
            for (std::size_t r = 0, rr = 0; r < n; ++r) {
                if (r == i)
                    continue;
                for (std::size_t c = 0, cc = 0; c < n; ++c)
                    if (c != j)
                        minor(rr, cc++) = m(r, c);
                ++rr;
            }
            C d = determinant(minor);
            adj(j, i) = (i + j) % 2 ? -d : d;
        }
    return adj;
}

// Inverse via the adjugate of the leading part and a Neumann series for the rest.
template <class C> matrix<C> inverse(const matrix<C> &m)
{
    matrix<C> lead = m.leading();
    C det = determinant(lead);
    if (det.is_zero())
        throw computation_error("matrix inverse: singular leading part");
    C dinv = inverse(det);
    matrix<C> linv = adjugate(lead).map([&](const C &x) { return x * dinv; });
    matrix<C> step = -(linv * (m - lead));
    matrix<C> sum = linv, term = linv;
    for (int k = 0; k < neumann_limit; ++k) {
        term = step * term;
        if (term.is_zero())
            return sum;
        sum = sum + term;
    }
    throw computation_error("matrix inverse: expansion does not terminate");
}

} // namespace gwr
