#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gwrecon/series.hpp"

namespace gwr
{

// Dense univariate polynomial over Q; coefficient i belongs to q^i.
class upoly
{
public:
    upoly() = default;
    upoly(std::initializer_list<rational> c) : c_(c) { trim(); }
    explicit upoly(std::vector<rational> c) : c_(std::move(c)) { trim(); }

    static upoly monomial(std::size_t deg, const rational &c = 1)
    {
        std::vector<rational> v(deg + 1, 0);
        v[deg] = c;
        return upoly(std::move(v));
    }

    int degree() const { return c_.empty() ? -1 : static_cast<int>(c_.size()) - 1; }
    bool is_zero() const { return c_.empty(); }
    const std::vector<rational> &coeffs() const { return c_; }
    rational operator[](std::size_t i) const { return i < c_.size() ? c_[i] : rational(0); }
    rational lead() const { return c_.empty() ? rational(0) : c_.back(); }

    friend upoly operator+(const upoly &a, const upoly &b)
    {
        std::vector<rational> r(std::max(a.c_.size(), b.c_.size()), 0);
        for (std::size_t i = 0; i < a.c_.size(); ++i)
            r[i] += a.c_[i];
        for (std::size_t i = 0; i < b.c_.size(); ++i)
            r[i] += b.c_[i];
        return upoly(std::move(r));
    }
    friend upoly operator-(const upoly &a, const upoly &b) { return a + b.scaled(-1); }
    friend upoly operator*(const upoly &a, const upoly &b)
    {
        if (a.is_zero() || b.is_zero())
            return {};
        std::vector<rational> r(a.c_.size() + b.c_.size() - 1, 0);
        for (std::size_t i = 0; i < a.c_.size(); ++i)
            for (std::size_t j = 0; j < b.c_.size(); ++j)
                r[i + j] += a.c_[i] * b.c_[j];
        return upoly(std::move(r));
    }
    friend bool operator==(const upoly &a, const upoly &b) { return a.c_ == b.c_; }

    upoly scaled(const rational &s) const
    {
        auto r = c_;
        for (auto &x : r)
            x *= s;
        return upoly(std::move(r));
    }

    // a = quotient * b + remainder
    static std::pair<upoly, upoly> divmod(const upoly &a, const upoly &b)
    {
        if (b.is_zero())
            throw computation_error("polynomial division by zero");
        std::vector<rational> rem = a.c_;
        const int db = b.degree();
        if (a.degree() < db)
            return {upoly{}, a};
        std::vector<rational> quo(static_cast<std::size_t>(a.degree() - db + 1), 0);
        const rational inv = 1 / b.lead();
        for (int k = a.degree() - db; k >= 0; --k) {
            rational f = rem[static_cast<std::size_t>(k + db)] * inv;
            quo[static_cast<std::size_t>(k)] = f;
            if (sgn(f) == 0)
                continue;
            for (int j = 0; j <= db; ++j)
                rem[static_cast<std::size_t>(k + j)] -= f * b.c_[static_cast<std::size_t>(j)];
        }
        rem.resize(static_cast<std::size_t>(db));
        return {upoly(std::move(quo)), upoly(std::move(rem))};
    }

    // Monic gcd (zero if both are zero).
    static upoly gcd(upoly a, upoly b)
    {
        while (!b.is_zero()) {
            auto r = divmod(a, b).second;
            a = std::move(b);
            b = std::move(r);
        }
        if (a.is_zero())
            return a;
        return a.scaled(1 / a.lead());
    }

    rational eval(const rational &x) const
    {
        rational r = 0;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it)
            r = r * x + *it;
        return r;
    }

    std::string to_string(const std::string &var = "q") const
    {
        if (c_.empty())
            return "0";
        std::string out;
        for (std::size_t i = 0; i < c_.size(); ++i) {
            if (sgn(c_[i]) == 0)
                continue;
            if (!out.empty())
                out += " + ";
            out += gwr::to_string(c_[i]);
            if (i > 0)
                out += "*" + var + (i > 1 ? "^" + std::to_string(i) : "");
        }
        return out;
    }

private:
    void trim()
    {
        while (!c_.empty() && sgn(c_.back()) == 0)
            c_.pop_back();
    }
    std::vector<rational> c_;
};

// Rational function of the loop variable q with multivariate truncated coefficients:
// numerator is a series (Laurent polynomial in q), denominator a polynomial in q with
// constant term 1. Canonical after gcd reduction, so equality is representation equality.
class qrational
{
public:
    qrational() = default;
    explicit qrational(layout_ptr lay) : num_(std::move(lay)), den_{1} {}
    qrational(series num) : num_(std::move(num)), den_{1} {}
    qrational(series num, upoly den) : num_(std::move(num)), den_(std::move(den)) { canonicalize(); }

    static qrational constant(layout_ptr lay, const rational &c) { return qrational(series::constant(lay, c)); }

    // p(q) as a series over lay.
    static series poly_series(const layout_ptr &lay, const upoly &p, int shift = 0)
    {
        std::vector<std::pair<key, rational>> t;
        for (std::size_t i = 0; i < p.coeffs().size(); ++i)
            if (sgn(p.coeffs()[i]) != 0) {
                key k{};
                k[0] = static_cast<std::int8_t>(static_cast<int>(i) + shift);
                t.push_back({k, p.coeffs()[i]});
            }
        return series::from_terms(lay, t);
    }

    // 1 / p(q) for p(0) != 0.
    static qrational inverse_poly(const layout_ptr &lay, const upoly &p)
    {
        return qrational(series::constant(lay, 1), p);
    }

    const series &num() const { return num_; }
    const upoly &den() const { return den_; }
    const layout_ptr &lay() const { return num_.lay(); }
    bool is_zero() const { return num_.is_zero(); }

    friend qrational operator+(const qrational &a, const qrational &b) { return combine(a, b, 1); }
    friend qrational operator-(const qrational &a, const qrational &b) { return combine(a, b, -1); }
    qrational operator-() const
    {
        qrational r = *this;
        r.num_ = -r.num_;
        return r;
    }
    qrational &operator+=(const qrational &o) { return *this = *this + o; }
    qrational &operator-=(const qrational &o) { return *this = *this - o; }

    friend qrational operator*(const qrational &a, const qrational &b)
    {
        if (a.is_zero() || b.is_zero())
            return qrational(a.lay() ? a.lay() : b.lay());
        return qrational(a.num_ * b.num_, a.den_ * b.den_);
    }
    qrational &operator*=(const qrational &o) { return *this = *this * o; }

    qrational scaled(const rational &c) const
    {
        qrational r = *this;
        r.num_ = num_.scaled(c);
        if (r.num_.is_zero())
            r.den_ = upoly{1};
        return r;
    }

    friend bool operator==(const qrational &a, const qrational &b) { return a.den_ == b.den_ && a.num_ == b.num_; }
    friend bool operator!=(const qrational &a, const qrational &b) { return !(a == b); }

    // Part free of small variables (Novikov, deformation).
    qrational leading() const
    {
        qrational r = *this;
        r.num_ = num_.leading();
        r.canonicalize();
        return r;
    }

    template <class P> qrational filter(P &&pred) const
    {
        qrational r = *this;
        r.num_ = num_.filter(std::forward<P>(pred));
        r.canonicalize();
        return r;
    }

    qrational truncate_def(int cap) const
    {
        qrational r = *this;
        r.num_ = num_.truncate_def(cap);
        r.canonicalize();
        return r;
    }

    // Derivative in a non-loop variable (the denominator only involves q).
    qrational derivative(std::size_t idx) const
    {
        if (idx == 0)
            throw computation_error("qrational: q-derivative not supported");
        qrational r = *this;
        r.num_ = num_.derivative(idx);
        r.canonicalize();
        return r;
    }
    qrational euler(std::size_t idx) const
    {
        qrational r = *this;
        r.num_ = num_.euler(idx);
        r.canonicalize();
        return r;
    }

    qrational convert(const layout_ptr &target) const
    {
        qrational r = *this;
        r.num_ = num_.convert(target);
        r.canonicalize();
        return r;
    }

    // Value at a rational q where the denominator does not vanish; result has q-exponent 0.
    series evaluate_q(const rational &x) const
    {
        rational d = den_.eval(x);
        if (sgn(d) == 0)
            throw computation_error("qrational: evaluation at a pole");
        const int m = num_.is_zero() ? 0 : num_.z_min();
        if (m >= 0)
            return num_.evaluate(0, x).scaled(1 / d);
        if (sgn(x) == 0)
            throw computation_error("qrational: evaluation at a pole");
        rational xm = 1;
        for (int i = 0; i < -m; ++i)
            xm *= x;
        return num_.z_shift(-m).evaluate(0, x).scaled(1 / (d * xm));
    }

    bool is_laurent_polynomial() const { return den_.degree() <= 0; }

    // Unique split into a Laurent polynomial in q plus a reduced part (regular at
    // q = 0, vanishing at infinity).
    std::pair<qrational, qrational> k_split() const
    {
        if (is_zero() || den_.degree() == 0)
            return {*this, qrational(lay())};
        auto groups = group_by_rest(num_);
        std::vector<std::pair<key, rational>> lp_terms, red_terms;
        for (auto &[rest, g] : groups) {
            const int s = std::max(0, -g.first);
            // N' = q^{s + minexp} * poly
            upoly np = g.second * upoly::monomial(static_cast<std::size_t>(s + g.first));
            auto [a, b] = upoly::divmod(np, den_);
            // b / den = sum_{j<s} c_j q^j + q^s r / den
            std::vector<rational> taylor(static_cast<std::size_t>(s), 0);
            {
                // power series of b/den up to q^{s-1}; den(0) = 1
                for (int j = 0; j < s; ++j) {
                    rational acc = b[static_cast<std::size_t>(j)];
                    for (int i = 1; i <= j; ++i)
                        acc -= den_[static_cast<std::size_t>(i)] * taylor[static_cast<std::size_t>(j - i)];
                    taylor[static_cast<std::size_t>(j)] = acc;
                }
            }
            upoly tp(taylor);
            upoly rnum = b - den_ * tp;
            // rnum is divisible by q^s
            for (int j = 0; j < s; ++j)
                if (sgn(rnum[static_cast<std::size_t>(j)]) != 0)
                    throw computation_error("k_split: internal division defect");
            upoly laurent = a + tp;
            for (std::size_t i = 0; i < laurent.coeffs().size(); ++i)
                if (sgn(laurent.coeffs()[i]) != 0) {
                    key k = rest;
                    k[0] = static_cast<std::int8_t>(static_cast<int>(i) - s);
                    lp_terms.push_back({k, laurent.coeffs()[i]});
                }
            for (std::size_t i = static_cast<std::size_t>(s); i < rnum.coeffs().size(); ++i)
                if (sgn(rnum.coeffs()[i]) != 0) {
                    key k = rest;
                    k[0] = static_cast<std::int8_t>(static_cast<int>(i) - s);
                    red_terms.push_back({k, rnum.coeffs()[i]});
                }
        }
        qrational lpart(series::from_terms(lay(), lp_terms));
        qrational rpart(series::from_terms(lay(), red_terms), den_);
        return {lpart, rpart};
    }

    std::string to_string() const
    {
        if (den_.degree() <= 0)
            return num_.to_string();
        return "(" + num_.to_string() + ")/(" + den_.to_string() + ")";
    }

    // Group numerator terms by their non-loop exponents: rest key -> (min q exponent, poly).
    static std::map<key, std::pair<int, upoly>> group_by_rest(const series &s)
    {
        std::map<key, std::vector<std::pair<int, rational>>> raw;
        s.for_each([&](const key &k, const rational &c) {
            key rest = k;
            rest[0] = 0;
            raw[rest].push_back({k[0], c});
        });
        std::map<key, std::pair<int, upoly>> out;
        for (auto &[rest, v] : raw) {
            int mn = v.front().first;
            int mx = mn;
            for (auto &[e, c] : v) {
                mn = std::min(mn, e);
                mx = std::max(mx, e);
            }
            std::vector<rational> c(static_cast<std::size_t>(mx - mn + 1), 0);
            for (auto &[e, x] : v)
                c[static_cast<std::size_t>(e - mn)] = x;
            out[rest] = {mn, upoly(std::move(c))};
        }
        return out;
    }

private:
    static qrational combine(const qrational &a, const qrational &b, int sign)
    {
        if (b.is_zero())
            return a.lay() ? a : qrational(b.lay());
        if (a.is_zero())
            return sign > 0 ? b : -b;
        if (a.den_ == b.den_) {
            qrational r;
            r.num_ = sign > 0 ? a.num_ + b.num_ : a.num_ - b.num_;
            r.den_ = a.den_;
            r.canonicalize();
            return r;
        }
        upoly g = upoly::gcd(a.den_, b.den_);
        upoly fa = upoly::divmod(b.den_, g).first, fb = upoly::divmod(a.den_, g).first;
        series na = a.num_ * poly_series(a.lay(), fa), nb = b.num_ * poly_series(a.lay(), fb);
        return qrational(sign > 0 ? na + nb : na - nb, a.den_ * fa);
    }

    void canonicalize()
    {
        if (den_.is_zero())
            throw computation_error("qrational: zero denominator");
        if (num_.is_zero()) {
            den_ = upoly{1};
            return;
        }
        if (sgn(den_[0]) == 0)
            throw computation_error("qrational: denominator vanishes at q = 0");
        if (den_.degree() > 0) {
            auto groups = group_by_rest(num_);
            upoly g = den_;
            for (auto &[rest, p] : groups) {
                g = upoly::gcd(g, p.second);
                if (g.degree() == 0)
                    break;
            }
            if (g.degree() > 0) {
                // g(0) != 0 since den(0) != 0; divide every group exactly
                std::vector<std::pair<key, rational>> t;
                for (auto &[rest, p] : groups) {
                    auto [qq, rr] = upoly::divmod(p.second, g);
                    for (std::size_t i = 0; i < qq.coeffs().size(); ++i)
                        if (sgn(qq.coeffs()[i]) != 0) {
                            key k = rest;
                            k[0] = static_cast<std::int8_t>(static_cast<int>(i) + p.first);
                            t.push_back({k, qq.coeffs()[i]});
                        }
                }
                num_ = series::from_terms(num_.lay(), t);
                den_ = upoly::divmod(den_, g).first;
            }
        }
        rational c0 = den_[0];
        if (c0 != 1) {
            den_ = den_.scaled(1 / c0);
            num_ = num_.scaled(1 / c0);
        }
    }

    series num_;
    upoly den_{1};
};

inline std::ostream &operator<<(std::ostream &os, const qrational &s) { return os << s.to_string(); }

} // namespace gwr
