#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gwrecon/layout.hpp"
#include "gwrecon/rational.hpp"

namespace gwr
{

namespace detail
{

// Open-addressing accumulator used by multiplication and bulk additions.
class accumulator
{
public:
    explicit accumulator(std::size_t expected = 16)
    {
        std::size_t cap = 16;
        while (cap < expected * 2)
            cap <<= 1;
        reset(cap);
    }

    integer &at(const key &k)
    {
        if ((count_ + 1) * 2 > keys_.size())
            grow();
        std::size_t i = key_hash{}(k) & mask_;
        while (used_[i]) {
            if (keys_[i] == k)
                return vals_[i];
            i = (i + 1) & mask_;
        }
        used_[i] = 1;
        keys_[i] = k;
        ++count_;
        return vals_[i];
    }

    template <class F> void drain(F &&f)
    {
        for (std::size_t i = 0; i < keys_.size(); ++i)
            if (used_[i] && sgn(vals_[i]) != 0)
                f(keys_[i], vals_[i]);
    }

private:
    void reset(std::size_t cap)
    {
        keys_.assign(cap, key{});
        vals_.clear();
        vals_.resize(cap);
        used_.assign(cap, 0);
        mask_ = cap - 1;
        count_ = 0;
    }

    void grow()
    {
        auto keys = std::move(keys_);
        auto vals = std::move(vals_);
        auto used = std::move(used_);
        reset(keys.size() * 2);
        for (std::size_t i = 0; i < keys.size(); ++i)
            if (used[i])
                std::swap(at(keys[i]), vals[i]);
    }

    std::vector<key> keys_;
    std::vector<integer> vals_;
    std::vector<char> used_;
    std::size_t mask_ = 0;
    std::size_t count_ = 0;
};

inline bool add_keys(const key &a, const key &b, std::size_t n, key &out)
{
    for (std::size_t i = 0; i < n; ++i) {
        int s = int(a[i]) + int(b[i]);
        if (s > 127 || s < -127)
            return false;
        out[i] = static_cast<std::int8_t>(s);
    }
    for (std::size_t i = n; i < max_vars; ++i)
        out[i] = 0;
    return true;
}

} // namespace detail

// Truncated multivariate Laurent series with rational coefficients, stored as
// integer numerators over one common denominator.
class series
{
public:
    struct term {
        key k;
        integer c;
    };

    series() = default;
    explicit series(layout_ptr lay) : lay_(std::move(lay)) {}

    static series constant(layout_ptr lay, const rational &c)
    {
        return monomial(std::move(lay), key{}, c);
    }

    static series monomial(layout_ptr lay, const key &k, const rational &c)
    {
        series s(std::move(lay));
        if (sgn(c) != 0 && s.lay_->keep(k)) {
            s.terms_.push_back({k, c.get_num()});
            s.den_ = c.get_den();
        }
        return s;
    }

    static series var(layout_ptr lay, std::size_t idx, int power = 1, const rational &c = 1)
    {
        key k{};
        k[idx] = static_cast<std::int8_t>(power);
        return monomial(std::move(lay), k, c);
    }

    static series var(layout_ptr lay, std::string_view name, int power = 1, const rational &c = 1)
    {
        auto idx = lay->index(name);
        return var(std::move(lay), idx, power, c);
    }

    // z^e for the loop variable.
    static series loop(layout_ptr lay, int e, const rational &c = 1) { return var(std::move(lay), 0, e, c); }

    const layout_ptr &lay() const { return lay_; }
    const std::vector<term> &terms() const { return terms_; }
    const integer &den() const { return den_; }
    bool is_zero() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }

    rational coeff_of(const term &t) const
    {
        rational r(t.c, den_);
        r.canonicalize();
        return r;
    }

    rational coeff(const key &k) const
    {
        auto it = std::lower_bound(terms_.begin(), terms_.end(), k,
                                   [](const term &t, const key &x) { return t.k < x; });
        if (it == terms_.end() || it->k != k)
            return 0;
        return coeff_of(*it);
    }

    template <class F> void for_each(F &&f) const
    {
        for (const auto &t : terms_)
            f(t.k, coeff_of(t));
    }

    // Build from arbitrary (key, rational) pairs; keys outside the ledger are dropped.
    static series from_terms(layout_ptr lay, const std::vector<std::pair<key, rational>> &src)
    {
        integer den = 1;
        for (const auto &[k, c] : src)
            mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), c.get_den_mpz_t());
        detail::accumulator acc(src.size());
        for (const auto &[k, c] : src) {
            if (sgn(c) == 0 || !lay->keep(k))
                continue;
            acc.at(k) += c.get_num() * (den / c.get_den());
        }
        series s(std::move(lay));
        s.den_ = den;
        s.absorb(acc);
        return s;
    }

    series operator-() const
    {
        series r = *this;
        for (auto &t : r.terms_)
            t.c = -t.c;
        return r;
    }

    series &operator+=(const series &o) { return *this = combine(*this, o, 1); }
    series &operator-=(const series &o) { return *this = combine(*this, o, -1); }
    series &operator*=(const series &o) { return *this = *this * o; }

    friend series operator+(const series &a, const series &b) { return combine(a, b, 1); }
    friend series operator-(const series &a, const series &b) { return combine(a, b, -1); }

    friend series operator*(const series &a, const series &b)
    {
        auto lay = pick_layout(a, b);
        series r(lay);
        if (a.is_zero() || b.is_zero())
            return r;
        const layout &L = *lay;
        const std::size_t n = L.size();
        const bool ps = L.mode() == lambda_mode::power_series;
        const auto &tr = L.trunc();
        auto degs = [&](const series &s) {
            std::vector<std::array<int, 3>> d(s.terms_.size());
            for (std::size_t i = 0; i < s.terms_.size(); ++i)
                d[i] = {L.q_degree(s.terms_[i].k), L.def_degree(s.terms_[i].k),
                        ps ? L.lambda_degree(s.terms_[i].k) : 0};
            return d;
        };
        auto da = degs(a), db = degs(b);
        // order b by Novikov degree so the inner loop can stop early
        std::vector<std::size_t> ord(b.terms_.size());
        for (std::size_t i = 0; i < ord.size(); ++i)
            ord[i] = i;
        std::stable_sort(ord.begin(), ord.end(), [&](std::size_t x, std::size_t y) { return db[x][0] < db[y][0]; });
        detail::accumulator acc(std::max(a.size(), b.size()) * 2);
        key k;
        for (std::size_t i = 0; i < a.terms_.size(); ++i) {
            const auto &ta = a.terms_[i];
            for (std::size_t jj = 0; jj < ord.size(); ++jj) {
                const std::size_t j = ord[jj];
                if (da[i][0] + db[j][0] > tr.q_degree_cap)
                    break;
                if (da[i][1] + db[j][1] > tr.def_degree_cap)
                    continue;
                if (ps && da[i][2] + db[j][2] > tr.lambda_order)
                    continue;
                const auto &tb = b.terms_[j];
                if (!detail::add_keys(ta.k, tb.k, n, k)) {
                    if (int(ta.k[0]) + int(tb.k[0]) < -127)
                        throw truncation_error("z exponent overflow in product");
                    continue;
                }
                if (!L.keep(k))
                    continue;
                mpz_addmul(acc.at(k).get_mpz_t(), ta.c.get_mpz_t(), tb.c.get_mpz_t());
            }
        }
        r.den_ = a.den_ * b.den_;
        r.absorb(acc);
        return r;
    }

    friend series operator*(const series &a, const rational &c) { return a.scaled(c); }
    friend series operator*(const rational &c, const series &a) { return a.scaled(c); }

    series scaled(const rational &c) const
    {
        series r(lay_);
        if (sgn(c) == 0 || is_zero())
            return r;
        r.terms_ = terms_;
        for (auto &t : r.terms_)
            t.c *= c.get_num();
        r.den_ = den_ * c.get_den();
        r.normalize();
        return r;
    }

    friend bool operator==(const series &a, const series &b)
    {
        if (a.is_zero() || b.is_zero())
            return a.is_zero() && b.is_zero();
        if (a.lay_ != b.lay_ && !(*a.lay_ == *b.lay_))
            return false;
        if (a.den_ != b.den_ || a.terms_.size() != b.terms_.size())
            return false;
        for (std::size_t i = 0; i < a.terms_.size(); ++i)
            if (a.terms_[i].k != b.terms_[i].k || a.terms_[i].c != b.terms_[i].c)
                return false;
        return true;
    }
    friend bool operator!=(const series &a, const series &b) { return !(a == b); }

    // Keep only the terms satisfying pred(key).
    template <class P> series filter(P &&pred) const
    {
        series r(lay_);
        r.den_ = den_;
        for (const auto &t : terms_)
            if (pred(t.k))
                r.terms_.push_back(t);
        r.normalize();
        return r;
    }

    // Termwise map of keys; f returns false to drop a term.
    template <class F> series remap(layout_ptr target, F &&f) const
    {
        detail::accumulator acc(terms_.size());
        key k2;
        for (const auto &t : terms_) {
            k2 = t.k;
            integer c = t.c;
            if (!f(k2, c))
                continue;
            if (!target->keep(k2))
                continue;
            acc.at(k2) += c;
        }
        series r(std::move(target));
        r.den_ = den_;
        r.absorb(acc);
        return r;
    }

    // z >= 0 part and z < 0 part.
    series z_nonneg() const { return filter([](const key &k) { return k[0] >= 0; }); }
    series z_neg() const { return filter([](const key &k) { return k[0] < 0; }); }

    // Coefficient of z^e, returned with loop exponent 0.
    series z_coeff(int e) const
    {
        series r(lay_);
        r.den_ = den_;
        for (const auto &t : terms_)
            if (t.k[0] == e) {
                r.terms_.push_back(t);
                r.terms_.back().k[0] = 0;
            }
        std::sort(r.terms_.begin(), r.terms_.end(), [](const term &x, const term &y) { return x.k < y.k; });
        r.normalize();
        return r;
    }

    // Multiply by z^e.
    series z_shift(int e) const
    {
        return remap(lay_, [e](key &k, integer &) {
            int s = int(k[0]) + e;
            if (s > 127 || s < -127)
                throw truncation_error("z exponent overflow in shift");
            k[0] = static_cast<std::int8_t>(s);
            return true;
        });
    }

    // z -> -z.
    series z_flip() const
    {
        series r = *this;
        for (auto &t : r.terms_)
            if (t.k[0] & 1)
                t.c = -t.c;
        return r;
    }

    int z_min() const
    {
        int m = 127;
        for (const auto &t : terms_)
            m = std::min<int>(m, t.k[0]);
        return m;
    }
    int z_max() const
    {
        int m = -127;
        for (const auto &t : terms_)
            m = std::max<int>(m, t.k[0]);
        return m;
    }

    // Terms with no small variable (Novikov, deformation, power-series lambda).
    series leading() const
    {
        return filter([this](const key &k) { return !lay_->is_small(k); });
    }

    series truncate_def(int cap) const
    {
        return filter([this, cap](const key &k) { return lay_->def_degree(k) <= cap; });
    }
    series truncate_q(int cap) const
    {
        return filter([this, cap](const key &k) { return lay_->q_degree(k) <= cap; });
    }

    // Partial derivative in variable idx.
    series derivative(std::size_t idx) const
    {
        return remap(lay_, [idx](key &k, integer &c) {
            if (k[idx] == 0)
                return false;
            c *= k[idx];
            k[idx] = static_cast<std::int8_t>(k[idx] - 1);
            return true;
        });
    }
    series derivative(std::string_view name) const { return derivative(lay_->index(name)); }

    // x d/dx in variable idx.
    series euler(std::size_t idx) const
    {
        return remap(lay_, [idx](key &k, integer &c) {
            if (k[idx] == 0)
                return false;
            c *= k[idx];
            return true;
        });
    }

    // Coefficient of var^e (the variable is removed from the keys).
    series var_coeff(std::size_t idx, int e) const
    {
        series r(lay_);
        r.den_ = den_;
        for (const auto &t : terms_)
            if (t.k[idx] == e) {
                r.terms_.push_back(t);
                r.terms_.back().k[idx] = 0;
            }
        std::sort(r.terms_.begin(), r.terms_.end(), [](const term &x, const term &y) { return x.k < y.k; });
        r.normalize();
        return r;
    }

    // Replace variable idx by the given series. Negative powers need an invertible value.
    series substitute(std::size_t idx, const series &value) const
    {
        std::map<int, series> groups;
        for (const auto &t : terms_) {
            auto &g = groups[t.k[idx]];
            if (!g.lay_) {
                g = series(lay_);
                g.den_ = den_;
            }
            g.terms_.push_back(t);
            g.terms_.back().k[idx] = 0;
        }
        series r(lay_);
        series pw = constant(lay_, 1);
        int at = 0;
        for (auto &[e, g] : groups) {
            if (e < 0)
                throw computation_error("substitute: negative power of substituted variable");
            std::sort(g.terms_.begin(), g.terms_.end(), [](const term &x, const term &y) { return x.k < y.k; });
            g.normalize();
            while (at < e) {
                pw = pw * value;
                ++at;
            }
            r += g * pw;
        }
        return r;
    }

    series evaluate(std::size_t idx, const rational &v) const { return substitute(idx, constant(lay_, v)); }

    // Re-express over another layout, matching variables by name. Variables absent
    // from the target must not occur.
    series convert(const layout_ptr &target) const
    {
        if (target == lay_)
            return *this;
        if (is_zero())
            return series(target);
        std::vector<int> map(lay_->size(), -1);
        for (std::size_t i = 0; i < lay_->size(); ++i) {
            auto j = target->find(lay_->var(i).name);
            if (i == 0)
                j = 0;
            if (j)
                map[i] = static_cast<int>(*j);
        }
        const std::size_t n = lay_->size();
        return remap(target, [&](key &k, integer &) {
            key out{};
            for (std::size_t i = 0; i < n; ++i) {
                if (k[i] == 0)
                    continue;
                if (map[i] < 0)
                    throw mismatch_error("convert: variable '" + lay_->var(i).name + "' missing in target layout");
                out[map[i]] = k[i];
            }
            k = out;
            return true;
        });
    }

    // Constant (all-zero key) coefficient.
    rational constant_term() const { return coeff(key{}); }

    bool is_constant() const { return terms_.empty() || (terms_.size() == 1 && terms_[0].k == key{}); }

    std::string to_string() const
    {
        if (is_zero())
            return "0";
        std::ostringstream os;
        bool first = true;
        for (const auto &t : terms_) {
            rational c = coeff_of(t);
            std::string m = monomial_string(t.k);
            if (!first)
                os << (sgn(c) < 0 ? " - " : " + ");
            else if (sgn(c) < 0)
                os << "-";
            first = false;
            rational a = abs(c);
            if (m.empty())
                os << gwr::to_string(a);
            else if (a == 1)
                os << m;
            else
                os << gwr::to_string(a) << "*" << m;
        }
        return os.str();
    }

    std::string monomial_string(const key &k) const
    {
        std::string out;
        for (std::size_t i = 0; i < lay_->size(); ++i) {
            if (k[i] == 0)
                continue;
            if (!out.empty())
                out += "*";
            out += lay_->var(i).name;
            if (k[i] != 1)
                out += "^" + std::to_string(int(k[i]));
        }
        return out;
    }

private:
    static layout_ptr pick_layout(const series &a, const series &b)
    {
        if (!a.lay_ && !b.lay_)
            throw mismatch_error("series without a layout");
        if (!a.lay_)
            return b.lay_;
        if (!b.lay_)
            return a.lay_;
        require_same(a.lay_, b.lay_);
        return a.lay_;
    }

    static series combine(const series &a, const series &b, int sign)
    {
        auto lay = pick_layout(a, b);
        if (b.is_zero()) {
            series r = a;
            r.lay_ = lay;
            return r;
        }
        if (a.is_zero()) {
            series r = sign > 0 ? b : -b;
            r.lay_ = lay;
            return r;
        }
        integer l;
        mpz_lcm(l.get_mpz_t(), a.den_.get_mpz_t(), b.den_.get_mpz_t());
        const integer fa = l / a.den_, fb = l / b.den_;
        series r(lay);
        r.den_ = l;
        r.terms_.reserve(a.terms_.size() + b.terms_.size());
        std::size_t i = 0, j = 0;
        while (i < a.terms_.size() || j < b.terms_.size()) {
            if (j == b.terms_.size() || (i < a.terms_.size() && a.terms_[i].k < b.terms_[j].k)) {
                r.terms_.push_back({a.terms_[i].k, a.terms_[i].c * fa});
                ++i;
            } else if (i == a.terms_.size() || b.terms_[j].k < a.terms_[i].k) {
                r.terms_.push_back({b.terms_[j].k, sign > 0 ? integer(b.terms_[j].c * fb) : integer(-b.terms_[j].c * fb)});
                ++j;
            } else {
                integer c = a.terms_[i].c * fa;
                if (sign > 0)
                    mpz_addmul(c.get_mpz_t(), b.terms_[j].c.get_mpz_t(), fb.get_mpz_t());
                else
                    mpz_submul(c.get_mpz_t(), b.terms_[j].c.get_mpz_t(), fb.get_mpz_t());
                if (sgn(c) != 0)
                    r.terms_.push_back({a.terms_[i].k, std::move(c)});
                ++i;
                ++j;
            }
        }
        r.normalize();
        return r;
    }

    void absorb(detail::accumulator &acc)
    {
        terms_.clear();
        acc.drain([this](const key &k, integer &c) {
            terms_.push_back({k, integer()});
            std::swap(terms_.back().c, c);
        });
        std::sort(terms_.begin(), terms_.end(), [](const term &x, const term &y) { return x.k < y.k; });
        normalize();
    }

    // Remove zero terms and bring numerators and denominator to lowest terms.
    void normalize()
    {
        terms_.erase(std::remove_if(terms_.begin(), terms_.end(), [](const term &t) { return sgn(t.c) == 0; }),
                     terms_.end());
        if (terms_.empty()) {
            den_ = 1;
            return;
        }
        if (sgn(den_) < 0) {
            den_ = -den_;
            for (auto &t : terms_)
                t.c = -t.c;
        }
        if (den_ == 1)
            return;
        integer g = den_;
        for (const auto &t : terms_) {
            mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), t.c.get_mpz_t());
            if (g == 1)
                return;
        }
        den_ /= g;
        for (auto &t : terms_)
            mpz_divexact(t.c.get_mpz_t(), t.c.get_mpz_t(), g.get_mpz_t());
    }

    layout_ptr lay_;
    std::vector<term> terms_;
    integer den_ = 1;
};

inline std::ostream &operator<<(std::ostream &os, const series &s) { return os << s.to_string(); }

inline series pow(const series &x, unsigned k)
{
    series r = series::constant(x.lay(), 1);
    series b = x;
    while (k) {
        if (k & 1)
            r = r * b;
        k >>= 1;
        if (k)
            b = b * b;
    }
    return r;
}

} // namespace gwr
