#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

#include "gwrecon/error.hpp"

namespace gwr
{

using integer = mpz_class;
using rational = mpq_class;

// Canonical text form: "n/d" in lowest terms, d > 0, always with the slash.
inline std::string to_string(rational x)
{
    x.canonicalize();
    return x.get_num().get_str() + "/" + x.get_den().get_str();
}

inline rational parse_rational(std::string_view text)
{
    std::string s(text);
    while (!s.empty() && s.front() == ' ')
        s.erase(s.begin());
    while (!s.empty() && s.back() == ' ')
        s.pop_back();
    if (s.empty())
        throw validation_error("empty rational literal");
    auto slash = s.find('/');
    auto valid_int = [](const std::string &t) {
        if (t.empty())
            return false;
        std::size_t i = (t[0] == '-' || t[0] == '+') ? 1 : 0;
        if (i == t.size())
            return false;
        for (; i < t.size(); ++i)
            if (t[i] < '0' || t[i] > '9')
                return false;
        return true;
    };
    std::string num = s.substr(0, slash);
    std::string den = slash == std::string::npos ? "1" : s.substr(slash + 1);
    if (!num.empty() && num[0] == '+')
        num.erase(num.begin());
    if (!valid_int(num) || !valid_int(den))
        throw validation_error("malformed rational literal '" + s + "'");
    integer d(den);
    if (d == 0)
        throw validation_error("zero denominator in '" + s + "'");
    rational r(integer(num), d);
    r.canonicalize();
    return r;
}

inline rational factorial(unsigned k)
{
    integer f;
    mpz_fac_ui(f.get_mpz_t(), k);
    return rational(f);
}

inline integer binomial(long n, long k)
{
    if (k < 0 || n < 0 || k > n)
        return 0;
    integer b;
    mpz_bin_uiui(b.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
    return b;
}

} // namespace gwr
