#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstring>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gwrecon/error.hpp"

namespace gwr
{

inline constexpr std::size_t max_vars = 16;

// Exponent vector of one monomial. Slot 0 is always the loop variable (z or q).
using key = std::array<std::int8_t, max_vars>;

struct key_hash {
    std::size_t operator()(const key &k) const noexcept
    {
        std::uint64_t a, b;
        std::memcpy(&a, k.data(), 8);
        std::memcpy(&b, k.data() + 8, 8);
        std::uint64_t h = a * 0x9E3779B97F4A7C15ull ^ (b + 0x632BE59BD9B4E019ull + (a << 6) + (a >> 2));
        h ^= h >> 29;
        h *= 0xBF58476D1CE4E5B9ull;
        h ^= h >> 32;
        return static_cast<std::size_t>(h);
    }
};

enum class var_kind { loop, novikov, lambda, deformation };

enum class lambda_mode { power_series, laurent };

// The order ledger. Every series built over a layout is reduced to it.
struct truncation {
    int q_degree_cap = 0;   // D: max weighted Novikov degree
    int def_degree_cap = 0; // T: max total degree in deformation variables
    int z_neg = 60;         // M: exponents below -M are an error (exact zero by contract)
    int z_pos = 60;         // N: exponents above N are discarded
    int lambda_order = 0;   // max total power of equivariant parameters (power-series mode)
    bool loop_exact = false; // exponents above N are an error instead of being discarded

    bool operator==(const truncation &) const = default;
};

struct variable {
    std::string name;
    var_kind kind = var_kind::deformation;
    int cap = -1;   // per-variable cap for deformation variables, -1 = none
    int weight = 1; // Novikov weight
    bool operator==(const variable &) const = default;
};

class layout
{
public:
    layout(std::vector<variable> vars, truncation trunc, lambda_mode mode = lambda_mode::power_series)
        : vars_(std::move(vars)), trunc_(trunc), mode_(mode)
    {
        if (vars_.empty() || vars_[0].kind != var_kind::loop)
            throw validation_error("layout: slot 0 must be the loop variable");
        if (vars_.size() > max_vars)
            throw validation_error("layout: at most 16 variables are supported");
        if (trunc_.q_degree_cap < 0 || trunc_.def_degree_cap < 0 || trunc_.z_neg < 0 || trunc_.z_pos < 0
            || trunc_.lambda_order < 0)
            throw validation_error("layout: all truncation caps must be non-negative");
        if (trunc_.z_neg > 120 || trunc_.z_pos > 120)
            throw validation_error("layout: z window must lie within [-120, 120]");
        for (std::size_t i = 1; i < vars_.size(); ++i) {
            if (vars_[i].kind == var_kind::loop)
                throw validation_error("layout: only one loop variable allowed");
            for (std::size_t j = 0; j < i; ++j)
                if (vars_[j].name == vars_[i].name)
                    throw validation_error("layout: duplicate variable '" + vars_[i].name + "'");
        }
    }

    std::size_t size() const { return vars_.size(); }
    const variable &var(std::size_t i) const { return vars_[i]; }
    const std::vector<variable> &vars() const { return vars_; }
    const truncation &trunc() const { return trunc_; }
    lambda_mode mode() const { return mode_; }
    const std::string &loop_name() const { return vars_[0].name; }

    std::optional<std::size_t> find(std::string_view name) const
    {
        for (std::size_t i = 0; i < vars_.size(); ++i)
            if (vars_[i].name == name)
                return i;
        return std::nullopt;
    }

    std::size_t index(std::string_view name) const
    {
        auto i = find(name);
        if (!i)
            throw validation_error("layout: unknown variable '" + std::string(name) + "'");
        return *i;
    }

    std::vector<std::size_t> indices_of(var_kind k) const
    {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < vars_.size(); ++i)
            if (vars_[i].kind == k)
                out.push_back(i);
        return out;
    }

    int q_degree(const key &k) const
    {
        int s = 0;
        for (std::size_t i = 1; i < vars_.size(); ++i)
            if (vars_[i].kind == var_kind::novikov)
                s += vars_[i].weight * k[i];
        return s;
    }

    int def_degree(const key &k) const
    {
        int s = 0;
        for (std::size_t i = 1; i < vars_.size(); ++i)
            if (vars_[i].kind == var_kind::deformation)
                s += k[i];
        return s;
    }

    int lambda_degree(const key &k) const
    {
        int s = 0;
        for (std::size_t i = 1; i < vars_.size(); ++i)
            if (vars_[i].kind == var_kind::lambda)
                s += k[i];
        return s;
    }

    // True if the monomial lies in the maximal ideal used by every filtration argument.
    bool is_small(const key &k) const
    {
        for (std::size_t i = 1; i < vars_.size(); ++i) {
            if (k[i] == 0)
                continue;
            if (vars_[i].kind != var_kind::lambda || mode_ == lambda_mode::power_series)
                return true;
        }
        return false;
    }

    // Decide whether a monomial survives truncation. Poles beyond the window throw,
    // but only for monomials that would otherwise be retained.
    // In Laurent-lambda mode lambda_order bounds the pole order in each lambda.
    bool keep(const key &k) const
    {
        int qd = 0, dd = 0, ld = 0;
        for (std::size_t i = 1; i < vars_.size(); ++i) {
            const int e = k[i];
            switch (vars_[i].kind) {
                case var_kind::novikov:
                    if (e < 0)
                        return false;
                    qd += vars_[i].weight * e;
                    break;
                case var_kind::deformation:
                    if (e < 0 || (vars_[i].cap >= 0 && e > vars_[i].cap))
                        return false;
                    dd += e;
                    break;
                case var_kind::lambda:
                    if (mode_ == lambda_mode::power_series) {
                        if (e < 0)
                            return false;
                        ld += e;
                    } else if (-e > trunc_.lambda_order) {
                        return false;
                    }
                    break;
                case var_kind::loop:
                    break;
            }
        }
        if (qd > trunc_.q_degree_cap || dd > trunc_.def_degree_cap)
            return false;
        if (mode_ == lambda_mode::power_series && ld > trunc_.lambda_order)
            return false;
        if (k[0] > trunc_.z_pos) {
            if (trunc_.loop_exact)
                throw truncation_error("loop exponent " + std::to_string(k[0]) + " exceeds the retained window (N="
                                       + std::to_string(trunc_.z_pos) + ")");
            return false;
        }
        if (k[0] < -trunc_.z_neg)
            throw truncation_error("pole order z^" + std::to_string(k[0]) + " exceeds the retained window (M="
                                   + std::to_string(trunc_.z_neg) + ")");
        return true;
    }

    bool operator==(const layout &o) const
    {
        return vars_ == o.vars_ && trunc_ == o.trunc_ && mode_ == o.mode_;
    }

    // Same variables, possibly different caps.
    bool same_variables(const layout &o) const { return vars_ == o.vars_ && mode_ == o.mode_; }

private:
    std::vector<variable> vars_;
    truncation trunc_;
    lambda_mode mode_;
};

using layout_ptr = std::shared_ptr<const layout>;

inline void require_same(const layout_ptr &a, const layout_ptr &b)
{
    if (a == b)
        return;
    if (!a || !b)
        throw mismatch_error("operand without a layout");
    if (!a->same_variables(*b))
        throw mismatch_error("operands live over different variable sets");
    if (!(a->trunc() == b->trunc()))
        throw mismatch_error("operands live over different truncation ledgers");
}

// Convenience builder.
class layout_builder
{
public:
    explicit layout_builder(std::string loop = "z") { vars_.push_back({std::move(loop), var_kind::loop, -1, 1}); }

    layout_builder &novikov(std::string name, int weight = 1)
    {
        vars_.push_back({std::move(name), var_kind::novikov, -1, weight});
        return *this;
    }
    layout_builder &lambda(std::string name)
    {
        vars_.push_back({std::move(name), var_kind::lambda, -1, 1});
        return *this;
    }
    layout_builder &deformation(std::string name, int cap = -1)
    {
        vars_.push_back({std::move(name), var_kind::deformation, cap, 1});
        return *this;
    }
    layout_builder &caps(int q_degree, int def_degree)
    {
        trunc_.q_degree_cap = q_degree;
        trunc_.def_degree_cap = def_degree;
        return *this;
    }
    layout_builder &z_window(int m, int n)
    {
        trunc_.z_neg = m;
        trunc_.z_pos = n;
        return *this;
    }
    layout_builder &lambda_order(int l)
    {
        trunc_.lambda_order = l;
        return *this;
    }
    layout_builder &exact_loop()
    {
        trunc_.loop_exact = true;
        return *this;
    }
    layout_builder &laurent_lambda()
    {
        mode_ = lambda_mode::laurent;
        return *this;
    }
    layout_builder &with(const truncation &t)
    {
        trunc_ = t;
        return *this;
    }

    layout_ptr build() const { return std::make_shared<const layout>(vars_, trunc_, mode_); }

private:
    std::vector<variable> vars_;
    truncation trunc_;
    lambda_mode mode_ = lambda_mode::power_series;
};

} // namespace gwr
