#include <gtest/gtest.h>

#include <random>

#include "gwrecon/series.hpp"

using namespace gwr;

namespace
{

layout_ptr small_layout(int qcap = 2, int tcap = 3)
{
    return layout_builder("z").novikov("Q").deformation("s").deformation("u").caps(qcap, tcap).z_window(20, 20).build();
}

series random_series(const layout_ptr &lay, std::mt19937 &rng, int nterms = 8)
{
    std::uniform_int_distribution<int> ze(-3, 3), qe(0, 2), de(0, 2), num(-9, 9), den(1, 5);
    std::vector<std::pair<key, rational>> t;
    for (int i = 0; i < nterms; ++i) {
        key k{};
        k[0] = static_cast<std::int8_t>(ze(rng));
        k[1] = static_cast<std::int8_t>(qe(rng));
        k[2] = static_cast<std::int8_t>(de(rng));
        k[3] = static_cast<std::int8_t>(de(rng));
        t.push_back({k, rational(num(rng), den(rng))});
    }
    return series::from_terms(lay, t);
}

} // namespace

TEST(Series, RationalTextForm)
{
    EXPECT_EQ(to_string(rational(6, -4)), "-3/2");
    EXPECT_EQ(to_string(rational(5)), "5/1");
    EXPECT_EQ(parse_rational(" -6/4 "), rational(-3, 2));
    EXPECT_EQ(parse_rational("7"), rational(7));
    EXPECT_THROW(parse_rational("1/0"), validation_error);
    EXPECT_THROW(parse_rational("x"), validation_error);
}

TEST(Series, AdditiveIdentityAndCancellation)
{
    auto lay = small_layout();
    std::mt19937 rng(1);
    auto x = random_series(lay, rng);
    EXPECT_EQ(x + series(lay), x);
    EXPECT_TRUE((x - x).is_zero());
}

TEST(Series, RingAxiomsOnRandomInputs)
{
    auto lay = small_layout();
    std::mt19937 rng(7);
    for (int rep = 0; rep < 30; ++rep) {
        auto a = random_series(lay, rng), b = random_series(lay, rng), c = random_series(lay, rng);
        EXPECT_EQ((a + b) * c, a * c + b * c);
        EXPECT_EQ(a * (b * c), (a * b) * c);
        EXPECT_EQ(a * b, b * a);
    }
}

TEST(Series, TruncationDropsHighOrders)
{
    auto lay = small_layout(1, 1);
    auto q = series::var(lay, "Q");
    auto s = series::var(lay, "s");
    EXPECT_TRUE((q * q).is_zero());
    EXPECT_TRUE((s * s).is_zero());
    EXPECT_EQ((q * s).size(), 1u);
}

TEST(Series, PoleBeyondWindowThrows)
{
    auto lay = layout_builder("z").caps(0, 0).z_window(2, 2).build();
    auto zi = series::loop(lay, -2);
    EXPECT_THROW(zi * zi, truncation_error);
    EXPECT_TRUE((series::loop(lay, 2) * series::loop(lay, 1)).is_zero());
}

TEST(Series, TruncationCoherence)
{
    auto big = small_layout(3, 4);
    auto lo = small_layout(2, 3);
    std::mt19937 rng(11);
    for (int rep = 0; rep < 10; ++rep) {
        auto a = random_series(big, rng), b = random_series(big, rng);
        EXPECT_EQ((a * b).convert(lo), a.convert(lo) * b.convert(lo));
    }
}

TEST(Series, ZProjectionsResum)
{
    auto lay = small_layout();
    std::mt19937 rng(3);
    for (int rep = 0; rep < 10; ++rep) {
        auto a = random_series(lay, rng);
        EXPECT_EQ(a.z_nonneg() + a.z_neg(), a);
        EXPECT_EQ(a.z_nonneg().z_nonneg(), a.z_nonneg());
    }
    // -z + 3 + 5/z -> -z + 3
    auto v = series::loop(lay, 1, -1) + series::constant(lay, 3) + series::loop(lay, -1, 5);
    EXPECT_EQ(v.z_nonneg(), series::loop(lay, 1, -1) + series::constant(lay, 3));
}

TEST(Series, DerivativeLeibniz)
{
    auto lay = small_layout();
    std::mt19937 rng(5);
    for (int rep = 0; rep < 10; ++rep) {
        auto a = random_series(lay, rng), b = random_series(lay, rng);
        // the product rule holds one deformation degree below the cap
        auto lhs = (a * b).derivative("s").truncate_def(2);
        auto rhs = (a.derivative("s") * b + a * b.derivative("s")).truncate_def(2);
        EXPECT_EQ(lhs, rhs);
        EXPECT_EQ((a * b).euler(1), a.euler(1) * b + a * b.euler(1));
    }
}

TEST(Series, SubstituteIsRingMap)
{
    auto lay = small_layout();
    std::mt19937 rng(9);
    // the value keeps the deformation degree, so truncation commutes with substitution
    auto val = series::var(lay, "Q") * series::var(lay, "u") * rational(2, 3) + series::var(lay, "u");
    for (int rep = 0; rep < 10; ++rep) {
        auto a = random_series(lay, rng), b = random_series(lay, rng);
        EXPECT_EQ((a * b).substitute(2, val), a.substitute(2, val) * b.substitute(2, val));
    }
}

TEST(Series, FlipIsInvolution)
{
    auto lay = small_layout();
    std::mt19937 rng(13);
    auto a = random_series(lay, rng), b = random_series(lay, rng);
    EXPECT_EQ(a.z_flip().z_flip(), a);
    EXPECT_EQ((a * b).z_flip(), a.z_flip() * b.z_flip());
}
