#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hnoma/rng.hpp"

#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

using hnoma::RandomStream;

TEST_CASE("same seed reproduces the same sequence") {
    RandomStream a(12345);
    RandomStream b(12345);
    for (int i = 0; i < 1000; ++i) {
        CHECK(a.next_u64() == b.next_u64());
    }
}

TEST_CASE("different seeds give different sequences") {
    RandomStream a(1);
    RandomStream b(2);
    int agree = 0;
    for (int i = 0; i < 1000; ++i) {
        if (a.next_u64() == b.next_u64()) ++agree;
    }
    CHECK(agree == 0);
}

TEST_CASE("derive is deterministic and path-sensitive") {
    auto first = RandomStream::derive(7, {1, 2, 3}).next_u64();
    auto again = RandomStream::derive(7, {1, 2, 3}).next_u64();
    CHECK(first == again);

    // Every coordinate of the path matters, as does the root.
    std::set<std::uint64_t> outputs;
    outputs.insert(first);
    outputs.insert(RandomStream::derive(8, {1, 2, 3}).next_u64());
    outputs.insert(RandomStream::derive(7, {0, 2, 3}).next_u64());
    outputs.insert(RandomStream::derive(7, {1, 0, 3}).next_u64());
    outputs.insert(RandomStream::derive(7, {1, 2, 0}).next_u64());
    outputs.insert(RandomStream::derive(7, {3, 2, 1}).next_u64());
    CHECK(outputs.size() == 6);
}

TEST_CASE("derived streams do not collide over a realistic index range") {
    // Path tuples shaped like (point, trial, purpose): no duplicate seeds.
    std::set<std::uint64_t> seen;
    int n = 0;
    for (std::uint64_t point = 0; point < 4; ++point) {
        for (std::uint64_t trial = 0; trial < 500; ++trial) {
            for (std::uint64_t purpose = 0; purpose < 4; ++purpose) {
                seen.insert(RandomStream::derive(42, {point, trial, purpose}).next_u64());
                ++n;
            }
        }
    }
    CHECK(static_cast<int>(seen.size()) == n);
}

TEST_CASE("next_unit stays in [0, 1) and looks uniform") {
    RandomStream rng(99);
    const int n = 100000;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = rng.next_unit();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
        sum_sq += u * u;
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    CHECK(mean == doctest::Approx(0.5).epsilon(0.01));
    CHECK(var == doctest::Approx(1.0 / 12.0).epsilon(0.03));
}

TEST_CASE("next_gaussian has standard normal moments") {
    RandomStream rng(7);
    const int n = 200000;
    double m1 = 0.0, m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.next_gaussian();
        m1 += x;
        m2 += x * x;
        m3 += x * x * x;
        m4 += x * x * x * x;
    }
    m1 /= n;
    m2 /= n;
    m3 /= n;
    m4 /= n;
    CHECK(std::abs(m1) < 0.01);
    CHECK(m2 == doctest::Approx(1.0).epsilon(0.02));
    CHECK(std::abs(m3) < 0.03);
    CHECK(m4 == doctest::Approx(3.0).epsilon(0.05)); // kurtosis of a normal
}

TEST_CASE("next_cgaussian is circularly symmetric with the requested power") {
    RandomStream rng(11);
    const int n = 100000;
    const double variance = 2.5;
    double power = 0.0;
    std::complex<double> mean{0.0, 0.0};
    double re_im_corr = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto z = rng.next_cgaussian(variance);
        power += std::norm(z);
        mean += z;
        re_im_corr += z.real() * z.imag();
    }
    CHECK(power / n == doctest::Approx(variance).epsilon(0.02));
    CHECK(std::abs(mean.real() / n) < 0.02);
    CHECK(std::abs(mean.imag() / n) < 0.02);
    CHECK(std::abs(re_im_corr / n) < 0.02); // independent quadratures
}

TEST_CASE("next_pow2 covers the full range uniformly") {
    RandomStream rng(3);
    const std::uint32_t bound = 8;
    std::vector<int> counts(bound, 0);
    const int n = 80000;
    for (int i = 0; i < n; ++i) {
        const auto v = rng.next_pow2(bound);
        REQUIRE(v < bound);
        ++counts[v];
    }
    for (auto c : counts) {
        CHECK(c == doctest::Approx(n / static_cast<double>(bound)).epsilon(0.05));
    }
}

TEST_CASE("kolmogorov-smirnov distance of next_unit is small") {
    RandomStream rng(2024);
    const int n = 10000;
    std::vector<double> samples(n);
    for (auto& s : samples) s = rng.next_unit();
    std::sort(samples.begin(), samples.end());
    double d = 0.0;
    for (int i = 0; i < n; ++i) {
        const double cdf = samples[static_cast<std::size_t>(i)];
        d = std::max(d, std::abs(cdf - (i + 1.0) / n));
        d = std::max(d, std::abs(cdf - static_cast<double>(i) / n));
    }
    CHECK(d < 1.63 / std::sqrt(static_cast<double>(n))); // 1% significance
}
