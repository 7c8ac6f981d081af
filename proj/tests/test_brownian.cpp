#include "svi/brownian.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>

using namespace svi;

TEST_CASE("philox4x64-10 known-answer vectors")
{
    // Reference outputs generated with numpy.random.Philox (same algorithm,
    // 4x64 counter, 2x64 key, 10 rounds). numpy pre-increments counter[0], so
    // its first emitted block corresponds to counter {c0+1, c1, c2, c3}.
    {
        auto b = Philox4x64::block({0, 0}, {1, 0, 0, 0});
        CHECK(b[0] == 0x02f4ba6408e4d89bull);
        CHECK(b[1] == 0x3dd62b0b9ca8c5b2ull);
        CHECK(b[2] == 0x1c8667a55d902e79ull);
        CHECK(b[3] == 0x907d7a052fd5b4dcull);
        auto b1 = Philox4x64::block({0, 0}, {2, 0, 0, 0});
        CHECK(b1[0] == 0x809bf322883987c3ull);
        CHECK(b1[1] == 0x471128b9e807f7ddull);
        CHECK(b1[2] == 0xf250ba0dbec065b7ull);
        CHECK(b1[3] == 0xfc6ed66767a457bcull);
    }
    {
        auto b = Philox4x64::block({0xa4093822299f31d0ull, 0x13198a2e03707344ull}, {1, 0, 0, 0});
        CHECK(b[0] == 0x0ad8efff13a4e29cull);
        CHECK(b[1] == 0x832f3b7b8bab4163ull);
        CHECK(b[2] == 0xb05c41a48868a7c5ull);
        CHECK(b[3] == 0xc6fd6764bbc12d3bull);
    }
    {
        auto b = Philox4x64::block({1234, 0}, {1, 7, 3, 0});
        CHECK(b[0] == 0x70a0ec3780d86189ull);
        CHECK(b[1] == 0x0f943f6f2e0a6fedull);
        CHECK(b[2] == 0x2ff709e5a58b51b3ull);
        CHECK(b[3] == 0x87bfeb6de1986a92ull);
        auto b1 = Philox4x64::block({1234, 0}, {2, 7, 3, 0});
        CHECK(b1[0] == 0x6e2918ed4b5afbc3ull);
        CHECK(b1[1] == 0x6934c16719e6f35eull);
        CHECK(b1[2] == 0x70ca1ea0c8671c8dull);
        CHECK(b1[3] == 0xfe11639cfea7f09eull);
    }
}

TEST_CASE("generate is deterministic with the advertised count")
{
    const PathSpec spec{1.0, 1e-3, 42, 7};
    const BrownianPath a = generate(spec);
    const BrownianPath b = generate(spec);
    CHECK(a.increments.size() == 1000);
    CHECK(a.increments == b.increments);

    const BrownianPath c = generate(PathSpec{1.0, 1e-3, 42, 8});
    CHECK(a.increments != c.increments);
}

TEST_CASE("increment moments match N(0, dt)")
{
    const double dt = 1e-3;
    const std::size_t n = 1000000;
    NormalStream stream(2024, 0, 0);
    double sum = 0.0, sumsq = 0.0;
    const double sd = std::sqrt(dt);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = sd * stream.normal(i);
        sum += x;
        sumsq += x * x;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    const double mean_se = sd / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(mean) <= 4.0 * mean_se);
    CHECK(var == doctest::Approx(dt).epsilon(0.01));
}

TEST_CASE("paths with different path_index are uncorrelated")
{
    const std::size_t n = 100000;
    NormalStream s0(99, 0, 0), s1(99, 1, 0);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = s0.normal(i), y = s1.normal(i);
        sxy += x * y;
        sxx += x * x;
        syy += y * y;
    }
    const double corr = sxy / std::sqrt(sxx * syy);
    CHECK(std::abs(corr) <= 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("refine preserves coarse sums and the fine-scale law")
{
    const PathSpec spec{0.5, 1e-2, 7, 3};
    const BrownianPath coarse = generate(spec);
    CHECK_THROWS_AS(refine(coarse, 1), std::invalid_argument);

    const BrownianPath fine = refine(coarse, 4);
    CHECK(fine.spec.dt == doctest::Approx(2.5e-3).epsilon(1e-15));
    CHECK(fine.increments.size() == 4 * coarse.increments.size());
    for (std::size_t i = 0; i < coarse.increments.size(); ++i) {
        double s = 0.0;
        for (int j = 0; j < 4; ++j) s += fine.increments[4 * i + j];
        // group closed exactly by construction; summation order costs <= 1 ulp
        CHECK(std::abs(s - coarse.increments[i]) <= 1e-15);
    }

    // refined increments still pass the moment check at dt/factor
    const BrownianPath big = refine(generate(PathSpec{100.0, 1e-2, 11, 0}), 2);
    double sum = 0.0, sumsq = 0.0;
    for (double d : big.increments) {
        sum += d;
        sumsq += d * d;
    }
    const double n = static_cast<double>(big.increments.size());
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    CHECK(std::abs(mean) <= 4.0 * std::sqrt(5e-3 / n));
    CHECK(var == doctest::Approx(5e-3).epsilon(0.02));

    // refining twice uses distinct bridge streams
    const BrownianPath fine2 = refine(fine, 2);
    CHECK(fine2.level == 2);
    CHECK(fine2.increments.size() == 8 * coarse.increments.size());
}

TEST_CASE("spec validation")
{
    CHECK_THROWS(PathSpec{0.0, 1e-3, 0, 0}.n_steps());
    CHECK_THROWS(PathSpec{1.0, 0.0, 0, 0}.n_steps());
    CHECK_THROWS(PathSpec{1e300, 1e-300, 0, 0}.n_steps());
}
