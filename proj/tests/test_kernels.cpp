#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "splitlab/kernels.hpp"

using namespace splitlab;

namespace {

std::vector<double> random_vec(std::size_t n, unsigned seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = d(gen);
    return v;
}

}  // namespace

TEST_CASE("scalar backend basics") {
    kernels::select_backend("scalar");
    std::vector<double> x{1.0, 2.0, 3.0}, y{1.0, 1.0, 1.0};
    kernels::axpy(2.0, x, y);
    CHECK(y == std::vector<double>{3.0, 5.0, 7.0});
    CHECK(kernels::dot(x, x) == doctest::Approx(14.0));
    std::vector<double> out(3);
    kernels::axpby(1.0, x, -1.0, y, out);
    CHECK(out == std::vector<double>{-2.0, -3.0, -4.0});
    CHECK(kernels::diff_sumsq(x, y) == doctest::Approx(4.0 + 9.0 + 16.0));
    kernels::select_backend("auto");
}

TEST_CASE("quad_flow matches the pointwise closed form and reports min denominator") {
    std::vector<double> u{2.0, -1.0, 0.5};
    std::vector<double> out(3);
    const double dmin = kernels::quad_flow(0.25, u, out);
    CHECK(out[0] == doctest::Approx(4.0));           // 2/(1-0.5)
    CHECK(out[1] == doctest::Approx(-0.8));          // -1/(1+0.25)
    CHECK(out[2] == doctest::Approx(0.5 / 0.875));
    CHECK(dmin == doctest::Approx(0.5));
}

#if defined(__x86_64__) || defined(_M_X64)
TEST_CASE("simd backend agrees with the scalar reference") {
    if (!kernels::avx2_available()) return;
    // sizes straddle the vector width to exercise the tails
    for (std::size_t n : {1u, 3u, 4u, 7u, 8u, 63u, 64u, 65u, 1000u}) {
        auto x = random_vec(n, 11 + unsigned(n));
        auto y = random_vec(n, 37 + unsigned(n));
        const double a = 0.7371, b = -1.25;

        kernels::select_backend("scalar");
        auto ys = y;
        kernels::axpy(a, x, ys);
        std::vector<double> outs(n), quads(n);
        kernels::axpby(a, x, b, y, outs);
        const double dots = kernels::dot(x, y);
        const double dss = kernels::diff_sumsq(x, y);
        const double qms = kernels::quad_flow(0.3, x, quads);
        auto es = y;
        kernels::emadd(x, y, es);

        kernels::select_backend("avx2");
        auto yv = y;
        kernels::axpy(a, x, yv);
        std::vector<double> outv(n), quadv(n);
        kernels::axpby(a, x, b, y, outv);
        const double dotv = kernels::dot(x, y);
        const double dsv = kernels::diff_sumsq(x, y);
        const double qmv = kernels::quad_flow(0.3, x, quadv);
        auto ev = y;
        kernels::emadd(x, y, ev);
        kernels::select_backend("auto");

        for (std::size_t i = 0; i < n; ++i) {
            CHECK(ys[i] == doctest::Approx(yv[i]).epsilon(1e-15));
            CHECK(outs[i] == doctest::Approx(outv[i]).epsilon(1e-15));
            CHECK(quads[i] == doctest::Approx(quadv[i]).epsilon(1e-15));
            CHECK(es[i] == doctest::Approx(ev[i]).epsilon(1e-15));
        }
        CHECK(dots == doctest::Approx(dotv).epsilon(1e-13));
        CHECK(dss == doctest::Approx(dsv).epsilon(1e-13));
        CHECK(qms == doctest::Approx(qmv).epsilon(1e-14));
    }
}
#endif

TEST_CASE("backend selection") {
    CHECK_THROWS(kernels::select_backend("never-heard-of-it"));
    kernels::select_backend("auto");
    CHECK(kernels::active().name != nullptr);
}
