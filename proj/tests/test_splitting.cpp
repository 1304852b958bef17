#include <doctest.h>

#include <cmath>
#include <random>

#include "splitlab/kernels.hpp"
#include "splitlab/splitting.hpp"
#include "splitlab/stability.hpp"

using namespace splitlab;

namespace {

Problem stationary_problem(int n) {
    auto op = build_1d(UniformGrid{1, n}, BoundarySpec::interval(BoundaryFace::dirichlet(0.0),
                                                                 BoundaryFace::dirichlet(0.5)));
    const double h = op.grid().spacing();
    ScalarField u0(std::size_t(op.active_dofs()));
    for (int l = 1; l < n; ++l) {
        const double x = l * h;
        u0.values[std::size_t(l - 1)] = x * x / 2.0;
    }
    return {std::move(op), SourceTerm::constant(-1.0), std::move(u0), 0.1};
}

Problem heat_const_problem(int n) {
    auto op = build_1d(UniformGrid{1, n}, BoundarySpec::interval(BoundaryFace::dirichlet(1.0),
                                                                 BoundaryFace::dirichlet(1.0)));
    ScalarField u0(std::size_t(op.active_dofs()), 1.0);
    return {std::move(op), SourceTerm::constant(1.0), std::move(u0), 0.1};
}

}  // namespace

TEST_CASE("method name contract") {
    for (const auto& name : SplittingMethod::known_names()) {
        auto m = SplittingMethod::by_name(name);
        const bool dfd = name.back() == '2';
        CHECK((m.order == (dfd ? CompositionOrder::dfd : CompositionOrder::fdf)));
    }
    CHECK(SplittingMethod::strang_exp().propagator.kind ==
          DiffusionPropagator::Kind::exact_krylov);
    CHECK(SplittingMethod::strang_cn().propagator.kind ==
          DiffusionPropagator::Kind::cn_two_solve);
    CHECK(SplittingMethod::strang_gauss().propagator.rational.name == "Gauss2");
    CHECK(SplittingMethod::strang_radau2().propagator.rational.name == "Radau1a2");
    CHECK_THROWS_AS(SplittingMethod::by_name("StrangUnknown"), std::invalid_argument);
}

TEST_CASE("strang step preserves the discrete stationary state") {
    auto p = stationary_problem(60);
    auto out = strang_step(SplittingMethod::strang_cn_stage_form(), p, 0.01, p.initial);
    double drift = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i)
        drift = std::max(drift, std::abs(out.values[i] - p.initial.values[i]));
    CHECK(drift < 1e-13);
}

TEST_CASE("zero source collapses the fdf step to the bare diffusion step") {
    auto op = build_1d(UniformGrid{1, 30}, BoundarySpec::interval(BoundaryFace::dirichlet(0.2),
                                                                  BoundaryFace::dirichlet(0.9)));
    std::mt19937_64 gen(61);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    ScalarField u0(std::size_t(op.active_dofs()));
    for (auto& v : u0.values) v = d(gen);
    Problem p{op, SourceTerm::constant(0.0), u0, 0.1};
    auto split = strang_step(SplittingMethod::strang_cn(), p, 0.01, u0);
    auto bare = diffusion_step_cn(op, 0.01, u0);
    for (std::size_t i = 0; i < u0.size(); ++i)
        CHECK(split.values[i] == doctest::Approx(bare.values[i]).epsilon(1e-13));
}

TEST_CASE("fdf CN step equals the closed-form affine map") {
    // w* + r(tau A)(u - w*) + (tau/2)(r(tau A) + I) f for a space profile f
    const int n = 50;
    auto op = build_1d(UniformGrid{1, n}, BoundarySpec::interval(BoundaryFace::dirichlet(0.3),
                                                                 BoundaryFace::dirichlet(0.8)));
    const double h = op.grid().spacing();
    std::vector<double> f(std::size_t(op.active_dofs()));
    for (int l = 1; l < n; ++l) f[std::size_t(l - 1)] = std::sin(3.0 * l * h) + 0.5;
    std::mt19937_64 gen(67);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    ScalarField u0(std::size_t(op.active_dofs()));
    for (auto& v : u0.values) v = d(gen);
    Problem p{op, SourceTerm::space_profile(f), u0, 0.1};
    const double tau = 0.005;

    auto got = strang_step(SplittingMethod::strang_cn(), p, tau, u0);

    const auto& r = StabilityFunction::crank_nicolson();
    auto w = steady_state(op);
    ScalarField dev(u0.size());
    kernels::axpby(1.0, u0.values, -1.0, w.values, dev.values);
    auto rdev = apply_to_operator(r, tau, op, dev);
    auto rf = apply_to_operator(r, tau, op, ScalarField(f));
    ScalarField expect = w;
    kernels::axpy(1.0, rdev.values, expect.values);
    kernels::axpy(tau / 2.0, rf.values, expect.values);
    kernels::axpy(tau / 2.0, f, expect.values);

    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < u0.size(); ++i) {
        num += (got.values[i] - expect.values[i]) * (got.values[i] - expect.values[i]);
        den += expect.values[i] * expect.values[i];
    }
    CHECK(std::sqrt(num / den) < 1e-12);
}

TEST_CASE("integrate") {
    SUBCASE("one step equals strang_step") {
        auto p = heat_const_problem(40);
        auto traj = integrate(SplittingMethod::strang_cn(), p, 0.01, 1);
        auto single = strang_step(SplittingMethod::strang_cn(), p, 0.01, p.initial);
        CHECK(traj.states.size() == 2);
        CHECK(traj.states[1].values == single.values);
    }
    SUBCASE("five CN steps stay within the maximum-principle box") {
        auto p = heat_const_problem(200);
        auto traj = integrate(SplittingMethod::strang_cn(), p, 0.02, 5);
        CHECK(traj.times.back() == doctest::Approx(0.1));
        for (double v : traj.states.back().values) {
            CHECK(v >= 1.0 - 1e-12);
            CHECK(v <= 1.2);
        }
    }
    SUBCASE("observer sees every step") {
        auto p = heat_const_problem(20);
        int count = 0;
        double last_t = -1.0;
        integrate(SplittingMethod::strang_cn(), p, 0.01, 7,
                  [&](int k, double t, const ScalarField& u) {
                      CHECK(k == count);
                      CHECK(u.size() == p.initial.size());
                      last_t = t;
                      ++count;
                  });
        CHECK(count == 8);
        CHECK(last_t == doctest::Approx(0.07));
    }
    SUBCASE("stationary drift over 100 steps") {
        auto p = stationary_problem(100);
        auto traj = integrate(SplittingMethod::strang_cn_stage_form(), p, 0.001, 100);
        double drift = 0.0;
        for (const auto& s : traj.states)
            for (std::size_t i = 0; i < s.size(); ++i)
                drift = std::max(drift, std::abs(s.values[i] - p.initial.values[i]));
        CHECK(drift <= 1e-12);
    }
    SUBCASE("sub-step failure is reported with the step index") {
        auto op = build_1d(UniformGrid{1, 10}, BoundarySpec::interval(BoundaryFace::dirichlet(2.0),
                                                                      BoundaryFace::dirichlet(2.0)));
        ScalarField u0(std::size_t(op.active_dofs()), 2.0);
        Problem p{op, SourceTerm::quadratic_in_u(), u0, 1.0};
        CHECK_THROWS_WITH_AS(integrate(SplittingMethod::strang_cn(), p, 0.4, 5, {}),
                             doctest::Contains("blow-up"), std::runtime_error);
        try {
            integrate(SplittingMethod::strang_cn(), p, 0.4, 5, {});
        } catch (const std::runtime_error& e) {
            CHECK(std::string(e.what()).find("step ") != std::string::npos);
        }
    }
}

TEST_CASE("homogeneous CN trajectory equals stability-function powers") {
    auto op = build_1d(UniformGrid{1, 40}, BoundarySpec::interval(BoundaryFace::dirichlet(0.0),
                                                                  BoundaryFace::dirichlet(0.0)));
    std::mt19937_64 gen(71);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    ScalarField u0(std::size_t(op.active_dofs()));
    for (auto& v : u0.values) v = d(gen);
    Problem p{op, SourceTerm::constant(0.0), u0, 0.1};
    const double tau = 0.005;
    auto traj = integrate(SplittingMethod::strang_cn(), p, tau, 8);
    ScalarField power = u0;
    for (int k = 1; k <= 8; ++k) {
        power = apply_to_operator(StabilityFunction::crank_nicolson(), tau, op, power);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < u0.size(); ++i) {
            const double diff = traj.states[std::size_t(k)].values[i] - power.values[i];
            num += diff * diff;
            den += power.values[i] * power.values[i];
        }
        CHECK(std::sqrt(num / std::max(den, 1e-300)) < 1e-12);
    }
}

TEST_CASE("fdf and dfd agree for zero source with the exact flow") {
    auto op = build_1d(UniformGrid{1, 30}, BoundarySpec::interval(BoundaryFace::dirichlet(0.4),
                                                                  BoundaryFace::dirichlet(0.1)));
    std::mt19937_64 gen(73);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    ScalarField u0(std::size_t(op.active_dofs()));
    for (auto& v : u0.values) v = d(gen);
    Problem p{op, SourceTerm::constant(0.0), u0, 0.1};
    const KrylovOptions opts;
    auto a = strang_step(SplittingMethod::strang_exp(opts), p, 0.02, u0);
    auto b = strang_step(SplittingMethod::strang_exp2(opts), p, 0.02, u0);
    double worst = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < u0.size(); ++i) {
        worst = std::max(worst, std::abs(a.values[i] - b.values[i]));
        scale = std::max(scale, std::abs(u0.values[i]));
    }
    CHECK(worst <= 3.0 * opts.tol * scale * 10.0);
}

TEST_CASE("preset constructors are total") {
    for (const auto& name : SplittingMethod::known_names()) CHECK_NOTHROW(SplittingMethod::by_name(name));
}
