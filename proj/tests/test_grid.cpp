#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "splitlab/grid.hpp"

using namespace splitlab;

namespace {

Eigen::MatrixXd dense_of(const DiscreteDiffusion& op) {
    const int n = op.active_dofs();
    const auto d = op.matrix().to_dense();
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = d[std::size_t(i) * n + j];
    return m;
}

double max_real_eigenvalue(const DiscreteDiffusion& op) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(dense_of(op), false);
    return es.eigenvalues().real().maxCoeff();
}

double smallest_magnitude_eigenvalue_sym(const DiscreteDiffusion& op) {
    REQUIRE(op.matrix().is_symmetric());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense_of(op),
                                                      Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    double best = 1e300;
    for (int i = 0; i < ev.size(); ++i)
        if (std::abs(ev(i)) < std::abs(best)) best = ev(i);
    return best;
}

DiscreteDiffusion dirichlet_1d(int n, double gl, double gr) {
    return build_1d(UniformGrid{1, n}, BoundarySpec::interval(BoundaryFace::dirichlet(gl),
                                                              BoundaryFace::dirichlet(gr)));
}

}  // namespace

TEST_CASE("grid geometry") {
    for (int n : {2, 3, 7, 200, 1000}) {
        UniformGrid g{1, n};
        CHECK(std::abs(g.spacing() * n - 1.0) <= 2.3e-16);
        CHECK(g.nodes_per_axis() == n + 1);
    }
}

TEST_CASE("N=2 single-dof stencils") {
    auto op = dirichlet_1d(2, 0.0, 0.0);
    CHECK(op.active_dofs() == 1);
    CHECK(op.matrix().coeff(0, 0) == doctest::Approx(-8.0));
    CHECK(op.boundary_load()[0] == 0.0);

    auto op1 = dirichlet_1d(2, 1.0, 1.0);
    CHECK(op1.matrix().coeff(0, 0) == doctest::Approx(-8.0));
    CHECK(op1.boundary_load()[0] == doctest::Approx(8.0));
    ScalarField ones(1, 1.0);
    auto r = apply_D(op1, ones);
    CHECK(r.values[0] == 0.0);

    auto op2 = build_2d(UniformGrid{2, 2},
                        BoundarySpec::square(BoundaryFace::dirichlet(0.0), BoundaryFace::dirichlet(0.0),
                                             BoundaryFace::dirichlet(0.0), BoundaryFace::dirichlet(0.0)));
    CHECK(op2.active_dofs() == 1);
    CHECK(op2.matrix().coeff(0, 0) == doctest::Approx(-16.0));

    auto op3 = build_2d(UniformGrid{2, 2},
                        BoundarySpec::square(BoundaryFace::dirichlet(1.0), BoundaryFace::dirichlet(1.0),
                                             BoundaryFace::dirichlet(1.0), BoundaryFace::dirichlet(1.0)));
    auto r3 = apply_D(op3, ScalarField(1, 1.0));
    CHECK(r3.values[0] == doctest::Approx(0.0));
}

TEST_CASE("constant compatibility across face combinations") {
    // Dirichlet datum c with u = c gives A u + g_b = 0; Robin needs g = alpha*c
    const double c = 0.75;
    const auto robin = [&](double alpha, double beta) {
        return BoundaryFace::robin(alpha, beta, alpha * c);
    };
    for (int combo = 0; combo < 4; ++combo) {
        BoundaryFace left = combo & 1 ? robin(2.0, 1.5) : BoundaryFace::dirichlet(c);
        BoundaryFace right = combo & 2 ? robin(0.5, -0.5) : BoundaryFace::dirichlet(c);
        auto op = build_1d(UniformGrid{1, 16}, BoundarySpec::interval(left, right));
        ScalarField u(std::size_t(op.active_dofs()), c);
        auto r = apply_D(op, u);
        for (double v : r.values) CHECK(std::abs(v) < 1e-10);
    }
    // a 2d mix
    auto op = build_2d(UniformGrid{2, 8},
                       BoundarySpec::square(BoundaryFace::neumann(1.0, 0.0), BoundaryFace::dirichlet(c),
                                            robin(1.0, 1.0), BoundaryFace::dirichlet(c)));
    ScalarField u(std::size_t(op.active_dofs()), c);
    auto r = apply_D(op, u);
    for (double v : r.values) CHECK(std::abs(v) < 1e-10);
}

TEST_CASE("pure-Dirichlet 1d matrix is symmetric tridiagonal with the textbook entries") {
    auto op = dirichlet_1d(10, 0.0, 0.0);
    CHECK(op.matrix().is_symmetric());
    const double ih2 = 100.0;
    for (int i = 0; i < op.active_dofs(); ++i) {
        CHECK(op.matrix().coeff(i, i) == doctest::Approx(-2.0 * ih2));
        if (i + 1 < op.active_dofs()) CHECK(op.matrix().coeff(i, i + 1) == doctest::Approx(ih2));
    }
}

TEST_CASE("pure-Neumann matrix is symmetric under the half-boundary-weight scaling") {
    // the consistent ghost row is not symmetric as-is; W A with trapezoid
    // weights is
    auto op = build_1d(UniformGrid{1, 12},
                       BoundarySpec::interval(BoundaryFace::neumann(-1.0, 0.3),
                                              BoundaryFace::neumann(1.0, -0.2)));
    const int n = op.active_dofs();
    CHECK(n == 13);
    Eigen::MatrixXd a = dense_of(op);
    Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
    w(0) = w(n - 1) = 0.5;
    Eigen::MatrixXd wa = w.asDiagonal() * a;
    CHECK((wa - wa.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("spectra stay in the open left half-plane for the in-scope combinations") {
    const auto D = [] { return BoundaryFace::dirichlet(0.0); };
    const auto R = [] { return BoundaryFace::robin(1.0, 1.0, 0.0); };
    const auto Nm = [] { return BoundaryFace::neumann(1.0, 0.0); };
    for (int caseno = 0; caseno < 5; ++caseno) {
        BoundaryFace l = D(), r = D();
        if (caseno == 1) l = R();
        if (caseno == 2) r = R();
        if (caseno == 3) { l = R(); r = R(); }
        if (caseno == 4) { l = Nm(); }
        auto op = build_1d(UniformGrid{1, 24}, BoundarySpec::interval(l, r));
        CHECK(max_real_eigenvalue(op) < 0.0);
    }
    // the two 2d experiment configurations at a reduced size
    auto opa = build_2d(UniformGrid{2, 12},
                        BoundarySpec::square(BoundaryFace::robin(1.0, 1.0, 0.0),
                                             BoundaryFace::robin(1.0, 1.0, 0.0),
                                             BoundaryFace::robin(1.0, 1.0, 0.0),
                                             BoundaryFace::robin(1.0, 1.0, 0.0)));
    CHECK(max_real_eigenvalue(opa) < 0.0);
    auto opb = build_2d(UniformGrid{2, 12},
                        BoundarySpec::square(BoundaryFace::neumann(1.0, 0.5),
                                             BoundaryFace::dirichlet(1.0),
                                             BoundaryFace::neumann(1.0, 0.5),
                                             BoundaryFace::dirichlet(1.0)));
    CHECK(max_real_eigenvalue(opb) < 0.0);
}

TEST_CASE("smallest eigenvalue approaches the continuum value") {
    auto op = dirichlet_1d(200, 0.0, 0.0);
    const double lam = smallest_magnitude_eigenvalue_sym(op);
    const double pi2 = std::numbers::pi * std::numbers::pi;
    CHECK(std::abs(lam + pi2) / pi2 < 1e-3);

    auto op2 = build_2d(UniformGrid{2, 50},
                        BoundarySpec::square(BoundaryFace::dirichlet(0.0), BoundaryFace::dirichlet(0.0),
                                             BoundaryFace::dirichlet(0.0), BoundaryFace::dirichlet(0.0)));
    const double lam2 = smallest_magnitude_eigenvalue_sym(op2);
    CHECK(std::abs(lam2 + 2.0 * pi2) / (2.0 * pi2) < 5e-3);
}

TEST_CASE("second-order consistency for sin(pi x)") {
    const double pi = std::numbers::pi;
    const auto residual = [&](int n) {
        auto op = dirichlet_1d(n, 0.0, 0.0);
        const double h = op.grid().spacing();
        ScalarField u(std::size_t(op.active_dofs()));
        for (int l = 1; l < n; ++l) u.values[std::size_t(l - 1)] = std::sin(pi * l * h);
        auto r = apply_D(op, u);
        double worst = 0.0;
        for (int l = 1; l < n; ++l)
            worst = std::max(worst,
                             std::abs(r.values[std::size_t(l - 1)] +
                                      pi * pi * std::sin(pi * l * h)));
        return worst;
    };
    const double r1 = residual(40), r2 = residual(80);
    CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("apply_D matches a dense matvec oracle") {
    auto op = build_1d(UniformGrid{1, 20},
                       BoundarySpec::interval(BoundaryFace::robin(1.0, -1.0, 0.4),
                                              BoundaryFace::dirichlet(0.7)));
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    ScalarField u(std::size_t(op.active_dofs()));
    for (auto& x : u.values) x = d(gen);
    auto got = apply_D(op, u);
    Eigen::MatrixXd a = dense_of(op);
    Eigen::Map<const Eigen::VectorXd> uv(u.data(), op.active_dofs());
    Eigen::VectorXd expect = a * uv;
    for (int i = 0; i < op.active_dofs(); ++i)
        expect(i) += op.boundary_load()[std::size_t(i)];
    for (int i = 0; i < op.active_dofs(); ++i)
        CHECK(got.values[std::size_t(i)] == doctest::Approx(expect(i)).epsilon(1e-13));
}

TEST_CASE("stationary field of the constant-source problem") {
    // u = x^2/2 with Dirichlet (0, 1/2) and f = -1: A u + g_b - 1 = 0
    const int n = 50;
    auto op = dirichlet_1d(n, 0.0, 0.5);
    const double h = op.grid().spacing();
    ScalarField u(std::size_t(op.active_dofs()));
    for (int l = 1; l < n; ++l) {
        const double x = l * h;
        u.values[std::size_t(l - 1)] = x * x / 2.0;
    }
    auto r = apply_D(op, u);
    for (double v : r.values) CHECK(std::abs(v - 1.0) < 1e-12);
}

TEST_CASE("steady state") {
    SUBCASE("harmonic interpolant") {
        const int n = 50;
        auto op = dirichlet_1d(n, 0.0, 0.5);
        auto w = steady_state(op);
        const double h = op.grid().spacing();
        for (int l = 1; l < n; ++l)
            CHECK(std::abs(w.values[std::size_t(l - 1)] - 0.5 * l * h) < 1e-12);
    }
    SUBCASE("constant data") {
        auto op = dirichlet_1d(30, 0.25, 0.25);
        auto w = steady_state(op);
        for (double v : w.values) CHECK(std::abs(v - 0.25) < 1e-12);
    }
    SUBCASE("zero load") {
        auto op = dirichlet_1d(30, 0.0, 0.0);
        auto w = steady_state(op);
        for (double v : w.values) CHECK(v == 0.0);
    }
}

TEST_CASE("shifted solve") {
    SUBCASE("zero rhs") {
        auto op = dirichlet_1d(10, 0.0, 0.0);
        auto x = shifted_solve(op, 0.3, ScalarField(std::size_t(op.active_dofs()), 0.0));
        for (double v : x.values) CHECK(v == 0.0);
    }
    SUBCASE("N=2 scalar arithmetic") {
        auto op = dirichlet_1d(2, 0.0, 0.0);
        ScalarField rhs(1, 0.6);
        auto x = shifted_solve(op, 1.0 / 8.0, rhs);  // (1 + 8/8) x = rhs
        CHECK(x.values[0] == doctest::Approx(0.3));
    }
    SUBCASE("residual contract at N=50") {
        auto op = dirichlet_1d(50, 0.0, 0.0);
        std::mt19937_64 gen(31);
        std::uniform_real_distribution<double> d(-1.0, 1.0);
        ScalarField rhs(std::size_t(op.active_dofs()));
        for (auto& v : rhs.values) v = d(gen);
        const double sigma = 0.01;
        auto x = shifted_solve(op, sigma, rhs);
        std::vector<double> ax(x.size(), 0.0);
        op.matrix().matvec(x.values, ax);
        double rnorm = 0.0, bnorm = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double r = rhs.values[i] - (x.values[i] - sigma * ax[i]);
            rnorm += r * r;
            bnorm += rhs.values[i] * rhs.values[i];
        }
        CHECK(std::sqrt(rnorm) <= 1e-12 * std::sqrt(bnorm));
    }
}

TEST_CASE("invalid boundary specifications are rejected") {
    auto no_condition = BoundaryFace{BoundaryFace::Kind::robin, 0.0, 0.0,
                                     [](double) { return 0.0; }};
    CHECK_THROWS_AS(build_1d(UniformGrid{1, 8},
                             BoundarySpec::interval(no_condition, BoundaryFace::dirichlet(0.0))),
                    std::invalid_argument);
    auto tangential = BoundaryFace{BoundaryFace::Kind::robin, 1.0, 0.0,
                                   [](double) { return 0.0; }};
    CHECK_THROWS_AS(build_1d(UniformGrid{1, 8},
                             BoundarySpec::interval(BoundaryFace::dirichlet(0.0), tangential)),
                    std::invalid_argument);
    ScalarField wrong(3, 0.0);
    auto op = dirichlet_1d(10, 0.0, 0.0);
    CHECK_THROWS_AS(apply_D(op, wrong), std::invalid_argument);
}
