#include "splitlab/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "splitlab/kernels.hpp"

namespace splitlab {

namespace {

void validate_face(const BoundaryFace& f) {
    if (f.kind == BoundaryFace::Kind::robin) {
        if (f.beta == 0.0 && f.alpha == 0.0)
            throw std::invalid_argument("boundary face with alpha = beta = 0 is no condition");
        if (f.beta == 0.0)
            throw std::invalid_argument("Robin face requires beta != 0 (nontangentiality)");
    }
    if (!f.datum) throw std::invalid_argument("boundary face needs a datum");
}

bool is_dirichlet(const BoundaryFace& f) { return f.kind == BoundaryFace::Kind::dirichlet; }

}  // namespace

BoundaryFace BoundaryFace::dirichlet(double g) {
    return dirichlet([g](double) { return g; });
}

BoundaryFace BoundaryFace::dirichlet(std::function<double(double)> g) {
    BoundaryFace f;
    f.kind = Kind::dirichlet;
    f.datum = std::move(g);
    return f;
}

BoundaryFace BoundaryFace::robin(double alpha, double beta, double g) {
    return robin(alpha, beta, [g](double) { return g; });
}

BoundaryFace BoundaryFace::robin(double alpha, double beta, std::function<double(double)> g) {
    BoundaryFace f;
    f.kind = Kind::robin;
    f.alpha = alpha;
    f.beta = beta;
    f.datum = std::move(g);
    return f;
}

BoundarySpec BoundarySpec::interval(BoundaryFace left, BoundaryFace right) {
    BoundarySpec bc;
    bc.faces = {std::move(left), std::move(right)};
    return bc;
}

BoundarySpec BoundarySpec::square(BoundaryFace left, BoundaryFace right, BoundaryFace bottom,
                                  BoundaryFace top) {
    BoundarySpec bc;
    bc.faces = {std::move(left), std::move(right), std::move(bottom), std::move(top)};
    return bc;
}

DiscreteDiffusion build_1d(const UniformGrid& grid, const BoundarySpec& bc) {
    if (grid.dimension != 1) throw std::invalid_argument("build_1d: grid.dimension != 1");
    if (grid.intervals < 2) throw std::invalid_argument("build_1d: need N >= 2");
    if (bc.faces.size() != 2) throw std::invalid_argument("build_1d: need exactly 2 faces");
    const auto& left = bc.faces[0];
    const auto& right = bc.faces[1];
    validate_face(left);
    validate_face(right);

    const int N = grid.intervals;
    const double h = grid.spacing();
    const double ih2 = 1.0 / (h * h);
    const int lo = is_dirichlet(left) ? 1 : 0;
    const int hi = is_dirichlet(right) ? N - 1 : N;
    const int n = hi - lo + 1;

    BandMatrix A(n);
    std::vector<double> gb(std::size_t(n), 0.0);

    for (int l = lo; l <= hi; ++l) {
        const int i = l - lo;
        A.add(i, i, -2.0 * ih2);
        if (l - 1 >= lo) {
            A.add(i, i - 1, ih2);
        } else if (is_dirichlet(left)) {
            gb[std::size_t(i)] += left.datum(0.0) * ih2;
        } else {
            // ghost at x_{-1}: u_{-1} = u_1 + (2h/beta)(g - alpha*u_0)
            A.add(i, i + 1, ih2);
            A.add(i, i, -2.0 * left.alpha / (left.beta * h));
            gb[std::size_t(i)] += 2.0 * left.datum(0.0) / (left.beta * h);
        }
        if (l + 1 <= hi) {
            A.add(i, i + 1, ih2);
        } else if (is_dirichlet(right)) {
            gb[std::size_t(i)] += right.datum(0.0) * ih2;
        } else {
            A.add(i, i - 1, ih2);
            A.add(i, i, -2.0 * right.alpha / (right.beta * h));
            gb[std::size_t(i)] += 2.0 * right.datum(0.0) / (right.beta * h);
        }
    }
    return DiscreteDiffusion(grid, bc, std::move(A), std::move(gb), {lo, 0}, {hi, 0});
}

DiscreteDiffusion build_2d(const UniformGrid& grid, const BoundarySpec& bc) {
    if (grid.dimension != 2) throw std::invalid_argument("build_2d: grid.dimension != 2");
    if (grid.intervals < 2) throw std::invalid_argument("build_2d: need N >= 2");
    if (bc.faces.size() != 4) throw std::invalid_argument("build_2d: need exactly 4 faces");
    const auto& left = bc.faces[0];
    const auto& right = bc.faces[1];
    const auto& bottom = bc.faces[2];
    const auto& top = bc.faces[3];
    for (const auto& f : bc.faces) validate_face(f);

    const int N = grid.intervals;
    const double h = grid.spacing();
    const double ih2 = 1.0 / (h * h);
    const int lox = is_dirichlet(left) ? 1 : 0;
    const int hix = is_dirichlet(right) ? N - 1 : N;
    const int loy = is_dirichlet(bottom) ? 1 : 0;
    const int hiy = is_dirichlet(top) ? N - 1 : N;
    const int nx = hix - lox + 1;
    const int ny = hiy - loy + 1;
    const int n = nx * ny;

    BandMatrix A(n);
    std::vector<double> gb(std::size_t(n), 0.0);
    const auto idx = [&](int l, int m) { return (m - loy) * nx + (l - lox); };

    for (int m = loy; m <= hiy; ++m) {
        const double y = m * h;
        for (int l = lox; l <= hix; ++l) {
            const double x = l * h;
            const int i = idx(l, m);
            A.add(i, i, -4.0 * ih2);
            if (l - 1 >= lox) {
                A.add(i, idx(l - 1, m), ih2);
            } else if (is_dirichlet(left)) {
                gb[std::size_t(i)] += left.datum(y) * ih2;
            } else {
                A.add(i, idx(l + 1, m), ih2);
                A.add(i, i, -2.0 * left.alpha / (left.beta * h));
                gb[std::size_t(i)] += 2.0 * left.datum(y) / (left.beta * h);
            }
            if (l + 1 <= hix) {
                A.add(i, idx(l + 1, m), ih2);
            } else if (is_dirichlet(right)) {
                gb[std::size_t(i)] += right.datum(y) * ih2;
            } else {
                A.add(i, idx(l - 1, m), ih2);
                A.add(i, i, -2.0 * right.alpha / (right.beta * h));
                gb[std::size_t(i)] += 2.0 * right.datum(y) / (right.beta * h);
            }
            if (m - 1 >= loy) {
                A.add(i, idx(l, m - 1), ih2);
            } else if (is_dirichlet(bottom)) {
                gb[std::size_t(i)] += bottom.datum(x) * ih2;
            } else {
                A.add(i, idx(l, m + 1), ih2);
                A.add(i, i, -2.0 * bottom.alpha / (bottom.beta * h));
                gb[std::size_t(i)] += 2.0 * bottom.datum(x) / (bottom.beta * h);
            }
            if (m + 1 <= hiy) {
                A.add(i, idx(l, m + 1), ih2);
            } else if (is_dirichlet(top)) {
                gb[std::size_t(i)] += top.datum(x) * ih2;
            } else {
                A.add(i, idx(l, m - 1), ih2);
                A.add(i, i, -2.0 * top.alpha / (top.beta * h));
                gb[std::size_t(i)] += 2.0 * top.datum(x) / (top.beta * h);
            }
        }
    }
    return DiscreteDiffusion(grid, bc, std::move(A), std::move(gb), {lox, loy}, {hix, hiy});
}

std::vector<double> DiscreteDiffusion::to_full_grid(const ScalarField& u) const {
    if (int(u.size()) != active_dofs())
        throw std::invalid_argument("to_full_grid: field does not conform to operator");
    const int N = grid_.intervals;
    const double h = grid_.spacing();
    if (grid_.dimension == 1) {
        std::vector<double> full(std::size_t(N) + 1, 0.0);
        for (int l = lo_[0]; l <= hi_[0]; ++l) full[std::size_t(l)] = u.values[std::size_t(l - lo_[0])];
        if (lo_[0] == 1) full[0] = bc_.faces[0].datum(0.0);
        if (hi_[0] == N - 1) full[std::size_t(N)] = bc_.faces[1].datum(0.0);
        return full;
    }
    const int nx = hi_[0] - lo_[0] + 1;
    std::vector<double> full(std::size_t(N + 1) * (N + 1), 0.0);
    const auto at = [&](int l, int m) -> double& { return full[std::size_t(m) * (N + 1) + l]; };
    for (int m = lo_[1]; m <= hi_[1]; ++m)
        for (int l = lo_[0]; l <= hi_[0]; ++l)
            at(l, m) = u.values[std::size_t((m - lo_[1]) * nx + (l - lo_[0]))];
    if (lo_[0] == 1)
        for (int m = 0; m <= N; ++m) at(0, m) = bc_.faces[0].datum(m * h);
    if (hi_[0] == N - 1)
        for (int m = 0; m <= N; ++m) at(N, m) = bc_.faces[1].datum(m * h);
    if (lo_[1] == 1)
        for (int l = 0; l <= N; ++l) at(l, 0) = bc_.faces[2].datum(l * h);
    if (hi_[1] == N - 1)
        for (int l = 0; l <= N; ++l) at(l, N) = bc_.faces[3].datum(l * h);
    return full;
}

ScalarField apply_D(const DiscreteDiffusion& op, const ScalarField& u) {
    if (int(u.size()) != op.active_dofs()) throw std::invalid_argument("apply_D: dof mismatch");
    ScalarField out(u.size());
    op.matrix().matvec(u.values, out.values);
    kernels::axpy(1.0, op.boundary_load(), out.values);
    return out;
}

ScalarField steady_state(const DiscreteDiffusion& op) {
    BandLU lu(op.matrix());
    std::vector<double> rhs(op.boundary_load());
    kernels::scal(-1.0, rhs);
    lu.solve_inplace(rhs);
    return ScalarField(std::move(rhs));
}

ScalarField shifted_solve(const DiscreteDiffusion& op, double sigma, const ScalarField& rhs) {
    if (sigma <= 0.0) throw std::invalid_argument("shifted_solve: sigma must be positive");
    if (int(rhs.size()) != op.active_dofs())
        throw std::invalid_argument("shifted_solve: dof mismatch");
    BandMatrix M = op.matrix().scaled(-sigma);
    M.add_scaled(1.0, BandMatrix::identity(op.active_dofs()));
    BandLU lu(M);
    return ScalarField(lu.solve(rhs.values));
}

}  // namespace splitlab
