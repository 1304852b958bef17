#pragma once

#include <array>
#include <functional>
#include <vector>

#include "splitlab/band_matrix.hpp"

namespace splitlab {

/// Uniform grid on the unit interval/square: nodes x_l = l*h, h = 1/N.
struct UniformGrid {
    int dimension = 1;  // 1 or 2
    int intervals = 1;  // N

    double spacing() const { return 1.0 / intervals; }
    int nodes_per_axis() const { return intervals + 1; }
};

/// One boundary face. Neumann is Robin with alpha = 0. Robin coefficients use
/// the outward-normal convention: alpha*u + beta*du/dn = g.
struct BoundaryFace {
    enum class Kind { dirichlet, robin };
    Kind kind = Kind::dirichlet;
    double alpha = 0.0;
    double beta = 0.0;
    std::function<double(double)> datum;  // g as a function of the tangential coordinate

    static BoundaryFace dirichlet(double g);
    static BoundaryFace dirichlet(std::function<double(double)> g);
    static BoundaryFace robin(double alpha, double beta, double g);
    static BoundaryFace robin(double alpha, double beta, std::function<double(double)> g);
    static BoundaryFace neumann(double beta, double g) { return robin(0.0, beta, g); }
    static BoundaryFace neumann(double beta, std::function<double(double)> g) {
        return robin(0.0, beta, std::move(g));
    }
};

/// Full boundary specification: 2 faces in 1d (left/right), 4 in 2d
/// (left x=0, right x=1, bottom y=0, top y=1).
struct BoundarySpec {
    std::vector<BoundaryFace> faces;

    static BoundarySpec interval(BoundaryFace left, BoundaryFace right);
    static BoundarySpec square(BoundaryFace left, BoundaryFace right, BoundaryFace bottom,
                               BoundaryFace top);
};

/// Vector of values on the active dofs of a DiscreteDiffusion.
struct ScalarField {
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(std::vector<double> v) : values(std::move(v)) {}
    explicit ScalarField(std::size_t n, double fill = 0.0) : values(n, fill) {}
    std::size_t size() const { return values.size(); }
    double* data() { return values.data(); }
    const double* data() const { return values.data(); }
};

/// The semi-discrete diffusion operator pair: du/dt = A_h u + g_b on the
/// active dofs. Dirichlet nodes are eliminated; Robin/Neumann boundary nodes
/// stay active with their ghost point folded into the stencil. Immutable
/// after assembly.
class DiscreteDiffusion {
public:
    const UniformGrid& grid() const { return grid_; }
    const BoundarySpec& bc() const { return bc_; }
    const BandMatrix& matrix() const { return matrix_; }
    const std::vector<double>& boundary_load() const { return load_; }
    int active_dofs() const { return matrix_.size(); }

    /// active index range [lo, hi] per axis
    int axis_lo(int axis) const { return lo_[std::size_t(axis)]; }
    int axis_hi(int axis) const { return hi_[std::size_t(axis)]; }

    /// values at every grid node, row-major over (m, l) in 2d; Dirichlet
    /// nodes filled from the boundary data
    std::vector<double> to_full_grid(const ScalarField& u) const;

    friend DiscreteDiffusion build_1d(const UniformGrid&, const BoundarySpec&);
    friend DiscreteDiffusion build_2d(const UniformGrid&, const BoundarySpec&);

private:
    DiscreteDiffusion(UniformGrid g, BoundarySpec bc, BandMatrix m, std::vector<double> load,
                      std::array<int, 2> lo, std::array<int, 2> hi)
        : grid_(g), bc_(std::move(bc)), matrix_(std::move(m)), load_(std::move(load)),
          lo_(lo), hi_(hi) {}

    UniformGrid grid_;
    BoundarySpec bc_;
    BandMatrix matrix_;
    std::vector<double> load_;
    std::array<int, 2> lo_{0, 0}, hi_{0, 0};
};

/// Second-order finite differences for d^2/dx^2 on (0,1) with ghost-point
/// Robin elimination.
DiscreteDiffusion build_1d(const UniformGrid& grid, const BoundarySpec& bc);

/// Five-point Laplacian on (0,1)^2; mixed per-face conditions, corner nodes
/// shared by two Robin faces receive both ghost eliminations.
DiscreteDiffusion build_2d(const UniformGrid& grid, const BoundarySpec& bc);

/// A_h u + g_b, the discrete Du for a field meeting the inhomogeneous BCs
ScalarField apply_D(const DiscreteDiffusion& op, const ScalarField& u);

/// w* = -A_h^{-1} g_b, the affine fixed point shared by all rational propagators
ScalarField steady_state(const DiscreteDiffusion& op);

/// x with (I - sigma*A_h) x = rhs
ScalarField shifted_solve(const DiscreteDiffusion& op, double sigma, const ScalarField& rhs);

}  // namespace splitlab
