#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "splitlab/flows.hpp"
#include "splitlab/grid.hpp"

namespace splitlab {

/// Error norm over a trajectory of per-step L2 errors E_k at t_k = k*tau:
///   l2_final:          E_n at the final time
///   sup_l2 (t_min):    max over k with t_k >= t_min of E_k
///   sup_time_weighted: max over k of t_k * E_k
struct NormKind {
    enum class Variant { l2_final, sup_l2, sup_time_weighted };
    Variant variant = Variant::l2_final;
    double t_min = 0.0;

    static NormKind final() { return {Variant::l2_final, 0.0}; }
    static NormKind sup(double t_min) { return {Variant::sup_l2, t_min}; }
    static NormKind weighted() { return {Variant::sup_time_weighted, 0.0}; }
    static NormKind by_label(const std::string& label);
    std::string label() const;
};

/// Trapezoidal approximation of the L2(Omega) error norm, exactly the
/// printed cell sums: the 1d sum runs over cells l = 1..N-1 (the first cell
/// is not included), the 2d sum over cells l,m = 1..N-1 with four-corner
/// averages. Inputs are full-grid fields (all (N+1)^d nodes, Dirichlet nodes
/// reconstituted from the boundary data).
double trapezoid_l2_error(int dim, double h, std::span<const double> numeric,
                          std::span<const double> reference);

/// convenience overload on active-dof fields of one operator
double trapezoid_l2_error(const DiscreteDiffusion& op, const ScalarField& numeric,
                          const ScalarField& reference);

double sup_norm(std::span<const std::pair<double, double>> step_errors, NormKind kind);

/// Exact global error of the CN-based splitting for u-independent sources:
///   (r(tau A)^n - e^{n tau A}) A^{-1} (A u0 + g_b + f)
/// The r-power is evaluated by n homogeneous CN steps, the exponential by the
/// Krylov flow.
ScalarField global_error_formula(const DiscreteDiffusion& op, const ScalarField& u0,
                                 const SourceTerm& f, double tau, int n,
                                 const KrylovOptions& opts = {});

/// Exact local error (r(tau A) - e^{tau A}) A^{-1} e^{t_n A} (A u0 + g_b + f)
ScalarField local_error_formula(const DiscreteDiffusion& op, const ScalarField& u0,
                                const SourceTerm& f, double tau, int n,
                                const KrylovOptions& opts = {});

/// Least-squares slope of log2(error) against log2(tau). Rows with
/// non-positive error are excluded; needs at least 2 usable rows.
double observed_order(std::span<const double> taus, std::span<const double> errors);

struct SmoothingCheckResult {
    double sup_value = 0.0;                       // sup over the whole scan
    std::vector<std::pair<int, double>> per_n;    // sup per n
    double c_frozen = 0.0;
    double max_doubling_growth = 0.0;             // max ratio across doublings, n >= 8
    bool bounded = false;
    bool growth_ok = false;
};

/// Scalar check of the smoothing estimate: S(n,tau) =
/// sup_lambda t_n |r(tau*lambda)^n - e^{n tau lambda}| / (tau^2 |lambda|)
/// over a lambda grid in (-inf, 0); asserts S <= c_frozen and that the per-n
/// sup grows at most 5% across doublings beyond n = 8.
SmoothingCheckResult smoothing_estimate_check(std::span<const double> lambdas,
                                              std::span<const double> taus,
                                              std::span<const int> ns, double c_frozen);

/// default scan grids matching the frozen constant
std::vector<double> smoothing_lambda_grid();
std::vector<int> smoothing_n_grid();
/// the frozen bound from the brute-force scan
double smoothing_frozen_constant();

struct ConvergenceTable {
    std::string method;
    NormKind norm;
    std::vector<std::pair<double, double>> rows;  // (tau, error), tau strictly decreasing

    double fitted_order() const;
    /// csv: method,norm,tau,error with 17 significant digits
    void write_csv(std::ostream& os, bool header = true) const;
};

}  // namespace splitlab
