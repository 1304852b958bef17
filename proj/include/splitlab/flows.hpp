#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "splitlab/grid.hpp"
#include "splitlab/stability.hpp"

namespace splitlab {

/// Tagged source term f with a closed-form exact flow. The four variants are
/// the ones actually appearing in the experiments.
class SourceTerm {
public:
    enum class Variant { constant, space_profile, linear_in_u, quadratic_in_u };

    static SourceTerm constant(double c);
    static SourceTerm space_profile(std::vector<double> f);
    static SourceTerm linear_in_u(double rate);
    static SourceTerm quadratic_in_u();

    Variant variant() const { return variant_; }
    bool depends_on_u() const {
        return variant_ == Variant::linear_in_u || variant_ == Variant::quadratic_in_u;
    }

    /// f evaluated at u
    void eval(std::span<const double> u, std::span<double> out) const;

    /// in-place exact flow of du/dt = f(u) over time t; throws on quadratic
    /// blow-up (reports the offending dof)
    void flow(double t, std::span<double> u) const;

    /// the fixed f-vector for u-independent variants, sized for n dofs
    std::vector<double> profile(std::size_t n) const;

private:
    Variant variant_;
    double value_ = 0.0;            // constant c or linear rate a
    std::vector<double> profile_;   // space_profile samples
};

struct KrylovOptions {
    double tol = 1e-13;      // relative a posteriori target
    int max_subspace = 60;
    int max_substeps = 100000;
};

/// Diffusion propagator configuration for one Strang sub-step.
struct DiffusionPropagator {
    enum class Kind { cn_two_solve, cn_stage_form, rational, exact_krylov };
    Kind kind = Kind::cn_two_solve;
    StabilityFunction rational;  // used when kind == rational
    KrylovOptions krylov;        // used when kind == exact_krylov

    static DiffusionPropagator crank_nicolson() { return {Kind::cn_two_solve, {}, {}}; }
    static DiffusionPropagator crank_nicolson_stage_form() { return {Kind::cn_stage_form, {}, {}}; }
    static DiffusionPropagator from_stability(StabilityFunction r) {
        return {Kind::rational, std::move(r), {}};
    }
    static DiffusionPropagator exact(KrylovOptions opts = {}) {
        return {Kind::exact_krylov, {}, opts};
    }
};

/// phi^f_t(u): exact flow of the source sub-problem
ScalarField source_flow_exact(const SourceTerm& f, double t, const ScalarField& u);

/// One Crank-Nicolson step of du/dt = A u + g_b via the single-solve form
/// v = (I - tau/2 A)^{-1}(u + (tau/2) g_b), u1 = 2v - u.
ScalarField diffusion_step_cn(const DiscreteDiffusion& op, double tau, const ScalarField& u);

/// Algebraically identical stage form k1 = A u + g_b,
/// (I - (tau/2)A) k2 = A(u + (tau/2)k1) + g_b, u1 = u + (tau/2)(k1+k2);
/// preferred for stationary runs where the update should vanish exactly.
ScalarField diffusion_step_cn_stage_form(const DiscreteDiffusion& op, double tau,
                                         const ScalarField& u);

/// w* + R(tau A)(u - w*) for a degree <= 2 preset
ScalarField diffusion_step_rational(const DiscreteDiffusion& op, const StabilityFunction& R,
                                    double tau, const ScalarField& u);

/// w* + e^{tA}(u - w*) with the exponential-times-vector computed by a
/// Krylov method (restarted by time substeps).
ScalarField diffusion_flow_exact(const DiscreteDiffusion& op, double t, const ScalarField& u,
                                 const KrylovOptions& opts = {});

/// e^{tA} v for the plain linear semigroup (no boundary lifting). Arnoldi
/// with a second orthogonalization pass; on symmetric A this is Lanczos with
/// full reorthogonalization.
std::vector<double> expm_times_vector(const BandMatrix& A, double t, std::span<const double> v,
                                      const KrylovOptions& opts = {});

/// Reusable stepper bound to (op, propagator, tau); caches factorizations
/// and the affine fixed point across steps.
class DiffusionStepper {
public:
    DiffusionStepper(const DiscreteDiffusion& op, const DiffusionPropagator& prop, double tau);
    ~DiffusionStepper();
    DiffusionStepper(DiffusionStepper&&) noexcept;

    void step(std::vector<double>& u) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace splitlab
