#pragma once

#include <functional>
#include <string>
#include <vector>

#include "splitlab/flows.hpp"
#include "splitlab/grid.hpp"

namespace splitlab {

enum class CompositionOrder { fdf, dfd };

/// A Strang composition: source-diffusion-source (fdf) or its mirror, with a
/// configurable diffusion propagator.
///   fdf: u <- phi^f_{tau/2} o Phi^D_tau o phi^f_{tau/2} (u)
///   dfd: u <- Phi^D_{tau/2} o phi^f_tau o Phi^D_{tau/2} (u)
struct SplittingMethod {
    std::string name;
    CompositionOrder order = CompositionOrder::fdf;
    DiffusionPropagator propagator;

    static SplittingMethod strang_cn();
    static SplittingMethod strang_cn_stage_form();  // same composition, stage-form CN
    static SplittingMethod strang_exp(KrylovOptions opts = {});
    static SplittingMethod strang_gauss();
    static SplittingMethod strang_radau();
    static SplittingMethod strang_lobatto();
    // dfd mirrors (suffix 2)
    static SplittingMethod strang_cn2();
    static SplittingMethod strang_exp2(KrylovOptions opts = {});
    static SplittingMethod strang_gauss2();
    static SplittingMethod strang_radau2();
    static SplittingMethod strang_lobatto2();

    /// lookup by the published method name ("StrangCN", "StrangEXP2", ...)
    static SplittingMethod by_name(const std::string& name);
    static std::vector<std::string> known_names();
};

struct Problem {
    DiscreteDiffusion op;
    SourceTerm source;
    ScalarField initial;
    double final_time = 0.1;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<ScalarField> states;
    double tau = 0.0;
    int n_steps = 0;
};

using StepObserver = std::function<void(int step, double t, const ScalarField&)>;

/// One Strang step from state u
ScalarField strang_step(const SplittingMethod& m, const Problem& p, double tau,
                        const ScalarField& u);

/// Fixed-step integration from p.initial; the observer sees every (t_n, u_n)
/// including the initial state. Aborts on the first sub-step failure,
/// reporting the step index.
Trajectory integrate(const SplittingMethod& m, const Problem& p, double tau, int n_steps,
                     const StepObserver& observer = {});

}  // namespace splitlab
