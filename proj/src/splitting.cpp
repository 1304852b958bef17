#include "splitlab/splitting.hpp"

#include <stdexcept>

namespace splitlab {

SplittingMethod SplittingMethod::strang_cn() {
    return {"StrangCN", CompositionOrder::fdf, DiffusionPropagator::crank_nicolson()};
}

SplittingMethod SplittingMethod::strang_cn_stage_form() {
    return {"StrangCN", CompositionOrder::fdf, DiffusionPropagator::crank_nicolson_stage_form()};
}

SplittingMethod SplittingMethod::strang_exp(KrylovOptions opts) {
    return {"StrangEXP", CompositionOrder::fdf, DiffusionPropagator::exact(opts)};
}

SplittingMethod SplittingMethod::strang_gauss() {
    return {"StrangGauss", CompositionOrder::fdf,
            DiffusionPropagator::from_stability(StabilityFunction::gauss2())};
}

SplittingMethod SplittingMethod::strang_radau() {
    return {"StrangRadau", CompositionOrder::fdf,
            DiffusionPropagator::from_stability(StabilityFunction::radau1a2())};
}

SplittingMethod SplittingMethod::strang_lobatto() {
    return {"StrangLobatto", CompositionOrder::fdf,
            DiffusionPropagator::from_stability(StabilityFunction::lobatto3c2())};
}

SplittingMethod SplittingMethod::strang_cn2() {
    return {"StrangCN2", CompositionOrder::dfd, DiffusionPropagator::crank_nicolson()};
}

SplittingMethod SplittingMethod::strang_exp2(KrylovOptions opts) {
    return {"StrangEXP2", CompositionOrder::dfd, DiffusionPropagator::exact(opts)};
}

SplittingMethod SplittingMethod::strang_gauss2() {
    return {"StrangGauss2", CompositionOrder::dfd,
            DiffusionPropagator::from_stability(StabilityFunction::gauss2())};
}

SplittingMethod SplittingMethod::strang_radau2() {
    return {"StrangRadau2", CompositionOrder::dfd,
            DiffusionPropagator::from_stability(StabilityFunction::radau1a2())};
}

SplittingMethod SplittingMethod::strang_lobatto2() {
    return {"StrangLobatto2", CompositionOrder::dfd,
            DiffusionPropagator::from_stability(StabilityFunction::lobatto3c2())};
}

SplittingMethod SplittingMethod::by_name(const std::string& name) {
    if (name == "StrangCN") return strang_cn();
    if (name == "StrangCNStage") return strang_cn_stage_form();
    if (name == "StrangEXP") return strang_exp();
    if (name == "StrangGauss") return strang_gauss();
    if (name == "StrangRadau") return strang_radau();
    if (name == "StrangLobatto") return strang_lobatto();
    if (name == "StrangCN2") return strang_cn2();
    if (name == "StrangEXP2") return strang_exp2();
    if (name == "StrangGauss2") return strang_gauss2();
    if (name == "StrangRadau2") return strang_radau2();
    if (name == "StrangLobatto2") return strang_lobatto2();
    throw std::invalid_argument("unknown splitting method: " + name);
}

std::vector<std::string> SplittingMethod::known_names() {
    return {"StrangCN",  "StrangCNStage", "StrangEXP",    "StrangGauss",  "StrangRadau",
            "StrangLobatto", "StrangCN2", "StrangEXP2",   "StrangGauss2", "StrangRadau2",
            "StrangLobatto2"};
}

namespace {

void check_conforming(const Problem& p, const ScalarField& u) {
    if (int(u.size()) != p.op.active_dofs())
        throw std::invalid_argument("strang_step: field does not conform to operator");
}

}  // namespace

ScalarField strang_step(const SplittingMethod& m, const Problem& p, double tau,
                        const ScalarField& u) {
    if (tau <= 0.0) throw std::invalid_argument("strang_step: tau must be positive");
    check_conforming(p, u);
    ScalarField state = u;
    if (m.order == CompositionOrder::fdf) {
        DiffusionStepper diff(p.op, m.propagator, tau);
        p.source.flow(tau / 2.0, state.values);
        diff.step(state.values);
        p.source.flow(tau / 2.0, state.values);
    } else {
        DiffusionStepper diff(p.op, m.propagator, tau / 2.0);
        diff.step(state.values);
        p.source.flow(tau, state.values);
        diff.step(state.values);
    }
    return state;
}

Trajectory integrate(const SplittingMethod& m, const Problem& p, double tau, int n_steps,
                     const StepObserver& observer) {
    if (tau <= 0.0) throw std::invalid_argument("integrate: tau must be positive");
    if (n_steps < 1) throw std::invalid_argument("integrate: n_steps must be >= 1");
    check_conforming(p, p.initial);

    const bool fdf = m.order == CompositionOrder::fdf;
    DiffusionStepper diff(p.op, m.propagator, fdf ? tau : tau / 2.0);

    Trajectory traj;
    traj.tau = tau;
    traj.n_steps = n_steps;
    traj.times.reserve(std::size_t(n_steps) + 1);
    traj.states.reserve(std::size_t(n_steps) + 1);

    ScalarField state = p.initial;
    traj.times.push_back(0.0);
    traj.states.push_back(state);
    if (observer) observer(0, 0.0, state);

    for (int k = 0; k < n_steps; ++k) {
        try {
            if (fdf) {
                p.source.flow(tau / 2.0, state.values);
                diff.step(state.values);
                p.source.flow(tau / 2.0, state.values);
            } else {
                diff.step(state.values);
                p.source.flow(tau, state.values);
                diff.step(state.values);
            }
        } catch (const std::exception& e) {
            throw std::runtime_error("integrate: step " + std::to_string(k + 1) +
                                     " failed: " + e.what());
        }
        const double t = (k + 1) * tau;
        traj.times.push_back(t);
        traj.states.push_back(state);
        if (observer) observer(k + 1, t, state);
    }
    return traj;
}

}  // namespace splitlab
