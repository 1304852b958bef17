#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "splitlab/experiments.hpp"

int main(int argc, char** argv) {
    CLI::App app{"splitlab - Strang splitting laboratory for diffusion-reaction problems"};

    splitlab::ExperimentSpec spec;
    std::string preset;
    app.add_option("--preset", preset,
                   "experiment preset: fig1a fig1b fig2a fig2b fig3a fig3b fig5 fig6 fig1c "
                   "bounds oracle")
        ->required();
    app.add_option("--n", spec.grid_override, "grid intervals per axis (0 = preset default)");
    app.add_option("--tau-list", spec.taus, "time steps (default 0.02*2^-k, k=0..6)")
        ->delimiter(',');
    app.add_option("--methods", spec.methods,
                   "splitting methods (default per preset); overriding disables verdicts")
        ->delimiter(',');
    app.add_option("--norms", spec.norms,
                   "norm labels: l2_final sup_l2_0 sup_l2_0.02 sup_weighted")
        ->delimiter(',');
    app.add_option("--out", spec.out_path, "CSV output path (NDJSON written alongside)");
    app.add_flag("--paper-scale", spec.paper_scale, "use the published grid sizes (N=1000 / N=100)");

    CLI11_PARSE(app, argc, argv);
    spec.preset = preset;
    return splitlab::run_experiment(spec, std::cout, std::cerr);
}
