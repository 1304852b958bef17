#include "splitlab/analysis.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "splitlab/kernels.hpp"
#include "splitlab/stability.hpp"

namespace splitlab {

NormKind NormKind::by_label(const std::string& label) {
    if (label == "l2_final") return final();
    if (label == "sup_l2_0") return sup(0.0);
    if (label == "sup_l2_0.02") return sup(0.02);
    if (label == "sup_weighted") return weighted();
    throw std::invalid_argument("unknown norm label: " + label);
}

std::string NormKind::label() const {
    switch (variant) {
        case Variant::l2_final:
            return "l2_final";
        case Variant::sup_l2: {
            if (t_min == 0.0) return "sup_l2_0";
            char buf[32];
            std::snprintf(buf, sizeof buf, "sup_l2_%g", t_min);
            return buf;
        }
        case Variant::sup_time_weighted:
            return "sup_weighted";
    }
    return "?";
}

double trapezoid_l2_error(int dim, double h, std::span<const double> numeric,
                          std::span<const double> reference) {
    if (numeric.size() != reference.size())
        throw std::invalid_argument("trapezoid_l2_error: size mismatch");
    if (dim == 1) {
        const int N = int(numeric.size()) - 1;
        // h * sum_{l=1}^{N-1} (d_l^2 + d_{l+1}^2)/2
        //   = h * (d_1^2/2 + d_2^2 + ... + d_{N-1}^2 + d_N^2/2)
        double s = kernels::diff_sumsq(numeric.subspan(1), reference.subspan(1));
        const double d1 = numeric[1] - reference[1];
        const double dN = numeric[std::size_t(N)] - reference[std::size_t(N)];
        s -= 0.5 * (d1 * d1 + dN * dN);
        return std::sqrt(h * s);
    }
    if (dim == 2) {
        const int P = int(std::lround(std::sqrt(double(numeric.size()))));
        if (std::size_t(P) * P != numeric.size())
            throw std::invalid_argument("trapezoid_l2_error: 2d field is not square");
        const int N = P - 1;
        // four-corner cell averages over cells l,m = 1..N-1: tensor weights
        // (1/2, 1, ..., 1, 1/2) per axis on nodes 1..N
        double s = 0.0;
        for (int m = 1; m <= N; ++m) {
            const std::size_t row = std::size_t(m) * P;
            double rs = kernels::diff_sumsq(numeric.subspan(row + 1, std::size_t(N)),
                                            reference.subspan(row + 1, std::size_t(N)));
            const double d1 = numeric[row + 1] - reference[row + 1];
            const double dN = numeric[row + std::size_t(N)] - reference[row + std::size_t(N)];
            rs -= 0.5 * (d1 * d1 + dN * dN);
            s += (m == 1 || m == N) ? 0.5 * rs : rs;
        }
        return std::sqrt(h * h * s);
    }
    throw std::invalid_argument("trapezoid_l2_error: dim must be 1 or 2");
}

double trapezoid_l2_error(const DiscreteDiffusion& op, const ScalarField& numeric,
                          const ScalarField& reference) {
    const auto fn = op.to_full_grid(numeric);
    const auto fr = op.to_full_grid(reference);
    return trapezoid_l2_error(op.grid().dimension, op.grid().spacing(), fn, fr);
}

double sup_norm(std::span<const std::pair<double, double>> step_errors, NormKind kind) {
    if (step_errors.empty()) throw std::invalid_argument("sup_norm: empty trajectory");
    switch (kind.variant) {
        case NormKind::Variant::l2_final:
            return step_errors.back().second;
        case NormKind::Variant::sup_l2: {
            double best = -1.0;
            const double cutoff = kind.t_min * (1.0 - 1e-12);
            for (const auto& [t, e] : step_errors)
                if (t >= cutoff && e > best) best = e;
            if (best < 0.0) throw std::invalid_argument("sup_norm: empty index range (t_min > T)");
            return best;
        }
        case NormKind::Variant::sup_time_weighted: {
            double best = 0.0;
            for (const auto& [t, e] : step_errors) best = std::max(best, t * e);
            return best;
        }
    }
    throw std::logic_error("sup_norm: bad kind");
}

namespace {

std::vector<double> rhs_du0_plus_f(const DiscreteDiffusion& op, const ScalarField& u0,
                                   const SourceTerm& f) {
    if (f.depends_on_u())
        throw std::invalid_argument("error formulas need a u-independent source");
    ScalarField d = apply_D(op, u0);
    const auto fv = f.profile(d.size());
    kernels::axpy(1.0, fv, d.values);
    return std::move(d.values);
}

/// one homogeneous CN step x <- r(tau A) x through the cached half solve
void cn_power_step(const BandLU& half_lu, std::span<double> x, std::vector<double>& scratch) {
    scratch.assign(x.begin(), x.end());
    half_lu.solve_inplace(scratch);
    kernels::axpby(2.0, scratch, -1.0, x, x);
}

BandLU half_shift_lu(const DiscreteDiffusion& op, double tau) {
    BandMatrix m = op.matrix().scaled(-tau / 2.0);
    m.add_scaled(1.0, BandMatrix::identity(op.active_dofs()));
    return BandLU(m);
}

}  // namespace

ScalarField global_error_formula(const DiscreteDiffusion& op, const ScalarField& u0,
                                 const SourceTerm& f, double tau, int n,
                                 const KrylovOptions& opts) {
    if (n < 0) throw std::invalid_argument("global_error_formula: n must be >= 0");
    std::vector<double> s = rhs_du0_plus_f(op, u0, f);
    BandLU alu(op.matrix());
    alu.solve_inplace(s);  // s = A^{-1}(D u0 + f)
    ScalarField out(s.size());
    if (n == 0) return out;

    std::vector<double> power = s, scratch;
    const BandLU half = half_shift_lu(op, tau);
    for (int k = 0; k < n; ++k) cn_power_step(half, power, scratch);
    std::vector<double> expo = expm_times_vector(op.matrix(), n * tau, s, opts);
    kernels::axpby(1.0, power, -1.0, expo, out.values);
    return out;
}

ScalarField local_error_formula(const DiscreteDiffusion& op, const ScalarField& u0,
                                const SourceTerm& f, double tau, int n,
                                const KrylovOptions& opts) {
    if (n < 0) throw std::invalid_argument("local_error_formula: n must be >= 0");
    std::vector<double> s = rhs_du0_plus_f(op, u0, f);
    BandLU alu(op.matrix());
    alu.solve_inplace(s);
    std::vector<double> y = n == 0 ? s : expm_times_vector(op.matrix(), n * tau, s, opts);

    std::vector<double> ry = y, scratch;
    const BandLU half = half_shift_lu(op, tau);
    cn_power_step(half, ry, scratch);
    std::vector<double> ey = expm_times_vector(op.matrix(), tau, y, opts);
    ScalarField out(y.size());
    kernels::axpby(1.0, ry, -1.0, ey, out.values);
    return out;
}

double observed_order(std::span<const double> taus, std::span<const double> errors) {
    if (taus.size() != errors.size()) throw std::invalid_argument("observed_order: size mismatch");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (std::size_t i = 0; i < taus.size(); ++i) {
        if (!(errors[i] > 0.0)) continue;  // zero errors excluded from the fit
        const double x = std::log2(taus[i]);
        const double y = std::log2(errors[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    if (m < 2) throw std::invalid_argument("observed_order: fewer than 2 usable rows");
    const double denom = m * sxx - sx * sx;
    if (denom == 0.0) throw std::invalid_argument("observed_order: degenerate tau set");
    return (m * sxy - sx * sy) / denom;
}

SmoothingCheckResult smoothing_estimate_check(std::span<const double> lambdas,
                                              std::span<const double> taus,
                                              std::span<const int> ns, double c_frozen) {
    const auto& r = StabilityFunction::crank_nicolson();
    SmoothingCheckResult res;
    res.c_frozen = c_frozen;
    for (const int n : ns) {
        if (n < 3) throw std::invalid_argument("smoothing_estimate_check: needs n >= 3");
        double best = 0.0;
        for (const double tau : taus) {
            for (const double lam : lambdas) {
                if (!(lam < 0.0)) continue;
                const double y = tau * lam;
                const double rn = std::pow(r.eval_real(y), n);
                const double en = std::exp(double(n) * y);
                const double val = double(n) * std::abs(rn - en) / std::abs(y);
                if (val > best) best = val;
            }
        }
        res.per_n.emplace_back(n, best);
        res.sup_value = std::max(res.sup_value, best);
    }
    res.bounded = res.sup_value <= c_frozen;
    res.max_doubling_growth = 0.0;
    for (std::size_t i = 0; i + 1 < res.per_n.size(); ++i) {
        const auto [n0, v0] = res.per_n[i];
        const auto [n1, v1] = res.per_n[i + 1];
        if (n0 >= 8 && n1 == 2 * n0 && v0 > 0.0)
            res.max_doubling_growth = std::max(res.max_doubling_growth, v1 / v0);
    }
    res.growth_ok = res.max_doubling_growth <= 1.05;
    return res;
}

std::vector<double> smoothing_lambda_grid() {
    std::vector<double> lams;
    const int count = 601;
    for (int i = 0; i < count; ++i)
        lams.push_back(-std::pow(10.0, -2.0 + 10.0 * double(i) / double(count - 1)));
    return lams;
}

std::vector<int> smoothing_n_grid() {
    return {3, 4, 6, 8, 16, 32, 64, 128, 256, 512, 1024, 2048};
}

double smoothing_frozen_constant() { return 0.095; }

double ConvergenceTable::fitted_order() const {
    std::vector<double> t, e;
    for (const auto& [tau, err] : rows) {
        t.push_back(tau);
        e.push_back(err);
    }
    return observed_order(t, e);
}

void ConvergenceTable::write_csv(std::ostream& os, bool header) const {
    if (header) os << "method,norm,tau,error\n";
    char buf[128];
    for (const auto& [tau, err] : rows) {
        std::snprintf(buf, sizeof buf, "%s,%s,%.17g,%.17g\n", method.c_str(),
                      norm.label().c_str(), tau, err);
        os << buf;
    }
}

}  // namespace splitlab
