#include "splitlab/flows.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "splitlab/kernels.hpp"

namespace splitlab {

// ---------------------------------------------------------------- SourceTerm

SourceTerm SourceTerm::constant(double c) {
    SourceTerm s;
    s.variant_ = Variant::constant;
    s.value_ = c;
    return s;
}

SourceTerm SourceTerm::space_profile(std::vector<double> f) {
    SourceTerm s;
    s.variant_ = Variant::space_profile;
    s.profile_ = std::move(f);
    return s;
}

SourceTerm SourceTerm::linear_in_u(double rate) {
    SourceTerm s;
    s.variant_ = Variant::linear_in_u;
    s.value_ = rate;
    return s;
}

SourceTerm SourceTerm::quadratic_in_u() {
    SourceTerm s;
    s.variant_ = Variant::quadratic_in_u;
    return s;
}

void SourceTerm::eval(std::span<const double> u, std::span<double> out) const {
    switch (variant_) {
        case Variant::constant:
            std::fill(out.begin(), out.end(), value_);
            break;
        case Variant::space_profile:
            if (profile_.size() != u.size())
                throw std::invalid_argument("SourceTerm: profile does not conform");
            std::copy(profile_.begin(), profile_.end(), out.begin());
            break;
        case Variant::linear_in_u:
            kernels::axpby(value_, u, 0.0, u, out);
            break;
        case Variant::quadratic_in_u:
            for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i] * u[i];
            break;
    }
}

void SourceTerm::flow(double t, std::span<double> u) const {
    switch (variant_) {
        case Variant::constant:
            for (auto& v : u) v += t * value_;
            break;
        case Variant::space_profile:
            if (profile_.size() != u.size())
                throw std::invalid_argument("SourceTerm: profile does not conform");
            kernels::axpy(t, profile_, u);
            break;
        case Variant::linear_in_u:
            kernels::scal(std::exp(value_ * t), u);
            break;
        case Variant::quadratic_in_u: {
            std::vector<double> out(u.size());
            const double dmin = kernels::quad_flow(t, u, out);
            if (dmin <= 1e-12) {
                std::size_t bad = 0;
                double worst = 1.0;
                for (std::size_t i = 0; i < u.size(); ++i) {
                    const double den = 1.0 - t * u[i];
                    if (den < worst) {
                        worst = den;
                        bad = i;
                    }
                }
                throw std::runtime_error("quadratic source flow blow-up at dof " +
                                         std::to_string(bad) + " (1 - t*u <= 1e-12)");
            }
            std::copy(out.begin(), out.end(), u.begin());
            break;
        }
    }
}

std::vector<double> SourceTerm::profile(std::size_t n) const {
    switch (variant_) {
        case Variant::constant:
            return std::vector<double>(n, value_);
        case Variant::space_profile:
            if (profile_.size() != n)
                throw std::invalid_argument("SourceTerm: profile does not conform");
            return profile_;
        default:
            throw std::logic_error("SourceTerm::profile: source depends on u");
    }
}

ScalarField source_flow_exact(const SourceTerm& f, double t, const ScalarField& u) {
    if (t < 0.0) throw std::invalid_argument("source_flow_exact: t must be >= 0");
    ScalarField out = u;
    f.flow(t, out.values);
    return out;
}

// ------------------------------------------------------- small dense helpers

namespace {

// column-major m x m dense matrix ops for the Krylov Hessenberg exponential
struct SmallDense {
    int m = 0;
    std::vector<double> a;  // column-major

    explicit SmallDense(int mm) : m(mm), a(std::size_t(mm) * mm, 0.0) {}
    double& at(int i, int j) { return a[std::size_t(j) * m + i]; }
    double at(int i, int j) const { return a[std::size_t(j) * m + i]; }
};

SmallDense small_mul(const SmallDense& x, const SmallDense& y) {
    SmallDense z(x.m);
    for (int j = 0; j < x.m; ++j)
        for (int k = 0; k < x.m; ++k) {
            const double yk = y.at(k, j);
            if (yk == 0.0) continue;
            for (int i = 0; i < x.m; ++i) z.at(i, j) += x.at(i, k) * yk;
        }
    return z;
}

// solves a X = b in place of b (partial pivoting), a destroyed
void small_solve(SmallDense& a, SmallDense& b) {
    const int m = a.m;
    for (int k = 0; k < m; ++k) {
        int p = k;
        for (int i = k + 1; i < m; ++i)
            if (std::abs(a.at(i, k)) > std::abs(a.at(p, k))) p = i;
        if (a.at(p, k) == 0.0) throw std::runtime_error("expm: singular Pade denominator");
        if (p != k)
            for (int j = 0; j < m; ++j) {
                std::swap(a.at(k, j), a.at(p, j));
                std::swap(b.at(k, j), b.at(p, j));
            }
        for (int i = k + 1; i < m; ++i) {
            const double f = a.at(i, k) / a.at(k, k);
            if (f == 0.0) continue;
            a.at(i, k) = 0.0;
            for (int j = k + 1; j < m; ++j) a.at(i, j) -= f * a.at(k, j);
            for (int j = 0; j < m; ++j) b.at(i, j) -= f * b.at(k, j);
        }
    }
    for (int j = 0; j < m; ++j)
        for (int i = m - 1; i >= 0; --i) {
            double s = b.at(i, j);
            for (int k = i + 1; k < m; ++k) s -= a.at(i, k) * b.at(k, j);
            b.at(i, j) = s / a.at(i, i);
        }
}

/// scaling-and-squaring [6/6] Pade exponential of a small dense matrix
SmallDense small_expm(SmallDense h) {
    const int m = h.m;
    double norm1 = 0.0;
    for (int j = 0; j < m; ++j) {
        double c = 0.0;
        for (int i = 0; i < m; ++i) c += std::abs(h.at(i, j));
        norm1 = std::max(norm1, c);
    }
    int squarings = 0;
    if (norm1 > 0.25) {
        squarings = std::max(0, int(std::ceil(std::log2(norm1 / 0.25))));
        const double scale = std::ldexp(1.0, -squarings);
        for (auto& v : h.a) v *= scale;
    }
    static const double c[] = {1.0, 0.5, 5.0 / 44.0, 1.0 / 66.0, 1.0 / 792.0, 1.0 / 15840.0,
                               1.0 / 665280.0};
    SmallDense h2 = small_mul(h, h);
    SmallDense even(m), odd_coeff(m);
    for (int i = 0; i < m; ++i) even.at(i, i) = c[0];
    for (int i = 0; i < m; ++i) odd_coeff.at(i, i) = c[1];
    // even part: c0 + c2 H^2 + c4 H^4 + c6 H^6 ; odd: (c1 + c3 H^2 + c5 H^4) H
    SmallDense pow = h2;
    for (int k = 1; k <= 3; ++k) {
        for (std::size_t t = 0; t < pow.a.size(); ++t) even.a[t] += c[2 * k] * pow.a[t];
        if (k < 3)
            for (std::size_t t = 0; t < pow.a.size(); ++t)
                odd_coeff.a[t] += c[2 * k + 1] * pow.a[t];
        if (k < 3) pow = small_mul(pow, h2);
    }
    SmallDense odd = small_mul(odd_coeff, h);
    SmallDense num(m), den(m);
    for (std::size_t t = 0; t < num.a.size(); ++t) {
        num.a[t] = even.a[t] + odd.a[t];
        den.a[t] = even.a[t] - odd.a[t];
    }
    small_solve(den, num);
    for (int s = 0; s < squarings; ++s) num = small_mul(num, num);
    return num;
}

}  // namespace

// ----------------------------------------------------------- Krylov expm * v

namespace {

struct KrylovStep {
    std::vector<double> result;
    double advanced = 0.0;
};

/// One restart cycle: build the subspace once, then take the largest time
/// step (halving from `want`) whose a posteriori estimate meets tol*beta.
KrylovStep krylov_cycle(const BandMatrix& A, double want, std::span<const double> v, double beta,
                        const KrylovOptions& opts) {
    const std::size_t n = v.size();
    const int mmax = std::min<int>(opts.max_subspace, int(n));
    std::vector<std::vector<double>> V;
    V.reserve(std::size_t(mmax) + 1);
    V.emplace_back(v.begin(), v.end());
    kernels::scal(1.0 / beta, V[0]);

    SmallDense H(mmax + 1);  // (m+1) x m used
    int m = 0;
    bool invariant = false;
    double hscale = 0.0;
    std::vector<double> w(n);
    for (int j = 0; j < mmax; ++j) {
        A.matvec(V[std::size_t(j)], w);
        // modified Gram-Schmidt with a second pass
        for (int pass = 0; pass < 2; ++pass)
            for (int i = 0; i <= j; ++i) {
                const double hij = kernels::dot(V[std::size_t(i)], w);
                kernels::axpy(-hij, V[std::size_t(i)], w);
                H.at(i, j) += hij;
            }
        for (int i = 0; i <= j; ++i) hscale = std::max(hscale, std::abs(H.at(i, j)));
        const double hnext = std::sqrt(kernels::nrm2(w));
        H.at(j + 1, j) = hnext;
        m = j + 1;
        if (hnext <= 1e-14 * hscale) {
            invariant = true;
            break;
        }
        hscale = std::max(hscale, hnext);
        V.emplace_back(w);
        kernels::scal(1.0 / hnext, V.back());
    }

    double h = want;
    for (;;) {
        SmallDense Hm(m);
        for (int j = 0; j < m; ++j)
            for (int i = 0; i < m; ++i) Hm.at(i, j) = h * H.at(i, j);
        SmallDense F = small_expm(std::move(Hm));
        const double est = invariant ? 0.0 : beta * H.at(m, m - 1) * std::abs(F.at(m - 1, 0)) * h;
        if (est <= opts.tol * beta || h <= want * 0x1p-40) {
            if (h <= want * 0x1p-40 && est > opts.tol * beta)
                throw std::runtime_error("expm_times_vector: no convergence within restart budget");
            KrylovStep out;
            out.advanced = h;
            out.result.assign(n, 0.0);
            for (int i = 0; i < m; ++i)
                kernels::axpy(beta * F.at(i, 0), V[std::size_t(i)], out.result);
            return out;
        }
        h *= 0.5;
    }
}

}  // namespace

std::vector<double> expm_times_vector(const BandMatrix& A, double t, std::span<const double> v,
                                      const KrylovOptions& opts) {
    if (t < 0.0) throw std::invalid_argument("expm_times_vector: t must be >= 0");
    std::vector<double> x(v.begin(), v.end());
    if (t == 0.0) return x;
    double remaining = t;
    int substeps = 0;
    while (remaining > 0.0) {
        const double beta = std::sqrt(kernels::nrm2(x));
        if (beta == 0.0) break;
        KrylovStep step = krylov_cycle(A, remaining, x, beta, opts);
        x = std::move(step.result);
        remaining -= step.advanced;
        if (remaining < 1e-15 * t) remaining = 0.0;
        if (++substeps > opts.max_substeps)
            throw std::runtime_error("expm_times_vector: substep budget exhausted");
    }
    return x;
}

// ------------------------------------------------------------ step functions

namespace {

BandMatrix shifted_matrix(const DiscreteDiffusion& op, double sigma) {
    BandMatrix m = op.matrix().scaled(-sigma);
    m.add_scaled(1.0, BandMatrix::identity(op.active_dofs()));
    return m;
}

}  // namespace

ScalarField diffusion_step_cn(const DiscreteDiffusion& op, double tau, const ScalarField& u) {
    if (tau <= 0.0) throw std::invalid_argument("diffusion_step_cn: tau must be positive");
    ScalarField rhs = u;
    kernels::axpy(tau / 2.0, op.boundary_load(), rhs.values);
    ScalarField v = shifted_solve(op, tau / 2.0, rhs);
    kernels::axpby(2.0, v.values, -1.0, u.values, v.values);
    return v;
}

ScalarField diffusion_step_cn_stage_form(const DiscreteDiffusion& op, double tau,
                                         const ScalarField& u) {
    if (tau <= 0.0) throw std::invalid_argument("diffusion_step_cn_stage_form: tau > 0 required");
    const std::size_t n = u.size();
    ScalarField k1 = apply_D(op, u);
    ScalarField stage(n);
    kernels::axpby(1.0, u.values, tau / 2.0, k1.values, stage.values);
    ScalarField rhs = apply_D(op, stage);
    ScalarField k2 = shifted_solve(op, tau / 2.0, rhs);
    ScalarField out = u;
    kernels::axpy(tau / 2.0, k1.values, out.values);
    kernels::axpy(tau / 2.0, k2.values, out.values);
    return out;
}

ScalarField diffusion_step_rational(const DiscreteDiffusion& op, const StabilityFunction& R,
                                    double tau, const ScalarField& u) {
    ScalarField wstar = steady_state(op);
    ScalarField dev(u.size());
    kernels::axpby(1.0, u.values, -1.0, wstar.values, dev.values);
    ScalarField prop = apply_to_operator(R, tau, op, dev);
    kernels::axpy(1.0, prop.values, wstar.values);
    return wstar;
}

ScalarField diffusion_flow_exact(const DiscreteDiffusion& op, double t, const ScalarField& u,
                                 const KrylovOptions& opts) {
    if (t < 0.0) throw std::invalid_argument("diffusion_flow_exact: t must be >= 0");
    if (int(u.size()) != op.active_dofs())
        throw std::invalid_argument("diffusion_flow_exact: dof mismatch");
    ScalarField wstar = steady_state(op);
    std::vector<double> dev(u.size());
    kernels::axpby(1.0, u.values, -1.0, wstar.values, dev);
    std::vector<double> prop = expm_times_vector(op.matrix(), t, dev, opts);
    kernels::axpy(1.0, prop, wstar.values);
    return wstar;
}

// --------------------------------------------------------- DiffusionStepper

struct DiffusionStepper::Impl {
    const DiscreteDiffusion& op;
    DiffusionPropagator prop;
    double tau;
    std::optional<BandLU> half_lu;              // (I - tau/2 A) for the CN forms
    std::optional<RationalApplier> rational;
    std::vector<double> wstar;

    Impl(const DiscreteDiffusion& o, const DiffusionPropagator& p, double t)
        : op(o), prop(p), tau(t) {
        using Kind = DiffusionPropagator::Kind;
        switch (prop.kind) {
            case Kind::cn_two_solve:
            case Kind::cn_stage_form:
                half_lu.emplace(shifted_matrix(op, tau / 2.0));
                break;
            case Kind::rational:
                rational.emplace(prop.rational, tau, op);
                wstar = steady_state(op).values;
                break;
            case Kind::exact_krylov:
                wstar = steady_state(op).values;
                break;
        }
    }

    void step(std::vector<double>& u) const {
        using Kind = DiffusionPropagator::Kind;
        const std::size_t n = u.size();
        switch (prop.kind) {
            case Kind::cn_two_solve: {
                std::vector<double> v(n);
                kernels::axpby(1.0, u, tau / 2.0, op.boundary_load(), v);
                half_lu->solve_inplace(v);
                kernels::axpby(2.0, v, -1.0, u, u);
                break;
            }
            case Kind::cn_stage_form: {
                std::vector<double> k1(n), k2(n), stage(n);
                op.matrix().matvec(u, k1);
                kernels::axpy(1.0, op.boundary_load(), k1);
                kernels::axpby(1.0, u, tau / 2.0, k1, stage);
                op.matrix().matvec(stage, k2);
                kernels::axpy(1.0, op.boundary_load(), k2);
                half_lu->solve_inplace(k2);
                kernels::axpy(tau / 2.0, k1, u);
                kernels::axpy(tau / 2.0, k2, u);
                break;
            }
            case Kind::rational: {
                std::vector<double> dev(n);
                kernels::axpby(1.0, u, -1.0, wstar, dev);
                std::vector<double> prop_dev = rational->apply(dev);
                kernels::axpby(1.0, wstar, 1.0, prop_dev, u);
                break;
            }
            case Kind::exact_krylov: {
                std::vector<double> dev(n);
                kernels::axpby(1.0, u, -1.0, wstar, dev);
                std::vector<double> prop_dev =
                    expm_times_vector(op.matrix(), tau, dev, prop.krylov);
                kernels::axpby(1.0, wstar, 1.0, prop_dev, u);
                break;
            }
        }
    }
};

DiffusionStepper::DiffusionStepper(const DiscreteDiffusion& op, const DiffusionPropagator& prop,
                                   double tau)
    : impl_(std::make_unique<Impl>(op, prop, tau)) {
    if (tau <= 0.0) throw std::invalid_argument("DiffusionStepper: tau must be positive");
}

DiffusionStepper::~DiffusionStepper() = default;
DiffusionStepper::DiffusionStepper(DiffusionStepper&&) noexcept = default;

void DiffusionStepper::step(std::vector<double>& u) const { impl_->step(u); }

}  // namespace splitlab
