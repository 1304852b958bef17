#include "splitlab/kernels.hpp"

namespace splitlab::kernels {
namespace {

void axpy_s(std::size_t n, double a, const double* x, double* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void axpby_s(std::size_t n, double a, const double* x, double b, const double* y, double* out) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

void scal_s(std::size_t n, double a, double* x) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

double dot_s(std::size_t n, const double* x, const double* y) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
}

double diff_sumsq_s(std::size_t n, const double* x, const double* y) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = x[i] - y[i];
        s += d * d;
    }
    return s;
}

void emadd_s(std::size_t n, const double* a, const double* x, double* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a[i] * x[i];
}

double quad_flow_s(std::size_t n, double t, const double* u, double* out) {
    double dmin = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double den = 1.0 - t * u[i];
        if (den < dmin) dmin = den;
        out[i] = u[i] / den;
    }
    return dmin;
}

}  // namespace

const Ops scalar_ops = {"scalar", axpy_s,       axpby_s, scal_s,
                        dot_s,    diff_sumsq_s, emadd_s, quad_flow_s};

}  // namespace splitlab::kernels
