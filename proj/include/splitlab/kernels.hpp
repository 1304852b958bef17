#pragma once

#include <cstddef>
#include <span>
#include <string_view>

namespace splitlab::kernels {

/// Function table for the dof-vector arithmetic used by the solvers.
/// Two implementations exist: a scalar reference and an AVX2+FMA variant;
/// the active one is chosen at runtime from CPU features.
struct Ops {
    const char* name;
    void (*axpy)(std::size_t n, double a, const double* x, double* y);
    void (*axpby)(std::size_t n, double a, const double* x, double b, const double* y,
                  double* out);
    void (*scal)(std::size_t n, double a, double* x);
    double (*dot)(std::size_t n, const double* x, const double* y);
    double (*diff_sumsq)(std::size_t n, const double* x, const double* y);
    void (*emadd)(std::size_t n, const double* a, const double* x, double* y);
    double (*quad_flow)(std::size_t n, double t, const double* u, double* out);
};

extern const Ops scalar_ops;
#if defined(__x86_64__) || defined(_M_X64)
extern const Ops avx2_ops;
bool avx2_available();
#endif

const Ops& active();

/// Force a backend by name ("scalar", "avx2", "auto"). Throws if unavailable.
void select_backend(std::string_view name);

// span wrappers over the dispatched table

inline void axpy(double a, std::span<const double> x, std::span<double> y) {
    active().axpy(x.size(), a, x.data(), y.data());
}

/// out = a*x + b*y  (out may alias x or y)
inline void axpby(double a, std::span<const double> x, double b, std::span<const double> y,
                  std::span<double> out) {
    active().axpby(x.size(), a, x.data(), b, y.data(), out.data());
}

inline void scal(double a, std::span<double> x) { active().scal(x.size(), a, x.data()); }

inline double dot(std::span<const double> x, std::span<const double> y) {
    return active().dot(x.size(), x.data(), y.data());
}

inline double nrm2(std::span<const double> x) {
    return active().dot(x.size(), x.data(), x.data());
}

/// sum of squared differences, sum_i (x_i - y_i)^2
inline double diff_sumsq(std::span<const double> x, std::span<const double> y) {
    return active().diff_sumsq(x.size(), x.data(), y.data());
}

/// y_i += a_i * x_i (elementwise multiply-accumulate; the band-matrix matvec primitive)
inline void emadd(std::span<const double> a, std::span<const double> x, std::span<double> y) {
    active().emadd(y.size(), a.data(), x.data(), y.data());
}

/// out_i = u_i / (1 - t*u_i); returns min_i (1 - t*u_i) so callers can detect blow-up
inline double quad_flow(double t, std::span<const double> u, std::span<double> out) {
    return active().quad_flow(u.size(), t, u.data(), out.data());
}

}  // namespace splitlab::kernels
