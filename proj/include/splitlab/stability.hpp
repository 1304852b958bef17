#pragma once

#include <complex>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "splitlab/grid.hpp"

namespace splitlab {

/// Rational stability function R = P/Q with real polynomial coefficients in
/// ascending degree. All presets satisfy R(0) = 1 and are A-stable.
struct StabilityFunction {
    std::string name;
    std::vector<double> num;  // P
    std::vector<double> den;  // Q

    std::complex<double> eval(std::complex<double> z) const;
    double eval_real(double y) const;
    int degree() const;

    // (1,1)-Pade, r(y) = (1+y/2)/(1-y/2)
    static const StabilityFunction& crank_nicolson();
    // r0(y) = 1/(1-y)
    static const StabilityFunction& implicit_euler();
    static const StabilityFunction& gauss2();
    static const StabilityFunction& radau1a2();
    static const StabilityFunction& lobatto3c2();
    static const StabilityFunction& identity();  // P = Q = 1
    static std::span<const StabilityFunction* const> presets();
};

struct BoundCheckRecord {
    std::string check;
    double z_re = 0, z_im = 0;
    double lhs = 0, rhs = 0;
    bool pass = true;
};

struct BoundReport {
    std::vector<BoundCheckRecord> records;
    int failures() const;
    void write_ndjson(std::ostream& os) const;
};

/// Verifies r(z)+1 = 2/(1-z/2), r(z)-1 = z/(1-z/2) and
/// r(z)-e^z = (z/2)(r(z)+1) - (e^z - 1) at each sample, to relative 1e-13.
BoundReport check_lemma_identities(std::span<const std::complex<double>> samples);

/// Scalar inequalities behind the smoothing estimate, checked at each sample
/// with Re z <= 0:
///   |r(z)-e^z|        <= (5/12)|z|^3                  for |z| <= 1
///   |r(z)|            <= max(e^{0.8 Re z}, e^{0.8 Re z/|z|^2})   (proof form)
///   |r0(z/2)-e^{z/2}| <= (3/8)|z|^2,  |r0(z/2)^2-e^z| <= (6/8)|z|^2  for |z| <= 1
///   r(-x)             <= e^{-x}                        for real x >= 0
/// The printed max(e^{0.8 Re z}, e^{0.8/Re z}) variant is recorded per sample
/// as well (it only holds on the negative real axis) but does not gate.
BoundReport check_appendix_bounds(std::span<const std::complex<double>> samples);

/// Quadrature check of the two integral estimates used by the smoothing
/// proof; asserts the integrals stay below frozen constants for
/// y in {1,10,...,1e6}, k in {1,2,3}.
BoundReport check_integral_estimates();

/// Random left-half-plane samples with |z| <= radius (always includes 0, -1
/// and points on both axes).
std::vector<std::complex<double>> left_half_plane_samples(std::size_t count, double radius,
                                                          unsigned seed);

/// Ray samples z = -rho e^{+-i alpha} covering |z| <= 1 and |z| > 1.
std::vector<std::complex<double>> ray_samples(std::size_t per_ray);

/// Q(tau A)^{-1} P(tau A) v with the denominator matrix assembled explicitly;
/// presets are at most degree 2.
ScalarField apply_to_operator(const StabilityFunction& R, double tau,
                              const DiscreteDiffusion& op, const ScalarField& v);

/// Caches w*, the assembled Q(tau A) factorization and P coefficients for
/// repeated rational steps at a fixed tau.
class RationalApplier {
public:
    RationalApplier(const StabilityFunction& R, double tau, const DiscreteDiffusion& op);

    /// y = Q(tau A)^{-1} P(tau A) x
    std::vector<double> apply(std::span<const double> x) const;

private:
    const BandMatrix* A_;
    std::vector<double> num_;
    double tau_;
    BandLU qlu_;
};

}  // namespace splitlab
