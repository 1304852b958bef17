#pragma once

#include <span>
#include <vector>

namespace splitlab {

/// Square sparse matrix stored by diagonals. diagonal(off)[i] holds the entry
/// (i, i+off); positions where i+off falls outside [0,n) are kept at zero.
/// This fits every operator in this project (tridiagonal in 1d, five-point in
/// 2d on a rectangular active grid, and their polynomials) and makes the
/// matvec a sequence of shifted elementwise multiply-accumulates.
class BandMatrix {
public:
    explicit BandMatrix(int n);
    static BandMatrix identity(int n);

    int size() const { return n_; }
    void add(int i, int j, double v);
    double coeff(int i, int j) const;

    std::span<const int> offsets() const { return offsets_; }
    std::span<const double> diagonal(int off) const;

    /// y = A x
    void matvec(std::span<const double> x, std::span<double> y) const;

    /// this += alpha * other
    void add_scaled(double alpha, const BandMatrix& other);
    BandMatrix scaled(double alpha) const;
    BandMatrix times(const BandMatrix& other) const;

    bool is_symmetric(double tol = 0.0) const;
    int lower_bandwidth() const;
    int upper_bandwidth() const;

    /// row-major dense copy, for tests and oracles at small n
    std::vector<double> to_dense() const;

private:
    std::vector<double>& diag_for(int off);
    int n_;
    std::vector<int> offsets_;                // sorted ascending
    std::vector<std::vector<double>> diags_;  // diags_[k][i] = A(i, i + offsets_[k])
};

/// LU factorization of a band matrix with partial pivoting (LAPACK-style band
/// scheme: pivoting widens the upper band by the lower bandwidth).
class BandLU {
public:
    explicit BandLU(const BandMatrix& a);

    void solve_inplace(std::span<double> b) const;
    std::vector<double> solve(std::span<const double> b) const;

private:
    double& at(int i, int j) { return work_[std::size_t(i) * width_ + (j - i + kl_)]; }
    double at(int i, int j) const { return work_[std::size_t(i) * width_ + (j - i + kl_)]; }
    int n_, kl_, ku_, width_;
    std::vector<double> work_;   // row i covers columns [i-kl, i+ku+kl]
    std::vector<int> pivots_;
};

}  // namespace splitlab
