#include "splitlab/band_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "splitlab/kernels.hpp"

namespace splitlab {

BandMatrix::BandMatrix(int n) : n_(n) {
    if (n <= 0) throw std::invalid_argument("BandMatrix: n must be positive");
}

BandMatrix BandMatrix::identity(int n) {
    BandMatrix m(n);
    auto& d = m.diag_for(0);
    std::fill(d.begin(), d.end(), 1.0);
    return m;
}

std::vector<double>& BandMatrix::diag_for(int off) {
    auto it = std::lower_bound(offsets_.begin(), offsets_.end(), off);
    if (it != offsets_.end() && *it == off) return diags_[std::size_t(it - offsets_.begin())];
    const auto pos = it - offsets_.begin();
    offsets_.insert(it, off);
    diags_.insert(diags_.begin() + pos, std::vector<double>(n_, 0.0));
    return diags_[std::size_t(pos)];
}

void BandMatrix::add(int i, int j, double v) {
    if (i < 0 || i >= n_ || j < 0 || j >= n_) throw std::out_of_range("BandMatrix::add");
    diag_for(j - i)[std::size_t(i)] += v;
}

double BandMatrix::coeff(int i, int j) const {
    const int off = j - i;
    auto it = std::lower_bound(offsets_.begin(), offsets_.end(), off);
    if (it == offsets_.end() || *it != off) return 0.0;
    return diags_[std::size_t(it - offsets_.begin())][std::size_t(i)];
}

std::span<const double> BandMatrix::diagonal(int off) const {
    auto it = std::lower_bound(offsets_.begin(), offsets_.end(), off);
    if (it == offsets_.end() || *it != off) return {};
    return diags_[std::size_t(it - offsets_.begin())];
}

void BandMatrix::matvec(std::span<const double> x, std::span<double> y) const {
    if (int(x.size()) != n_ || int(y.size()) != n_) throw std::invalid_argument("matvec size");
    std::fill(y.begin(), y.end(), 0.0);
    for (std::size_t k = 0; k < offsets_.size(); ++k) {
        const int off = offsets_[k];
        const int i0 = std::max(0, -off);
        const int i1 = n_ - std::max(0, off);
        if (i1 <= i0) continue;
        const std::size_t len = std::size_t(i1 - i0);
        kernels::emadd({diags_[k].data() + i0, len}, {x.data() + i0 + off, len},
                       {y.data() + i0, len});
    }
}

void BandMatrix::add_scaled(double alpha, const BandMatrix& other) {
    if (other.n_ != n_) throw std::invalid_argument("add_scaled size");
    for (std::size_t k = 0; k < other.offsets_.size(); ++k) {
        auto& d = diag_for(other.offsets_[k]);
        kernels::axpy(alpha, other.diags_[k], d);
    }
}

BandMatrix BandMatrix::scaled(double alpha) const {
    BandMatrix out(n_);
    out.add_scaled(alpha, *this);
    return out;
}

BandMatrix BandMatrix::times(const BandMatrix& other) const {
    if (other.n_ != n_) throw std::invalid_argument("times size");
    BandMatrix out(n_);
    for (std::size_t a = 0; a < offsets_.size(); ++a) {
        const int oa = offsets_[a];
        for (std::size_t b = 0; b < other.offsets_.size(); ++b) {
            const int ob = other.offsets_[b];
            // C(i, i+oa+ob) += A(i, i+oa) * B(i+oa, i+oa+ob)
            auto& c = out.diag_for(oa + ob);
            const int i0 = std::max({0, -oa, -(oa + ob)});
            const int i1 = n_ - std::max({0, oa, oa + ob});
            for (int i = i0; i < i1; ++i)
                c[std::size_t(i)] += diags_[a][std::size_t(i)] *
                                     other.diags_[b][std::size_t(i + oa)];
        }
    }
    return out;
}

bool BandMatrix::is_symmetric(double tol) const {
    for (std::size_t k = 0; k < offsets_.size(); ++k) {
        const int off = offsets_[k];
        const int i0 = std::max(0, -off);
        const int i1 = n_ - std::max(0, off);
        for (int i = i0; i < i1; ++i)
            if (std::abs(diags_[k][std::size_t(i)] - coeff(i + off, i)) > tol) return false;
    }
    return true;
}

int BandMatrix::lower_bandwidth() const {
    int kl = 0;
    for (int off : offsets_) kl = std::max(kl, -off);
    return kl;
}

int BandMatrix::upper_bandwidth() const {
    int ku = 0;
    for (int off : offsets_) ku = std::max(ku, off);
    return ku;
}

std::vector<double> BandMatrix::to_dense() const {
    std::vector<double> d(std::size_t(n_) * n_, 0.0);
    for (std::size_t k = 0; k < offsets_.size(); ++k) {
        const int off = offsets_[k];
        const int i0 = std::max(0, -off);
        const int i1 = n_ - std::max(0, off);
        for (int i = i0; i < i1; ++i)
            d[std::size_t(i) * n_ + (i + off)] = diags_[k][std::size_t(i)];
    }
    return d;
}

BandLU::BandLU(const BandMatrix& a)
    : n_(a.size()),
      kl_(a.lower_bandwidth()),
      ku_(a.upper_bandwidth()),
      width_(2 * kl_ + ku_ + 1),
      work_(std::size_t(n_) * width_, 0.0),
      pivots_(n_) {
    for (int off : a.offsets()) {
        auto d = a.diagonal(off);
        const int i0 = std::max(0, -off);
        const int i1 = n_ - std::max(0, off);
        for (int i = i0; i < i1; ++i) at(i, i + off) = d[std::size_t(i)];
    }
    for (int k = 0; k < n_; ++k) {
        const int last = std::min(n_ - 1, k + kl_);
        int p = k;
        for (int i = k + 1; i <= last; ++i)
            if (std::abs(at(i, k)) > std::abs(at(p, k))) p = i;
        pivots_[k] = p;
        if (at(p, k) == 0.0) throw std::runtime_error("BandLU: singular matrix");
        if (p != k) {
            const int jmax = std::min(n_ - 1, k + ku_ + kl_);
            for (int j = k; j <= jmax; ++j) std::swap(at(k, j), at(p, j));
        }
        const double pivot = at(k, k);
        const int jmax = std::min(n_ - 1, k + ku_ + kl_);
        for (int i = k + 1; i <= last; ++i) {
            const double m = at(i, k) / pivot;
            at(i, k) = m;
            if (m != 0.0)
                for (int j = k + 1; j <= jmax; ++j) at(i, j) -= m * at(k, j);
        }
    }
}

void BandLU::solve_inplace(std::span<double> b) const {
    if (int(b.size()) != n_) throw std::invalid_argument("BandLU::solve size");
    for (int k = 0; k < n_; ++k) {
        if (pivots_[k] != k) std::swap(b[std::size_t(k)], b[std::size_t(pivots_[k])]);
        const int last = std::min(n_ - 1, k + kl_);
        const double bk = b[std::size_t(k)];
        if (bk != 0.0)
            for (int i = k + 1; i <= last; ++i) b[std::size_t(i)] -= at(i, k) * bk;
    }
    for (int i = n_ - 1; i >= 0; --i) {
        double s = b[std::size_t(i)];
        const int jmax = std::min(n_ - 1, i + ku_ + kl_);
        for (int j = i + 1; j <= jmax; ++j) s -= at(i, j) * b[std::size_t(j)];
        b[std::size_t(i)] = s / at(i, i);
    }
}

std::vector<double> BandLU::solve(std::span<const double> b) const {
    std::vector<double> x(b.begin(), b.end());
    solve_inplace(x);
    return x;
}

}  // namespace splitlab
