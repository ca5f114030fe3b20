#include "hawkesbg/banded.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hawkesbg {

SymmetricBandMatrix::SymmetricBandMatrix(std::size_t size, std::size_t half_bandwidth)
    : size_(size), kd_(half_bandwidth), storage_(size * (half_bandwidth + 1), 0.0) {}

double SymmetricBandMatrix::operator()(std::size_t i, std::size_t j) const {
    if (i < j) {
        std::swap(i, j);
    }
    if (i - j > kd_) {
        return 0.0;
    }
    return storage_[(i - j) + j * (kd_ + 1)];
}

void SymmetricBandMatrix::add_outer(std::size_t first, const std::array<double, 4>& row,
                                    double weight) {
    for (std::size_t c = 0; c < 4; ++c) {
        const double wc = weight * row[c];
        if (wc == 0.0) {
            continue;
        }
        for (std::size_t r = c; r < 4; ++r) {
            lower(first + r, first + c) += wc * row[r];
        }
    }
}

void SymmetricBandMatrix::add(const SymmetricBandMatrix& other, double scale) {
    for (std::size_t k = 0; k < storage_.size(); ++k) {
        storage_[k] += scale * other.storage_[k];
    }
}

void SymmetricBandMatrix::add_diagonal(double value) {
    for (std::size_t j = 0; j < size_; ++j) {
        storage_[j * (kd_ + 1)] += value;
    }
}

std::vector<double> SymmetricBandMatrix::multiply(std::span<const double> x) const {
    std::vector<double> y(size_, 0.0);
    for (std::size_t j = 0; j < size_; ++j) {
        y[j] += storage_[j * (kd_ + 1)] * x[j];
        const std::size_t last = std::min(size_ - 1, j + kd_);
        for (std::size_t i = j + 1; i <= last; ++i) {
            const double v = storage_[(i - j) + j * (kd_ + 1)];
            y[i] += v * x[j];
            y[j] += v * x[i];
        }
    }
    return y;
}

Eigen::MatrixXd SymmetricBandMatrix::to_dense() const {
    const auto n = static_cast<Eigen::Index>(size_);
    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t j = 0; j < size_; ++j) {
        const std::size_t last = std::min(size_ - 1, j + kd_);
        for (std::size_t i = j; i <= last; ++i) {
            const double v = storage_[(i - j) + j * (kd_ + 1)];
            dense(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
            dense(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
        }
    }
    return dense;
}

std::optional<BandCholesky> BandCholesky::factor(const SymmetricBandMatrix& matrix) {
    SymmetricBandMatrix work = matrix;
    const auto n = static_cast<lapack_int>(matrix.size());
    const auto kd = static_cast<lapack_int>(matrix.half_bandwidth());
    const lapack_int info =
        LAPACKE_dpbtrf(LAPACK_COL_MAJOR, 'L', n, kd, work.storage().data(), kd + 1);
    if (info != 0) {
        return std::nullopt;
    }
    return BandCholesky(std::move(work));
}

void BandCholesky::solve_in_place(std::span<double> rhs) const {
    const auto n = static_cast<lapack_int>(factor_.size());
    const auto kd = static_cast<lapack_int>(factor_.half_bandwidth());
    LAPACKE_dpbtrs(LAPACK_COL_MAJOR, 'L', n, kd, 1, factor_.storage().data(), kd + 1, rhs.data(),
                   n);
}

double BandCholesky::log_determinant() const {
    double sum = 0.0;
    const std::size_t stride = factor_.half_bandwidth() + 1;
    for (std::size_t j = 0; j < factor_.size(); ++j) {
        sum += std::log(factor_.storage()[j * stride]);
    }
    return 2.0 * sum;
}

std::optional<BandLdlt> BandLdlt::factor(const SymmetricBandMatrix& matrix) {
    const std::size_t n = matrix.size();
    const std::size_t kd = matrix.half_bandwidth();
    SymmetricBandMatrix f = matrix;
    double scale = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        scale = std::max(scale, std::abs(matrix(j, j)));
    }
    const double tiny = 1e-13 * scale;
    std::size_t negative = 0;
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t first = j > kd ? j - kd : 0;
        double d = f.lower(j, j);
        for (std::size_t k = first; k < j; ++k) {
            const double l = f.lower(j, k);
            d -= l * l * f.lower(k, k);
        }
        if (!(std::abs(d) > tiny)) {
            return std::nullopt;
        }
        f.lower(j, j) = d;
        negative += d < 0.0;
        const std::size_t last = std::min(n - 1, j + kd);
        for (std::size_t i = j + 1; i <= last; ++i) {
            double v = f.lower(i, j);
            for (std::size_t k = std::max(first, i > kd ? i - kd : 0); k < j; ++k) {
                v -= f.lower(i, k) * f.lower(j, k) * f.lower(k, k);
            }
            f.lower(i, j) = v / d;
        }
    }
    return BandLdlt(std::move(f), negative);
}

void BandLdlt::solve_in_place(std::span<double> x) const {
    const std::size_t n = factor_.size();
    const std::size_t kd = factor_.half_bandwidth();
    const auto& f = factor_;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = i > kd ? i - kd : 0; k < i; ++k) {
            x[i] -= f.lower(i, k) * x[k];
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        x[i] /= f.lower(i, i);
    }
    for (std::size_t i = n; i-- > 0;) {
        const std::size_t last = std::min(n - 1, i + kd);
        for (std::size_t k = i + 1; k <= last; ++k) {
            x[i] -= f.lower(k, i) * x[k];
        }
    }
}

double BandLdlt::log_abs_determinant() const {
    double sum = 0.0;
    for (std::size_t i = 0; i < factor_.size(); ++i) {
        sum += std::log(std::abs(factor_(i, i)));
    }
    return sum;
}

std::optional<BandPlusRankOne> BandPlusRankOne::factor(const SymmetricBandMatrix& band,
                                                       double ones_weight) {
    std::vector<double> b_inv_ones(band.size(), 1.0);
    if (auto chol = BandCholesky::factor(band)) {
        chol->solve_in_place(b_inv_ones);
        const double denominator =
            1.0 + ones_weight * std::accumulate(b_inv_ones.begin(), b_inv_ones.end(), 0.0);
        if (!(denominator > 0.0)) {
            return std::nullopt;
        }
        return BandPlusRankOne(std::move(chol), std::nullopt, ones_weight, std::move(b_inv_ones), denominator);
    }
    // B has a negative direction: the sum is positive definite exactly when
    // B has one negative eigenvalue and the rank-one term flips it.
    if (!(ones_weight > 0.0)) {
        return std::nullopt;
    }
    auto ldlt = BandLdlt::factor(band);
    if (!ldlt || ldlt->negative_pivots() != 1) {
        return std::nullopt;
    }
    ldlt->solve_in_place(b_inv_ones);
    const double denominator = 1.0 + ones_weight * std::accumulate(b_inv_ones.begin(), b_inv_ones.end(), 0.0);
    // a denominator near zero means the sum is nearly singular
    if (!(denominator < -1e-10)) {
        return std::nullopt;
    }
    return BandPlusRankOne(std::nullopt, std::move(ldlt), ones_weight, std::move(b_inv_ones), denominator);
}

void BandPlusRankOne::band_solve(std::span<double> x) const {
    if (chol_) {
        chol_->solve_in_place(x);
    } else {
        ldlt_->solve_in_place(x);
    }
}

std::vector<double> BandPlusRankOne::solve(std::span<const double> rhs) const {
    std::vector<double> x(rhs.begin(), rhs.end());
    band_solve(x);
    const double ones_dot_x = std::accumulate(x.begin(), x.end(), 0.0);
    const double scale = weight_ * ones_dot_x / denominator_;
    for (std::size_t k = 0; k < x.size(); ++k) {
        x[k] -= scale * b_inv_ones_[k];
    }
    return x;
}

double BandPlusRankOne::log_determinant() const {
    if (chol_) {
        return chol_->log_determinant() + std::log(denominator_);
    }
    return ldlt_->log_abs_determinant() + std::log(-denominator_);
}

}  // namespace hawkesbg
