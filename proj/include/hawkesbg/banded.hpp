#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace hawkesbg {

// Symmetric matrix stored as its lower band in LAPACK "AB" layout
// (column-major, kd + 1 rows): entry (i, j) with j <= i <= j + kd lives at
// storage[(i - j) + j * (kd + 1)].
class SymmetricBandMatrix {
public:
    SymmetricBandMatrix() = default;
    SymmetricBandMatrix(std::size_t size, std::size_t half_bandwidth);

    std::size_t size() const noexcept { return size_; }
    std::size_t half_bandwidth() const noexcept { return kd_; }

    // Symmetric lookup; zero outside the band.
    double operator()(std::size_t i, std::size_t j) const;
    // Lower-band element (requires j <= i <= j + kd).
    double& lower(std::size_t i, std::size_t j) { return storage_[(i - j) + j * (kd_ + 1)]; }
    double lower(std::size_t i, std::size_t j) const { return storage_[(i - j) + j * (kd_ + 1)]; }

    // this += weight * r r^T where r is nonzero only on columns first..first+3.
    void add_outer(std::size_t first, const std::array<double, 4>& row, double weight);
    void add(const SymmetricBandMatrix& other, double scale = 1.0);
    void add_diagonal(double value);

    // y = A x
    std::vector<double> multiply(std::span<const double> x) const;

    Eigen::MatrixXd to_dense() const;

    std::vector<double>& storage() noexcept { return storage_; }
    const std::vector<double>& storage() const noexcept { return storage_; }

private:
    std::size_t size_ = 0;
    std::size_t kd_ = 0;
    std::vector<double> storage_;
};

// Cholesky factor of a symmetric positive definite band matrix.
class BandCholesky {
public:
    // Returns nullopt when the matrix is not numerically positive definite.
    static std::optional<BandCholesky> factor(const SymmetricBandMatrix& matrix);

    void solve_in_place(std::span<double> rhs) const;
    double log_determinant() const;
    std::size_t size() const noexcept { return factor_.size(); }

private:
    explicit BandCholesky(SymmetricBandMatrix factor) : factor_(std::move(factor)) {}
    SymmetricBandMatrix factor_;
};

// Unpivoted L D L^T factor of a symmetric band matrix. Meant for matrices
// that are close to definite; a tiny pivot makes factor() fail.
class BandLdlt {
public:
    static std::optional<BandLdlt> factor(const SymmetricBandMatrix& matrix);

    void solve_in_place(std::span<double> rhs) const;
    double log_abs_determinant() const;
    // Number of negative pivots, which is the number of negative eigenvalues.
    std::size_t negative_pivots() const noexcept { return negative_; }

private:
    BandLdlt(SymmetricBandMatrix factor, std::size_t negative)
        : factor_(std::move(factor)), negative_(negative) {}
    SymmetricBandMatrix factor_;  // unit L below the diagonal, D on it
    std::size_t negative_;
};

// Positive definite band matrix plus a rank-one all-ones term: B + c 1 1^T
// with c > 0. Solves and log-determinants go through a band factor of B
// using the Sherman-Morrison identity and the matrix determinant lemma.
// B itself may have one negative eigenvalue as long as the sum is positive
// definite (then 1 + c 1^T B^{-1} 1 < 0).
class BandPlusRankOne {
public:
    static std::optional<BandPlusRankOne> factor(const SymmetricBandMatrix& band, double ones_weight);

    std::vector<double> solve(std::span<const double> rhs) const;
    double log_determinant() const;

private:
    BandPlusRankOne(std::optional<BandCholesky> chol, std::optional<BandLdlt> ldlt, double ones_weight,
                    std::vector<double> b_inv_ones, double denominator)
        : chol_(std::move(chol)), ldlt_(std::move(ldlt)), weight_(ones_weight),
          b_inv_ones_(std::move(b_inv_ones)), denominator_(denominator) {}

    void band_solve(std::span<double> x) const;

    std::optional<BandCholesky> chol_;
    std::optional<BandLdlt> ldlt_;
    double weight_;
    std::vector<double> b_inv_ones_;
    double denominator_;  // 1 + c 1^T B^{-1} 1
};

}  // namespace hawkesbg
