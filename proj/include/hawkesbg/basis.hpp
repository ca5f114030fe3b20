#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace hawkesbg {

// Uniform cubic B-spline bump supported on [0, 4], peak 2/3 at x = 2.
double bspline_base(double x);

// First derivative of bspline_base.
double bspline_base_deriv(double x);

// Number of bases m = 3 + nearest_integer(n / k), never fewer than 4.
// Ties round half away from zero.
std::size_t basis_count(std::size_t n, std::size_t k);

// Variable-width cubic B-spline basis in natural time.
//
// Events sit at natural-time positions t'_i = i (i = 1..n), the window edges
// at 0 and n + 1. m fixed-width bases F^j(t') = f((t' - xi_{j-4}) / w) with
// knot spacing w = (n + 1) / (m - 3) are sampled at the integers, which gives
// the piecewise-constant actual-time basis f_i^j = F^j(i) on [t_i, t_{i+1}).
//
// Rows are stored compactly: each row has at most four nonzero columns,
// starting at first_column(i). Column indices are 0-based (column c holds
// F^{c+1}).
class NaturalTimeBasis {
public:
    static constexpr std::size_t kRowWidth = 4;
    using Row = std::array<double, kRowWidth>;

    // Throws ConfigError when n < 1 or m < 4.
    NaturalTimeBasis(std::size_t n, std::size_t m);

    std::size_t event_count() const noexcept { return n_; }
    std::size_t basis_count() const noexcept { return m_; }
    double knot_spacing() const noexcept { return spacing_; }

    // Value rows exist for i = 0..n+1.
    std::size_t value_rows() const noexcept { return n_ + 2; }
    std::size_t first_column(std::size_t i) const { return first_col_.at(i); }
    const Row& value_row(std::size_t i) const { return values_.at(i); }
    double value(std::size_t i, std::size_t j) const;

    // Derivative rows dF^j/dt' at t' = i exist for i = 1..n.
    const Row& deriv_row(std::size_t i) const;
    double deriv(std::size_t i, std::size_t j) const;

    // Dot product of row i with a coefficient vector of length m.
    double row_dot(std::size_t i, std::span<const double> coeffs) const;

private:
    std::size_t n_;
    std::size_t m_;
    double spacing_;
    std::vector<std::size_t> first_col_;
    std::vector<Row> values_;
    std::vector<Row> derivs_;
};

// Builds the basis with m = basis_count(n, k). Throws ConfigError for n < 1 or k < 1.
NaturalTimeBasis build_basis(std::size_t n, std::size_t k);

// Dense CSV dump of the value matrix: header "i,f1,...,fm", one row per i.
void write_basis_csv(const NaturalTimeBasis& basis, std::ostream& out);

}  // namespace hawkesbg
