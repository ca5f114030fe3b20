#include "hawkesbg/basis.hpp"

#include "hawkesbg/errors.hpp"
#include "hawkesbg/event_io.hpp"

#include <cmath>
#include <ostream>
#include <string>

namespace hawkesbg {

double bspline_base(double x) {
    if (x <= 0.0 || x >= 4.0) {
        return 0.0;
    }
    if (x < 1.0) {
        return x * x * x / 6.0;
    }
    if (x < 2.0) {
        return (((-3.0 * x + 12.0) * x - 12.0) * x + 4.0) / 6.0;
    }
    if (x < 3.0) {
        return (((3.0 * x - 24.0) * x + 60.0) * x - 44.0) / 6.0;
    }
    const double r = 4.0 - x;
    return r * r * r / 6.0;
}

double bspline_base_deriv(double x) {
    if (x <= 0.0 || x >= 4.0) {
        return 0.0;
    }
    if (x < 1.0) {
        return 0.5 * x * x;
    }
    if (x < 2.0) {
        return (-9.0 * x * x + 24.0 * x - 12.0) / 6.0;
    }
    if (x < 3.0) {
        return (9.0 * x * x - 48.0 * x + 60.0) / 6.0;
    }
    const double r = 4.0 - x;
    return -0.5 * r * r;
}

std::size_t basis_count(std::size_t n, std::size_t k) {
    if (k == 0) {
        throw ConfigError("basis divisor k must be at least 1");
    }
    std::size_t rounded = n / k;
    if (2 * (n % k) >= k) {
        ++rounded;
    }
    return std::max<std::size_t>(4, 3 + rounded);
}

NaturalTimeBasis::NaturalTimeBasis(std::size_t n, std::size_t m)
    : n_(n), m_(m), spacing_(0.0) {
    if (n < 1) {
        throw ConfigError("basis needs at least one event");
    }
    if (m < 4) {
        throw ConfigError("basis needs at least 4 functions, got " + std::to_string(m));
    }
    spacing_ = static_cast<double>(n + 1) / static_cast<double>(m - 3);

    first_col_.resize(n + 2);
    values_.resize(n + 2);
    derivs_.resize(n);
    const double inv_spacing = 1.0 / spacing_;
    for (std::size_t i = 0; i <= n + 1; ++i) {
        // u = i / w, computed so that u is exact at i = n + 1.
        const double u = static_cast<double>(i) * static_cast<double>(m - 3) /
                         static_cast<double>(n + 1);
        const auto base = std::min(static_cast<std::size_t>(std::floor(u)), m - 4);
        first_col_[i] = base;
        Row vals{};
        Row ders{};
        for (std::size_t r = 0; r < kRowWidth; ++r) {
            const double x = u - static_cast<double>(base + r) + 3.0;
            vals[r] = bspline_base(x);
            ders[r] = bspline_base_deriv(x) * inv_spacing;
        }
        values_[i] = vals;
        if (i >= 1 && i <= n) {
            derivs_[i - 1] = ders;
        }
    }
}

double NaturalTimeBasis::value(std::size_t i, std::size_t j) const {
    const std::size_t base = first_column(i);
    if (j < base || j >= base + kRowWidth) {
        return 0.0;
    }
    return values_[i][j - base];
}

const NaturalTimeBasis::Row& NaturalTimeBasis::deriv_row(std::size_t i) const {
    if (i < 1 || i > n_) {
        throw DomainError("derivative rows exist for i = 1..n only");
    }
    return derivs_[i - 1];
}

double NaturalTimeBasis::deriv(std::size_t i, std::size_t j) const {
    const Row& row = deriv_row(i);
    const std::size_t base = first_col_[i];
    if (j < base || j >= base + kRowWidth) {
        return 0.0;
    }
    return row[j - base];
}

double NaturalTimeBasis::row_dot(std::size_t i, std::span<const double> coeffs) const {
    const std::size_t base = first_col_[i];
    const Row& row = values_[i];
    return row[0] * coeffs[base] + row[1] * coeffs[base + 1] + row[2] * coeffs[base + 2] +
           row[3] * coeffs[base + 3];
}

NaturalTimeBasis build_basis(std::size_t n, std::size_t k) {
    if (n < 1) {
        throw ConfigError("basis needs at least one event");
    }
    return NaturalTimeBasis(n, basis_count(n, k));
}

void write_basis_csv(const NaturalTimeBasis& basis, std::ostream& out) {
    out << "i";
    for (std::size_t j = 1; j <= basis.basis_count(); ++j) {
        out << ",f" << j;
    }
    out << '\n';
    for (std::size_t i = 0; i < basis.value_rows(); ++i) {
        out << i;
        for (std::size_t j = 0; j < basis.basis_count(); ++j) {
            out << ',' << format_double(basis.value(i, j));
        }
        out << '\n';
    }
}

}  // namespace hawkesbg
