#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "nlchain/errors.hpp"

namespace nlchain {

/// Tridiagonal linear system A y = rhs, stored as three flat diagonals.
/// sub and sup have length n-1, diag and rhs length n.
struct TridiagonalSystem {
    std::vector<double> sub;
    std::vector<double> diag;
    std::vector<double> sup;
    std::vector<double> rhs;

    std::size_t size() const { return diag.size(); }

    void validate() const {
        const std::size_t n = diag.size();
        if (n < 1) throw ValidationError("diag", "system must have size >= 1");
        if (sub.size() != n - 1 || sup.size() != n - 1 || rhs.size() != n)
            throw ValidationError("system", "inconsistent diagonal/rhs lengths");
    }
};

/// Solves a tridiagonal system by LU reduction with partial pivoting.
///
/// Pivoting exchanges only adjacent rows (the sole exchange a tridiagonal
/// pattern admits), which introduces at most one extra superdiagonal of
/// fill-in. Throws SingularMatrixError when a pivot falls below
/// 1e-14 * max|entry|, signalling a degenerate matrix.
inline std::vector<double> crout_solve(const TridiagonalSystem& system) {
    system.validate();
    const std::size_t n = system.size();

    std::vector<double> sub = system.sub;
    std::vector<double> diag = system.diag;
    std::vector<double> sup = system.sup;
    std::vector<double> b = system.rhs;
    std::vector<double> fill(n >= 2 ? n - 2 : 0, 0.0); // second superdiagonal

    double max_entry = 0.0;
    for (double v : diag) max_entry = std::max(max_entry, std::abs(v));
    for (double v : sub) max_entry = std::max(max_entry, std::abs(v));
    for (double v : sup) max_entry = std::max(max_entry, std::abs(v));

    const double pivot_floor = 1e-14 * max_entry;
    auto check_pivot = [&](double pivot, std::size_t row) {
        if (std::abs(pivot) <= pivot_floor)
            throw SingularMatrixError("zero pivot in row " + std::to_string(row) +
                                      " of tridiagonal factorization");
    };

    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (std::abs(diag[i]) >= std::abs(sub[i])) {
            check_pivot(diag[i], i);
            const double m = sub[i] / diag[i];
            diag[i + 1] -= m * sup[i];
            b[i + 1] -= m * b[i];
            if (i + 2 < n) fill[i] = 0.0;
        } else {
            // exchange rows i and i+1
            const double m = diag[i] / sub[i];
            diag[i] = sub[i];
            const double tmp = diag[i + 1];
            diag[i + 1] = sup[i] - m * tmp;
            sup[i] = tmp;
            if (i + 2 < n) {
                fill[i] = sup[i + 1];
                sup[i + 1] = -m * fill[i];
            }
            std::swap(b[i], b[i + 1]);
            b[i + 1] -= m * b[i];
        }
    }
    check_pivot(diag[n - 1], n - 1);

    std::vector<double> y(n);
    const auto last = static_cast<std::ptrdiff_t>(n) - 1;
    y[last] = b[last] / diag[last];
    if (last >= 1) y[last - 1] = (b[last - 1] - sup[last - 1] * y[last]) / diag[last - 1];
    for (std::ptrdiff_t r = last - 2; r >= 0; --r)
        y[r] = (b[r] - sup[r] * y[r + 1] - fill[r] * y[r + 2]) / diag[r];
    return y;
}

} // namespace nlchain
