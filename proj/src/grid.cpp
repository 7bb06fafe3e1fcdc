#include "lattice_lab/grid.hpp"

#include "lattice_lab/errors.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace lattice_lab {

Grid::Grid(double p_max, std::size_t n) : p_max_(p_max), dp_(0.0) {
    if (!std::isfinite(p_max) || p_max <= 0.0) {
        throw ValidationError("grid.p_max must be positive and finite");
    }
    if (n < 4 || n % 2 != 0) {
        throw ValidationError("grid.n must be even and >= 4, got " + std::to_string(n));
    }
    dp_ = 2.0 * p_max / static_cast<double>(n);
    faces_.resize(n + 1);
    centers_.resize(n);
    for (std::size_t i = 0; i <= n; ++i) {
        faces_[i] = -p_max + dp_ * static_cast<double>(i);
    }
    // Exact mirror symmetry: the upper half is the negated lower half.
    for (std::size_t i = 0; i < n / 2; ++i) {
        const double c = -p_max + dp_ * (static_cast<double>(i) + 0.5);
        centers_[i] = c;
        centers_[n - 1 - i] = -c;
        faces_[n - i] = -faces_[i];
    }
    faces_[n / 2] = 0.0;
}

double Field::mass() const noexcept {
    return std::accumulate(values.begin(), values.end(), 0.0) * grid.dp();
}

double l1_distance(const Field& a, std::span<const double> b) {
    if (a.values.size() != b.size()) {
        throw ValidationError("l1_distance: size mismatch");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        sum += std::abs(a.values[i] - b[i]);
    }
    return sum * a.grid.dp();
}

}  // namespace lattice_lab
